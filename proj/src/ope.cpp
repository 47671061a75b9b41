#include "lpos/ope.hpp"

#include <cmath>
#include <stdexcept>

#include "lpos/errors.hpp"
#include "lpos/hash.hpp"

namespace lpos {

namespace {

using u128 = unsigned __int128;

// Per-node PRF output. The node is identified by its domain and range
// intervals; the path from the root determines both, so the tuple is
// collision-free under a fixed key.
Bytes node_prf(const OpeKey& key, uint8_t tag, uint64_t dlo, uint64_t dhi,
               uint64_t rlo, uint64_t rhi) {
    Bytes msg;
    put_u8(msg, tag);
    put_u64(msg, dlo);
    put_u64(msg, dhi);
    put_u64(msg, rlo);
    put_u64(msg, rhi);
    Bytes key_bytes(key.bytes.begin(), key.bytes.end());
    return keyed_hash(key_bytes, msg, 32);
}

u128 read_u128(const Bytes& b, size_t off) {
    u128 v = 0;
    for (size_t i = 0; i < 16; i++) v = (v << 8) | b.at(off + i);
    return v;
}

// Standard normal deviate from the first 16 PRF bytes (Box-Muller).
double prf_gauss(const Bytes& prf) {
    uint64_t a = 0, b = 0;
    for (int i = 0; i < 8; i++) a = (a << 8) | prf[size_t(i)];
    for (int i = 0; i < 8; i++) b = (b << 8) | prf[size_t(8 + i)];
    double u1 = double((a >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = double(b >> 11) * 0x1.0p-53;        // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

// Number of range points handed to the left domain half. Approximates the
// hypergeometric split of a uniformly random monotone injection with a
// clamped normal sample; every value keeps both halves large enough to
// stay injective.
u128 sample_split(const OpeKey& key, uint64_t dlo, uint64_t dhi, uint64_t rlo,
                  uint64_t rhi, uint64_t dmid) {
    u128 ndomain = u128(dhi) - dlo + 1;
    u128 nrange = u128(rhi) - rlo + 1;
    u128 nleft = u128(dmid) - dlo + 1;
    u128 lo_bound = nleft;
    u128 hi_bound = nrange - (ndomain - nleft);

    if (lo_bound >= hi_bound) return lo_bound;

    Bytes prf = node_prf(key, 0x01, dlo, dhi, rlo, rhi);
    long double f = (long double)(nleft) / (long double)(ndomain);
    long double mean = (long double)(nrange)*f;
    long double sd = std::sqrt((long double)(nrange)*f * (1.0L - f));
    long double s = mean + (long double)prf_gauss(prf) * sd;

    if (s <= (long double)lo_bound) return lo_bound;
    if (s >= (long double)hi_bound) return hi_bound;
    u128 split = (u128)s;
    if (split < lo_bound) split = lo_bound;
    if (split > hi_bound) split = hi_bound;
    return split;
}

// Pseudorandom placement of a fully narrowed plaintext inside its leaf
// range interval.
uint64_t leaf_point(const OpeKey& key, uint64_t m, uint64_t rlo, uint64_t rhi) {
    u128 nrange = u128(rhi) - rlo + 1;
    Bytes prf = node_prf(key, 0x02, m, m, rlo, rhi);
    u128 offset = read_u128(prf, 0) % nrange;
    return uint64_t(u128(rlo) + offset);
}

}  // namespace

void OpeParams::validate() const {
    if (plain_bits < 1 || plain_bits > 63)
        throw std::invalid_argument("ope: plain_bits must be in [1, 63]");
    if (cipher_bits <= plain_bits)
        throw std::invalid_argument("ope: cipher_bits must exceed plain_bits");
    if (cipher_bits > 64)
        throw std::invalid_argument("ope: cipher_bits must be at most 64");
}

uint64_t OpeParams::domain_max() const {
    return (uint64_t(1) << plain_bits) - 1;
}

OpeKey derive_ope_key(const Bytes& group_key, const Bytes& context_label) {
    if (group_key.empty()) throw std::invalid_argument("ope: empty group key");
    Bytes out = kdf(group_key, "lpos-ope-key", context_label, 32);
    OpeKey k;
    std::copy(out.begin(), out.end(), k.bytes.begin());
    return k;
}

uint64_t encode_report(const PaddingBits& padding, uint64_t rss, unsigned gamma,
                       const OpeParams& params) {
    params.validate();
    if (gamma == 0 || gamma + 1 > params.plain_bits)
        throw std::invalid_argument("ope: gamma must satisfy 1 <= gamma <= plain_bits - 1");
    unsigned want = params.plain_bits - gamma - 1;
    if (padding.bit_len != want)
        throw std::invalid_argument("ope: padding width must be plain_bits - gamma - 1");
    if (padding.bit_len < 64 && padding.bit_len > 0 &&
        padding.value >> padding.bit_len)
        throw std::invalid_argument("ope: padding value out of range");
    if (padding.bit_len == 0 && padding.value != 0)
        throw std::invalid_argument("ope: padding value out of range");
    if (rss >> gamma) throw std::invalid_argument("ope: rss out of range");
    return (padding.value << gamma) | rss;
}

OpeCiphertext ope_encrypt(const OpeKey& key, uint64_t plaintext,
                          const OpeParams& params) {
    params.validate();
    if (plaintext > params.domain_max())
        throw std::invalid_argument("ope: plaintext out of domain");

    uint64_t dlo = 0, dhi = params.domain_max();
    uint64_t rlo = 0;
    uint64_t rhi = params.cipher_bits == 64 ? ~uint64_t(0)
                                            : (uint64_t(1) << params.cipher_bits) - 1;
    while (dlo < dhi) {
        // A pinched interval maps by offset; no randomness left to spend.
        if (u128(rhi) - rlo == u128(dhi) - dlo)
            return OpeCiphertext{rlo + (plaintext - dlo)};
        uint64_t dmid = dlo + (dhi - dlo) / 2;
        u128 split = sample_split(key, dlo, dhi, rlo, rhi, dmid);
        if (plaintext <= dmid) {
            dhi = dmid;
            rhi = uint64_t(u128(rlo) + split - 1);
        } else {
            dlo = dmid + 1;
            rlo = uint64_t(u128(rlo) + split);
        }
    }
    return OpeCiphertext{leaf_point(key, plaintext, rlo, rhi)};
}

uint64_t ope_decrypt(const OpeKey& key, OpeCiphertext ct, const OpeParams& params) {
    params.validate();
    if (params.cipher_bits < 64 && (ct.value >> params.cipher_bits))
        throw DecodeError("ope: ciphertext out of range");

    uint64_t dlo = 0, dhi = params.domain_max();
    uint64_t rlo = 0;
    uint64_t rhi = params.cipher_bits == 64 ? ~uint64_t(0)
                                            : (uint64_t(1) << params.cipher_bits) - 1;
    while (dlo < dhi) {
        if (u128(rhi) - rlo == u128(dhi) - dlo) {
            uint64_t m = dlo + (ct.value - rlo);
            if (m < dlo || m > dhi) throw DecodeError("ope: stray ciphertext");
            return m;
        }
        uint64_t dmid = dlo + (dhi - dlo) / 2;
        u128 split = sample_split(key, dlo, dhi, rlo, rhi, dmid);
        uint64_t left_hi = uint64_t(u128(rlo) + split - 1);
        if (ct.value <= left_hi) {
            dhi = dmid;
            rhi = left_hi;
        } else {
            dlo = dmid + 1;
            rlo = left_hi + 1;
        }
    }
    if (leaf_point(key, dlo, rlo, rhi) != ct.value)
        throw DecodeError("ope: stray ciphertext");
    return dlo;
}

Bytes ope_ciphertext_bytes(OpeCiphertext ct, const OpeParams& params) {
    Bytes out;
    put_uint_be(out, ct.value, params.ciphertext_bytes());
    return out;
}

OpeCiphertext ope_ciphertext_from_bytes(const Bytes& b, const OpeParams& params) {
    if (b.size() != params.ciphertext_bytes())
        throw DecodeError("ope: bad ciphertext length");
    ByteReader r(b);
    uint64_t v = r.u64_width(b.size());
    if (params.cipher_bits < 64 && (v >> params.cipher_bits))
        throw DecodeError("ope: ciphertext out of range");
    return OpeCiphertext{v};
}

}  // namespace lpos
