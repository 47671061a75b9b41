#include "lpos/modp.hpp"

#include <stdexcept>

#include "lpos/errors.hpp"

namespace lpos {

namespace {

constexpr int kPrimeReps = 30;       // Miller-Rabin rounds
constexpr int kSetupRetries = 40000; // candidates for p before giving up

mpz_class random_bits(DetRng& rng, unsigned bits, bool set_top) {
    size_t nbytes = (bits + 7) / 8;
    Bytes raw = rng.bytes(nbytes);
    unsigned excess = unsigned(nbytes * 8 - bits);
    raw[0] &= uint8_t(0xff >> excess);
    if (set_top) raw[0] |= uint8_t(0x80 >> excess);
    return mpz_from_bytes(raw.data(), raw.size());
}

}  // namespace

mpz_class pow_mod(const mpz_class& base, const mpz_class& exp, const mpz_class& mod,
                  ModExpMeter* meter) {
    if (meter) meter->count++;
    mpz_class out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return out;
}

void ElGamalParams::validate() const {
    if (p < 3 || q < 2) throw std::invalid_argument("elgamal: degenerate modulus");
    if (mpz_probab_prime_p(p.get_mpz_t(), kPrimeReps) == 0)
        throw std::invalid_argument("elgamal: p not prime");
    if (mpz_probab_prime_p(q.get_mpz_t(), kPrimeReps) == 0)
        throw std::invalid_argument("elgamal: q not prime");
    if ((p - 1) % q != 0) throw std::invalid_argument("elgamal: q does not divide p-1");
    if (alpha <= 1 || alpha >= p) throw std::invalid_argument("elgamal: bad generator");
    if (pow_mod(alpha, q, p) != 1)
        throw std::invalid_argument("elgamal: generator order is not q");
    if (l < 1 || l > 64) throw std::invalid_argument("elgamal: l out of range");
}

size_t ElGamalParams::element_bytes() const {
    return (mpz_sizeinbase(p.get_mpz_t(), 2) + 7) / 8;
}

ElGamalParams elgamal_setup(unsigned p_bits, unsigned q_bits, DetRng& rng,
                            unsigned l) {
    if (q_bits < 8 || p_bits < q_bits + 8)
        throw std::invalid_argument("elgamal: need p_bits >= q_bits + 8, q_bits >= 8");
    if (l < 1 || l > 64) throw std::invalid_argument("elgamal: l out of range");

    mpz_class q = random_bits(rng, q_bits, true);
    mpz_nextprime(q.get_mpz_t(), q.get_mpz_t());

    unsigned k_bits = p_bits - q_bits;
    for (int attempt = 0; attempt < kSetupRetries; attempt++) {
        mpz_class k = random_bits(rng, k_bits, true);
        mpz_clrbit(k.get_mpz_t(), 0);  // even k keeps p = k*q + 1 odd
        mpz_class p = k * q + 1;
        if (mpz_sizeinbase(p.get_mpz_t(), 2) != p_bits) continue;
        if (mpz_probab_prime_p(p.get_mpz_t(), kPrimeReps) == 0) continue;

        mpz_class exp = (p - 1) / q;
        for (int g = 0; g < 64; g++) {
            mpz_class h = 2 + mpz_below(rng, p - 3);
            mpz_class alpha = pow_mod(h, exp, p);
            if (alpha == 1) continue;
            ElGamalParams params{p, q, alpha, l};
            params.validate();
            return params;
        }
    }
    throw SetupError("elgamal: prime generation retry budget exhausted");
}

ElGamalKeyPair elgamal_keygen(const ElGamalParams& params, DetRng& rng,
                              ModExpMeter* meter) {
    ElGamalKeyPair kp;
    kp.sk = rand_exponent(params, rng);
    kp.pk = pow_mod(params.alpha, kp.sk, params.p, meter);
    return kp;
}

mpz_class rand_exponent(const ElGamalParams& params, DetRng& rng) {
    return 1 + mpz_below(rng, params.q - 1);
}

mpz_class random_group_element(const ElGamalParams& params, DetRng& rng,
                               ModExpMeter* meter) {
    return pow_mod(params.alpha, rand_exponent(params, rng), params.p, meter);
}

ElGamalCiphertext elgamal_encrypt(const ElGamalParams& params, const mpz_class& pk,
                                  const mpz_class& m, DetRng& rng,
                                  ModExpMeter* meter) {
    mpz_class t = rand_exponent(params, rng);
    ElGamalCiphertext ct;
    ct.c1 = pow_mod(params.alpha, t, params.p, meter);
    ct.c2 = (m * pow_mod(pk, t, params.p, meter)) % params.p;
    return ct;
}

mpz_class elgamal_decrypt(const ElGamalParams& params, const ElGamalKeyPair& kp,
                          const ElGamalCiphertext& ct, ModExpMeter* meter) {
    mpz_class shared = pow_mod(ct.c1, kp.sk, params.p, meter);
    mpz_class inv;
    if (mpz_invert(inv.get_mpz_t(), shared.get_mpz_t(), params.p.get_mpz_t()) == 0)
        throw ProtocolError("elgamal: non-invertible ciphertext component");
    return (ct.c2 * inv) % params.p;
}

ElGamalCiphertext ct_mul(const ElGamalParams& params, const ElGamalCiphertext& a,
                         const ElGamalCiphertext& b) {
    return {(a.c1 * b.c1) % params.p, (a.c2 * b.c2) % params.p};
}

ElGamalCiphertext ct_pow(const ElGamalParams& params, const ElGamalCiphertext& ct,
                         const mpz_class& e, ModExpMeter* meter) {
    return {pow_mod(ct.c1, e, params.p, meter), pow_mod(ct.c2, e, params.p, meter)};
}

ElGamalCiphertext rerandomize(const ElGamalParams& params, const mpz_class& pk,
                              const ElGamalCiphertext& ct, DetRng& rng,
                              ModExpMeter* meter) {
    mpz_class t = rand_exponent(params, rng);
    ElGamalCiphertext fresh;
    fresh.c1 = pow_mod(params.alpha, t, params.p, meter);
    fresh.c2 = pow_mod(pk, t, params.p, meter);  // encryption of the identity
    return ct_mul(params, ct, fresh);
}

bool is_group_element(const ElGamalParams& params, const mpz_class& x,
                      ModExpMeter* meter) {
    if (x < 1 || x >= params.p) return false;
    return pow_mod(x, params.q, params.p, meter) == 1;
}

Bytes element_to_bytes(const ElGamalParams& params, const mpz_class& x) {
    return mpz_to_bytes_fixed(x, params.element_bytes());
}

mpz_class element_from_bytes(const ElGamalParams& params, const Bytes& b,
                             size_t offset) {
    size_t w = params.element_bytes();
    if (offset + w > b.size()) throw DecodeError("elgamal: short element encoding");
    return mpz_from_bytes(b.data() + offset, w);
}

Bytes mpz_to_bytes_fixed(const mpz_class& x, size_t width) {
    if (x < 0) throw std::invalid_argument("mpz_to_bytes_fixed: negative");
    size_t need = (mpz_sizeinbase(x.get_mpz_t(), 2) + 7) / 8;
    if (x == 0) need = 0;
    if (need > width) throw std::invalid_argument("mpz_to_bytes_fixed: overflow");
    Bytes out(width, 0);
    size_t written = 0;
    mpz_export(out.data() + (width - need), &written, 1, 1, 1, 0, x.get_mpz_t());
    return out;
}

mpz_class mpz_from_bytes(const uint8_t* data, size_t len) {
    mpz_class x;
    mpz_import(x.get_mpz_t(), len, 1, 1, 1, 0, data);
    return x;
}

mpz_class mpz_below(DetRng& rng, const mpz_class& bound) {
    if (bound <= 0) throw std::invalid_argument("mpz_below: bound must be positive");
    size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
    size_t nbytes = (bits + 7) / 8;
    unsigned excess = unsigned(nbytes * 8 - bits);
    for (;;) {
        Bytes raw = rng.bytes(nbytes);
        raw[0] &= uint8_t(0xff >> excess);
        mpz_class x = mpz_from_bytes(raw.data(), raw.size());
        if (x < bound) return x;
    }
}

}  // namespace lpos
