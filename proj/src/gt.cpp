#include "lpos/gt.hpp"

#include <stdexcept>

#include "lpos/errors.hpp"

namespace lpos {

namespace {

void check_l_bit(uint64_t v, unsigned l, const char* what) {
    if (l < 1 || l > 64) throw std::invalid_argument("gt: l out of range");
    if (l < 64 && (v >> l)) throw std::invalid_argument(what);
}

void check_table(const ElGamalParams& params, const GtInitMessage& init,
                 ModExpMeter* meter) {
    if (init.l != params.l || init.table.size() != size_t(2) * params.l)
        throw ProtocolError("gt: malformed table");
    for (const auto& ct : init.table)
        if (!is_group_element(params, ct.c1, meter) ||
            !is_group_element(params, ct.c2, meter))
            throw ProtocolError("gt: table element outside group");
}

// Product of the table entries selected by the bits of t, masked by a
// random exponent so a non-identity plaintext carries no structure, then
// re-randomized. Decrypts to the identity iff every selected entry does.
ElGamalCiphertext combine_string(const ElGamalParams& params, const mpz_class& pk,
                                 const GtInitMessage& init, BitPrefix t,
                                 DetRng& rng, ModExpMeter* meter) {
    ElGamalCiphertext acc{1, 1};
    for (unsigned j = 0; j < t.len; j++) {
        unsigned v = unsigned(t.bits >> (t.len - 1 - j)) & 1u;
        acc = ct_mul(params, acc, init.table[size_t(2) * j + v]);
    }
    acc = ct_pow(params, acc, rand_exponent(params, rng), meter);
    return rerandomize(params, pk, acc, rng, meter);
}

GtResponse respond_strings(const ElGamalParams& params, const mpz_class& pk,
                           const std::vector<BitPrefix>& strings,
                           const GtInitMessage& init, DetRng& rng,
                           ModExpMeter* meter) {
    check_table(params, init, meter);
    GtResponse resp;
    resp.session = init.session;
    resp.items.reserve(strings.size());
    for (const auto& t : strings)
        resp.items.push_back(combine_string(params, pk, init, t, rng, meter));
    rng.shuffle(resp.items);
    return resp;
}

}  // namespace

std::vector<BitPrefix> encoding_zero(uint64_t y, unsigned l) {
    check_l_bit(y, l, "gt: y out of range");
    std::vector<BitPrefix> out;
    for (unsigned i = l; i >= 1; i--)
        if (((y >> (i - 1)) & 1u) == 0)
            out.push_back({(y >> (i - 1)) | 1u, l - i + 1});
    return out;
}

std::vector<BitPrefix> encoding_one(uint64_t x, unsigned l) {
    check_l_bit(x, l, "gt: x out of range");
    std::vector<BitPrefix> out;
    for (unsigned i = l; i >= 1; i--)
        if ((x >> (i - 1)) & 1u)
            out.push_back({x >> (i - 1), l - i + 1});
    return out;
}

GtInitMessage gt_table_build(const ElGamalParams& params, const mpz_class& pk,
                             uint64_t x, uint64_t session, DetRng& rng,
                             ModExpMeter* meter) {
    check_l_bit(x, params.l, "gt: x out of range");
    GtInitMessage msg;
    msg.session = session;
    msg.l = params.l;
    msg.table.resize(size_t(2) * params.l);
    for (unsigned j = 0; j < params.l; j++) {
        unsigned bit = unsigned(x >> (params.l - 1 - j)) & 1u;
        msg.table[size_t(2) * j + bit] =
            elgamal_encrypt(params, pk, 1, rng, meter);
        msg.table[size_t(2) * j + (1u - bit)] = elgamal_encrypt(
            params, pk, random_group_element(params, rng, meter), rng, meter);
    }
    return msg;
}

GtInitMessage gt_rerandomize_table(const ElGamalParams& params, const mpz_class& pk,
                                   const GtInitMessage& base, uint64_t session,
                                   DetRng& rng, ModExpMeter* meter) {
    GtInitMessage msg;
    msg.session = session;
    msg.l = base.l;
    msg.table.reserve(base.table.size());
    for (const auto& ct : base.table)
        msg.table.push_back(rerandomize(params, pk, ct, rng, meter));
    return msg;
}

GtResponse gt_respond(const ElGamalParams& params, const mpz_class& pk, uint64_t y,
                      const GtInitMessage& init, DetRng& rng, ModExpMeter* meter) {
    check_l_bit(y, params.l, "gt: y out of range");
    return respond_strings(params, pk, encoding_zero(y, params.l), init, rng, meter);
}

GtResponse gt_respond_exceeds(const ElGamalParams& params, const mpz_class& pk,
                              uint64_t r, const GtInitMessage& init, DetRng& rng,
                              ModExpMeter* meter) {
    check_l_bit(r, params.l, "gt: r out of range");
    // r's 1-encoding strings with the last bit cleared: such a string equals
    // a prefix of the table input x iff x has a 0 where r has a 1 and they
    // agree above it, i.e. iff r > x through that position.
    std::vector<BitPrefix> strings;
    for (unsigned i = params.l; i >= 1; i--)
        if ((r >> (i - 1)) & 1u)
            strings.push_back({(r >> (i - 1)) ^ 1u, params.l - i + 1});
    return respond_strings(params, pk, strings, init, rng, meter);
}

bool gt_decide(const ElGamalParams& params, const ElGamalKeyPair& kp,
               const GtResponse& resp, ModExpMeter* meter) {
    for (const auto& ct : resp.items)
        if (elgamal_decrypt(params, kp, ct, meter) == 1) return true;
    return false;
}

Bytes gt_init_payload(const ElGamalParams& params, const GtInitMessage& msg) {
    Bytes out;
    put_u64(out, msg.session);
    put_u16(out, uint16_t(msg.l));
    for (const auto& ct : msg.table) {
        Bytes c1 = element_to_bytes(params, ct.c1);
        Bytes c2 = element_to_bytes(params, ct.c2);
        out.insert(out.end(), c1.begin(), c1.end());
        out.insert(out.end(), c2.begin(), c2.end());
    }
    return out;
}

GtInitMessage gt_init_from_payload(const ElGamalParams& params, const Bytes& b) {
    ByteReader r(b);
    GtInitMessage msg;
    msg.session = r.u64();
    msg.l = r.u16();
    if (msg.l < 1 || msg.l > 64) throw DecodeError("gt: bad table dimension");
    size_t w = params.element_bytes();
    size_t need = size_t(2) * msg.l * 2 * w;
    if (r.remaining() != need) throw DecodeError("gt: bad table payload size");
    size_t base = b.size() - r.remaining();
    msg.table.resize(size_t(2) * msg.l);
    for (size_t e = 0; e < msg.table.size(); e++) {
        msg.table[e].c1 = element_from_bytes(params, b, base + e * 2 * w);
        msg.table[e].c2 = element_from_bytes(params, b, base + e * 2 * w + w);
    }
    return msg;
}

Bytes gt_resp_payload(const ElGamalParams& params, const GtResponse& resp) {
    Bytes out;
    put_u64(out, resp.session);
    put_u16(out, uint16_t(resp.items.size()));
    for (const auto& ct : resp.items) {
        Bytes c1 = element_to_bytes(params, ct.c1);
        Bytes c2 = element_to_bytes(params, ct.c2);
        out.insert(out.end(), c1.begin(), c1.end());
        out.insert(out.end(), c2.begin(), c2.end());
    }
    return out;
}

GtResponse gt_resp_from_payload(const ElGamalParams& params, const Bytes& b) {
    ByteReader r(b);
    GtResponse resp;
    resp.session = r.u64();
    size_t count = r.u16();
    if (count > 64) throw DecodeError("gt: oversized response");
    size_t w = params.element_bytes();
    if (r.remaining() != count * 2 * w)
        throw DecodeError("gt: bad response payload size");
    size_t base = b.size() - r.remaining();
    resp.items.resize(count);
    for (size_t e = 0; e < count; e++) {
        resp.items[e].c1 = element_from_bytes(params, b, base + e * 2 * w);
        resp.items[e].c2 = element_from_bytes(params, b, base + e * 2 * w + w);
    }
    return resp;
}

GtInitiator::GtInitiator(ElGamalParams params, ElGamalKeyPair kp, uint64_t x,
                         DetRng rng, ModExpMeter* meter)
    : params_(std::move(params)),
      kp_(std::move(kp)),
      rng_(std::move(rng)),
      meter_(meter) {
    base_ = gt_table_build(params_, kp_.pk, x, 0, rng_, meter_);
}

GtInitMessage GtInitiator::initiate() {
    uint64_t session = next_session_++;
    live_.insert(session);
    return gt_rerandomize_table(params_, kp_.pk, base_, session, rng_, meter_);
}

bool GtInitiator::finalize(const GtResponse& resp) {
    auto it = live_.find(resp.session);
    if (it == live_.end()) throw ProtocolError("gt: unknown or replayed session");
    live_.erase(it);
    return gt_decide(params_, kp_, resp, meter_);
}

void GtInitiator::abandon(uint64_t session) { live_.erase(session); }

int ym_compare_bit(const ElGamalParams& params, const ElGamalKeyPair& kp,
                   uint64_t tau, uint64_t r, DetRng& rng, ModExpMeter* meter) {
    GtInitMessage init = gt_table_build(params, kp.pk, tau, 1, rng, meter);
    GtResponse resp = gt_respond_exceeds(params, kp.pk, r, init, rng, meter);
    return gt_decide(params, kp, resp, meter) ? 0 : 1;
}

}  // namespace lpos
