#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "lpos/bytes.hpp"
#include "lpos/modp.hpp"
#include "lpos/rng.hpp"

namespace lpos {

// A bit-string of len bits, value read MSB-first. Prefixes of an l-bit
// integer x are written as (x >> (i - 1), l - i + 1) for bit positions
// i = l (MSB) down to 1.
struct BitPrefix {
    uint64_t bits = 0;
    unsigned len = 0;
    auto operator<=>(const BitPrefix&) const = default;
};

// 0-encoding: { y_l ... y_{i+1} || 1 : bit y_i = 0 }.
std::vector<BitPrefix> encoding_zero(uint64_t y, unsigned l);

// 1-encoding: { x_l ... x_i : bit x_i = 1 }.
// Property: x > y  <=>  encoding_one(x) and encoding_zero(y) intersect.
std::vector<BitPrefix> encoding_one(uint64_t x, unsigned l);

// Initiator table: 2*l ciphertexts, entry (position, bit-value) holding an
// encryption of the identity when the initiator's input has that bit value
// at that position, an encryption of a random group element otherwise.
// Entry for MSB-offset j (position i = l - j) and value v sits at 2*j + v.
struct GtInitMessage {
    uint64_t session = 0;
    unsigned l = 0;
    std::vector<ElGamalCiphertext> table;
};

struct GtResponse {
    uint64_t session = 0;
    std::vector<ElGamalCiphertext> items;
};

// Fresh table over x's bits.
GtInitMessage gt_table_build(const ElGamalParams& params, const mpz_class& pk,
                             uint64_t x, uint64_t session, DetRng& rng,
                             ModExpMeter* meter = nullptr);

// Per-session refresh of a precomputed table: every entry re-randomized,
// plaintexts untouched.
GtInitMessage gt_rerandomize_table(const ElGamalParams& params, const mpz_class& pk,
                                   const GtInitMessage& base, uint64_t session,
                                   DetRng& rng, ModExpMeter* meter = nullptr);

// Responder side of GT(x, y) with x inside the table: combines the table
// along each 0-encoding string of y, masks with a random power, re-randomizes
// and shuffles. A combined ciphertext decrypts to the identity iff that
// string is in the 1-encoding of x.
GtResponse gt_respond(const ElGamalParams& params, const mpz_class& pk, uint64_t y,
                      const GtInitMessage& init, DetRng& rng,
                      ModExpMeter* meter = nullptr);

// Responder side of GT(r, x) with x inside the table and r held locally:
// combines along r's 1-encoding strings with their last bit cleared, which
// match x's prefixes exactly when r > x. This is the direction the fusion
// center uses: it learns GT(r, tau) while only tau ever enters a table.
GtResponse gt_respond_exceeds(const ElGamalParams& params, const mpz_class& pk,
                              uint64_t r, const GtInitMessage& init, DetRng& rng,
                              ModExpMeter* meter = nullptr);

// True iff any response item decrypts to the identity.
bool gt_decide(const ElGamalParams& params, const ElGamalKeyPair& kp,
               const GtResponse& resp, ModExpMeter* meter = nullptr);

// Payload encodings (session id, dimensions, fixed-width elements).
Bytes gt_init_payload(const ElGamalParams& params, const GtInitMessage& msg);
GtInitMessage gt_init_from_payload(const ElGamalParams& params, const Bytes& b);
Bytes gt_resp_payload(const ElGamalParams& params, const GtResponse& resp);
GtResponse gt_resp_from_payload(const ElGamalParams& params, const Bytes& b);

// Initiator state: owns the keypair, the precomputed table for a fixed
// input, a session counter, and the set of sessions awaiting a response.
// Sessions are single-use; an unknown or already-finalized session id is
// rejected.
class GtInitiator {
  public:
    GtInitiator(ElGamalParams params, ElGamalKeyPair kp, uint64_t x, DetRng rng,
                ModExpMeter* meter = nullptr);

    GtInitMessage initiate();
    bool finalize(const GtResponse& resp);  // throws ProtocolError on bad session
    void abandon(uint64_t session);         // forget a session that timed out

    const ElGamalParams& params() const { return params_; }
    const mpz_class& pk() const { return kp_.pk; }

  private:
    ElGamalParams params_;
    ElGamalKeyPair kp_;
    GtInitMessage base_;
    DetRng rng_;
    ModExpMeter* meter_;
    uint64_t next_session_ = 1;
    std::set<uint64_t> live_;
};

// One-shot comparison with both inputs local: b = 1 iff tau >= r, computed
// as NOT GT(r, tau) over a fresh session.
int ym_compare_bit(const ElGamalParams& params, const ElGamalKeyPair& kp,
                   uint64_t tau, uint64_t r, DetRng& rng,
                   ModExpMeter* meter = nullptr);

}  // namespace lpos
