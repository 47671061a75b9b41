#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpos/channel.hpp"
#include "lpos/frames.hpp"
#include "lpos/gt.hpp"
#include "lpos/keytree.hpp"
#include "lpos/modp.hpp"
#include "lpos/ope.hpp"

namespace lpos {

enum class Decision : uint8_t { Free = 0, Busy = 1 };
enum class DecisionPath : uint8_t { None, MaxShortcut, MinShortcut, VoteCount };

const char* decision_name(Decision d);

// Voting threshold: the half-voting default computes ceil(n_active / 2);
// a fixed threshold is clamped into [1, n_active] so the count comparison
// stays meaningful as users drop out.
struct LambdaPolicy {
    bool auto_half = true;
    uint32_t fixed = 1;

    static LambdaPolicy half_voting() { return {true, 1}; }
    static LambdaPolicy fixed_threshold(uint32_t v) { return {false, v}; }
};

uint32_t compute_lambda(uint32_t n_active, const LambdaPolicy& policy);

struct SensingConfig {
    unsigned gamma = 16;       // RSS bit width
    uint64_t tau = 0;          // energy threshold, gamma bits
    OpeParams ope{40, 64};
    uint64_t padding = 0;      // public pad D, plain_bits - gamma - 1 bits
    LambdaPolicy lambda;
    uint64_t t_w = 1;          // sensing period in logical ticks
    bool refresh_pi_on_update = false;
    std::optional<ElGamalParams> pi;  // comparison group; the FC generates its keypair

    void validate() const;
    PaddingBits padding_bits() const;
};

// Brute-force reference: Busy iff |{i : r_i > tau}| >= lambda. The master
// correctness property is that the protocol engines agree with this on
// every round.
Decision oracle_decision(const std::vector<uint64_t>& rss, uint64_t tau,
                         uint32_t lambda);

constexpr uint32_t kFcId = 0;
constexpr uint32_t kBroadcastId = 0xffffffffu;

// One message leaving an engine: the plaintext frame (the sender's view)
// plus the bytes the bus actually carries (sealed for unicast, the bare
// frame for broadcasts).
struct Outgoing {
    uint32_t src = 0;
    uint32_t dst = 0;
    Frame frame;
    Bytes wire;
    bool sealed = false;
};

struct RoundOutcome {
    uint64_t round = 0;
    uint64_t epoch = 0;
    uint32_t n_active = 0;
    uint32_t lambda = 0;
    uint32_t distinct_values = 0;  // u for the decisive attempt
    Decision decision = Decision::Free;
    DecisionPath path = DecisionPath::None;
    uint32_t ym_invocations = 0;  // GT_INIT frames sent, all attempts
    bool decided = false;
    bool skipped = false;   // no reports: no-quorum, round skipped
    bool aborted = false;   // second comparison fault
    bool restarted = false;
    std::vector<uint32_t> dropped_mid_round;  // silent comparison responders
    std::string fault;
};

// Secondary-user engine: holds the member's key-tree view, derives the
// OPE key, builds the round report, and answers comparison probes against
// its current reading.
class SuEngine {
  public:
    SuEngine(uint32_t id, SensingConfig config, ElGamalParams eg, mpz_class fc_pk,
             ChannelState channel, DetRng rng, ModExpMeter* meter = nullptr);

    void set_group(const MemberView& view);
    void set_rss(uint64_t r);
    void set_fail_comparisons(bool fail) { fail_comparisons_ = fail; }
    void set_params(ElGamalParams eg, mpz_class fc_pk);  // pi refresh
    // Negative-control hook for the taint suite: ship the raw reading in
    // place of its encryption. Never set outside tests.
    void set_leak_rss(bool leak) { leak_rss_ = leak; }

    Outgoing start_round(uint64_t round);
    std::vector<Outgoing> handle_wire(const Bytes& wire);
    void handle_broadcast(const Frame& f);

    uint32_t id() const { return id_; }
    uint64_t epoch() const { return epoch_; }
    uint64_t rss() const { return rss_; }
    std::optional<Decision> last_decision() const { return last_decision_; }
    uint64_t ope_encryptions() const { return ope_encryptions_; }

    // Opened/received frames, for the taint suite's per-observer scan.
    const std::vector<Frame>& received() const { return received_; }
    void clear_received() { received_.clear(); }

  private:
    uint32_t id_;
    SensingConfig config_;
    ElGamalParams eg_;
    mpz_class fc_pk_;
    ChannelState channel_;
    DetRng rng_;
    ModExpMeter* meter_;
    bool has_group_ = false;
    uint64_t epoch_ = 0;
    OpeKey ope_key_;
    uint64_t rss_ = 0;
    bool fail_comparisons_ = false;
    bool leak_rss_ = false;
    std::optional<Decision> last_decision_;
    uint64_t ope_encryptions_ = 0;
    std::vector<Frame> received_;
};

// Fusion-center engine. Drives one sensing round at a time:
// collect sealed reports, sort/deduplicate the order-preserving
// ciphertexts, then decide with at most 2 + ceil(log2 u) comparison
// sessions: max shortcut, min shortcut, binary search for the boundary,
// vote count against lambda. A responder that goes silent mid-comparison
// is dropped and the round restarts once; a second fault aborts the round.
class FcEngine {
  public:
    FcEngine(SensingConfig config, DetRng rng, ModExpMeter* meter = nullptr);

    void add_channel(uint32_t su_id, ChannelState ch);
    void remove_channel(uint32_t su_id);
    void observe_epoch(uint64_t epoch);
    void refresh_pi();  // new keypair + table under fresh randomness

    const ElGamalParams& params() const { return eg_; }
    const mpz_class& pk() const { return kp_.pk; }
    uint64_t current_epoch() const { return epoch_; }

    void begin_round(uint64_t round);
    std::vector<Outgoing> handle_wire(uint32_t from, const Bytes& wire);
    void handle_broadcast(const Frame& f);
    // Called when the bus has drained; handles collection deadlines and
    // responder timeouts. May emit probes or the final decision.
    std::vector<Outgoing> on_idle();
    bool round_complete() const { return phase_ == Phase::Done; }
    const RoundOutcome& outcome() const { return outcome_; }

    const std::vector<Frame>& received() const { return received_; }
    void clear_received() { received_.clear(); }

  private:
    enum class Phase { Idle, Collecting, Comparing, Done };
    enum class Purpose { Max, Min, Search };

    struct DistinctValue {
        OpeCiphertext ct;
        uint32_t multiplicity = 0;
        uint32_t representative = 0;  // lowest holder id
    };

    struct Probe {
        uint64_t session = 0;
        uint32_t user = 0;
        size_t index = 0;
        Purpose purpose = Purpose::Max;
        bool outstanding = false;
    };

    void rebuild_distinct();
    Outgoing emit_probe(size_t index, Purpose purpose);
    std::vector<Outgoing> advance(int b);
    Outgoing emit_decision(Decision d, DecisionPath path);
    std::vector<Outgoing> handle_fault();

    SensingConfig config_;
    ElGamalParams eg_;
    ElGamalKeyPair kp_;
    DetRng rng_;
    ModExpMeter* meter_;
    std::optional<GtInitiator> initiator_;
    std::map<uint32_t, ChannelState> channels_;
    uint64_t epoch_ = 1;

    Phase phase_ = Phase::Idle;
    uint64_t round_ = 0;
    std::map<uint32_t, OpeCiphertext> reports_;
    std::vector<DistinctValue> distinct_;
    size_t lo_ = 0, hi_ = 0;
    Probe probe_;
    RoundOutcome outcome_;
    std::vector<Frame> received_;
};

}  // namespace lpos
