#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lpos/protocol.hpp"

namespace lpos {

enum class RssModel : uint8_t { Uniform, NormalDbm, Explicit };

// One scripted membership/fault event, applied at the boundary before the
// given round. Drops persist (the users stop reporting but stay group
// members); fails last for that single round (the users report but ignore
// comparison probes); joins and leaves change the group and bump the epoch
// once per event.
struct ScenarioEvent {
    uint32_t round = 1;
    uint32_t drop = 0;
    uint32_t join = 0;
    uint32_t leave = 0;
    uint32_t fail = 0;
};

struct Scenario {
    uint32_t n = 8;
    uint32_t rounds = 10;
    uint64_t seed = 1;
    unsigned gamma = 16;
    uint64_t tau = 0;
    LambdaPolicy lambda;
    OpeParams ope{40, 64};
    bool nist_profile = false;  // comparison group size: 1024/160 vs 64/32
    bool refresh_pi_on_update = false;
    ChannelMode channel_mode = ChannelMode::Secure;
    bool parallel_bus = false;
    bool debug_leak_rss = false;  // negative control for the taint suite

    RssModel rss_model = RssModel::Uniform;
    double rss_mean_dbm = -85.0;
    double rss_sd_dbm = 10.0;
    // One row per round, each sized to that round's reporter count.
    std::vector<std::vector<uint64_t>> explicit_rss;

    std::vector<ScenarioEvent> events;

    void validate() const;
};

// Line-oriented "key = value" scenario text (see README for the grammar).
Scenario scenario_from_text(const std::string& text);
Scenario scenario_from_file(const std::string& path);

// dBm reading to gamma-bit integer: clamp(round((dbm - floor) / step)),
// floor -120 dBm, step 0.01 dB.
uint64_t quantize_dbm(double dbm, unsigned gamma);

struct MessageRecord {
    uint32_t src = 0;
    uint32_t dst = 0;  // kBroadcastId for broadcasts
    FrameType type = FrameType::Report;
    bool sealed = false;
    Bytes wire;
};

struct CostMetrics {
    uint32_t ym_invocations = 0;
    uint64_t bytes_su_to_fc = 0;
    uint64_t bytes_fc_to_su = 0;
    uint64_t comparison_bytes = 0;  // GT_INIT + GT_RESP wire bytes
    uint64_t ope_encryptions = 0;
    uint64_t modexp_count = 0;
    uint64_t rekey_messages = 0;
};

// Everything one round produced, partitioned by observer. The harness is
// omniscient: it also keeps the plaintext readings for oracle checks.
struct RoundTranscript {
    RoundOutcome outcome;
    uint64_t epoch = 0;
    std::vector<uint32_t> active_users;  // reporters, ascending id
    std::vector<uint64_t> rss;           // aligned with active_users
    std::vector<uint32_t> survivors;     // active minus mid-round drops
    Decision oracle = Decision::Free;    // oracle_decision on survivors
    bool oracle_valid = false;
    std::vector<MessageRecord> messages;            // attacker view
    std::vector<Frame> fc_view;                     // frames opened at the FC
    std::map<uint32_t, std::vector<Frame>> su_views;
    std::map<uint32_t, Bytes> report_payloads;      // plaintext report payloads
    CostMetrics metrics;
};

class Simulation {
  public:
    explicit Simulation(Scenario s);

    RoundTranscript run_round();
    std::vector<RoundTranscript> run_all();

    uint64_t next_round() const { return round_; }
    const Scenario& scenario() const { return s_; }
    const SensingConfig& config() const { return config_; }
    const KeyTree& tree() const { return *tree_; }
    FcEngine& fc() { return *fc_; }
    SuEngine& su(uint32_t id) { return su_.at(id); }
    std::vector<uint32_t> active_users() const;
    std::vector<uint32_t> members() const;

  private:
    void setup();
    void apply_events(RoundTranscript& t);
    void add_member_engine(uint32_t id);
    std::vector<uint64_t> round_rss(size_t count);
    void pump(std::vector<Outgoing> queue, RoundTranscript& t);
    void record(const Outgoing& out, RoundTranscript& t);

    Scenario s_;
    SensingConfig config_;
    DetRng rng_;
    DetRng rss_rng_;
    IdentityRegistry registry_;
    std::optional<KeyTree> tree_;
    std::optional<FcEngine> fc_;
    ModExpMeter fc_meter_;
    std::map<uint32_t, SuEngine> su_;
    std::map<uint32_t, ModExpMeter> su_meters_;
    std::set<uint32_t> dropped_;
    std::vector<uint32_t> failers_;  // scripted silent responders, this round only
    uint32_t max_id_ = 0;
    uint64_t round_ = 1;
};

// Runs the whole scenario fresh (convenience wrapper).
std::vector<RoundTranscript> run_scenario(const Scenario& s);

// The comparison group for a profile, generated once per process from a
// fixed seed: the parameter set is public deployment material, so sharing
// it across simulations only saves prime-generation time.
const ElGamalParams& profile_group(bool nist, unsigned l);

// --- taint checking ---

struct TaintHit {
    int clause = 0;  // 1 = r_i in fc/attacker view, 2 = tau at an SU,
                     // 3 = foreign report at an SU
    std::string view;  // "fc", "attacker", "su"
    FrameType type = FrameType::Report;
    uint32_t owner = 0;   // whose secret matched (user id; kFcId for tau)
    uint32_t viewer = 0;  // su id for clauses 2-3
    size_t offset = 0;

    std::string location_key() const;   // with offset
    std::string classwide_key() const;  // without offset or owner
};

// Byte-scan of one transcript against the secrets the harness knows.
std::vector<TaintHit> taint_scan(const RoundTranscript& t, const SensingConfig& cfg);

struct TaintReport {
    bool pass = false;
    size_t rounds_checked = 0;
    std::vector<std::string> leaks;
};

// Sentinel-mode suite: runs the scenario 1 + reruns times with fresh
// high-entropy readings and threshold, then flags only hits that persist
// across every run (same structural location in the same round, or present
// in every round of every run). Chance byte collisions do not persist;
// genuine leaks do. Refuses null channels.
TaintReport sentinel_taint_suite(const Scenario& base, int reruns = 2);

// --- CSV export ---

std::string metrics_csv(const std::vector<RoundTranscript>& rounds);
void write_metrics_csv(const std::string& path,
                       const std::vector<RoundTranscript>& rounds);

}  // namespace lpos
