#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <optional>

#include "lpos/errors.hpp"
#include "lpos/protocol.hpp"
#include "lpos/sim.hpp"  // profile_group

using namespace lpos;

namespace {

// Bare-metal harness around the two engine types: no scenario machinery,
// just channels, a key tree, and a serial message pump.
struct Rig {
    SensingConfig config;
    IdentityRegistry reg;
    KeyTree tree;
    std::optional<FcEngine> fc;
    std::map<uint32_t, SuEngine> sus;
    uint64_t round = 1;

    Rig(const std::vector<uint64_t>& rss, uint64_t tau, unsigned gamma = 4,
        LambdaPolicy lambda = LambdaPolicy::half_voting())
        : tree(ids_for(rss.size()), DetRng(500, "rig-tree")) {
        config.gamma = gamma;
        config.tau = tau;
        config.lambda = lambda;
        config.padding = 0b1010;
        config.pi = profile_group(false, gamma);

        DetRng rng(600, "rig");
        reg.add(make_identity(kFcId, rng));
        fc.emplace(config, rng.fork("fc"));
        for (uint32_t id = 1; id <= rss.size(); id++) {
            reg.add(make_identity(id, rng));
            auto [fc_end, su_end] = channel_establish(reg, kFcId, id);
            fc->add_channel(id, std::move(fc_end));
            SuEngine eng(id, config, fc->params(), fc->pk(), std::move(su_end),
                         rng.fork("su" + std::to_string(id)));
            eng.set_group(tree.view(id));
            eng.set_rss(rss[id - 1]);
            sus.emplace(id, std::move(eng));
        }
    }

    static std::vector<uint32_t> ids_for(size_t n) {
        std::vector<uint32_t> ids;
        for (uint32_t i = 1; i <= n; i++) ids.push_back(i);
        return ids;
    }

    RoundOutcome run_round(const std::vector<uint32_t>& reporters = {}) {
        std::vector<uint32_t> who = reporters;
        if (who.empty())
            for (auto& [id, eng] : sus) who.push_back(id);
        fc->begin_round(round);
        std::vector<Outgoing> queue;
        for (uint32_t id : who) queue.push_back(sus.at(id).start_round(round));
        pump(std::move(queue));
        round++;
        return fc->outcome();
    }

    void pump(std::vector<Outgoing> queue) {
        while (true) {
            if (queue.empty()) {
                if (fc->round_complete()) return;
                queue = fc->on_idle();
                if (queue.empty()) {
                    REQUIRE(fc->round_complete());
                    return;
                }
                continue;
            }
            std::vector<Outgoing> next;
            for (const Outgoing& out : queue) {
                if (out.dst == kBroadcastId) {
                    Frame f = frame_from_bytes(out.wire);
                    for (auto& [id, eng] : sus) eng.handle_broadcast(f);
                } else if (out.dst == kFcId) {
                    auto r = fc->handle_wire(out.src, out.wire);
                    next.insert(next.end(), r.begin(), r.end());
                } else {
                    auto r = sus.at(out.dst).handle_wire(out.wire);
                    next.insert(next.end(), r.begin(), r.end());
                }
            }
            queue = std::move(next);
        }
    }

    size_t gt_inits_seen(uint32_t id) {
        size_t n = 0;
        for (const Frame& f : sus.at(id).received())
            if (f.type == FrameType::GtInit) n++;
        return n;
    }
};

}  // namespace

TEST_CASE("voting threshold follows the half-voting rule") {
    CHECK(compute_lambda(5, LambdaPolicy::half_voting()) == 3);
    CHECK(compute_lambda(8, LambdaPolicy::half_voting()) == 4);
    CHECK(compute_lambda(1, LambdaPolicy::half_voting()) == 1);
    CHECK(compute_lambda(9, LambdaPolicy::half_voting()) == 5);
    CHECK_THROWS_AS(compute_lambda(0, LambdaPolicy::half_voting()), NoQuorumError);

    CHECK(compute_lambda(10, LambdaPolicy::fixed_threshold(4)) == 4);
    CHECK(compute_lambda(3, LambdaPolicy::fixed_threshold(7)) == 3);  // clamped
    CHECK(compute_lambda(9, LambdaPolicy::fixed_threshold(0)) == 1);
}

TEST_CASE("plaintext oracle counts strict exceedances") {
    CHECK(oracle_decision({1, 2, 3, 4, 5}, 3, 3) == Decision::Free);
    CHECK(oracle_decision({1, 2, 3, 4, 5}, 2, 3) == Decision::Busy);
    CHECK(oracle_decision({7}, 6, 1) == Decision::Busy);
    CHECK(oracle_decision({6}, 6, 1) == Decision::Free);  // ties do not count
    CHECK_THROWS_AS(oracle_decision({}, 1, 1), std::invalid_argument);
}

TEST_CASE("max shortcut decides free in one comparison") {
    Rig rig({1, 2}, 9);
    RoundOutcome o = rig.run_round();
    CHECK(o.decided);
    CHECK(o.decision == Decision::Free);
    CHECK(o.path == DecisionPath::MaxShortcut);
    CHECK(o.ym_invocations == 1);
    CHECK(o.n_active == 2);
    CHECK(rig.sus.at(1).last_decision() == Decision::Free);
    CHECK(rig.sus.at(2).last_decision() == Decision::Free);
}

TEST_CASE("min shortcut decides busy in two comparisons") {
    Rig rig({6, 7, 8}, 5);
    RoundOutcome o = rig.run_round();
    CHECK(o.decision == Decision::Busy);
    CHECK(o.path == DecisionPath::MinShortcut);
    CHECK(o.ym_invocations == 2);
}

TEST_CASE("boundary search with vote count matches the oracle") {
    Rig rig({1, 2, 3, 4, 5}, 3);
    RoundOutcome o = rig.run_round();
    CHECK(o.decision == Decision::Free);  // two exceed, lambda is three
    CHECK(o.path == DecisionPath::VoteCount);
    CHECK(o.lambda == 3);
    CHECK(o.distinct_values == 5);
    CHECK(o.ym_invocations <= 5);  // 2 + ceil(log2 5)
}

TEST_CASE("eight distinct values stay within the session bound") {
    Rig rig({10, 20, 30, 40, 50, 60, 70, 80}, 45, 8,
            LambdaPolicy::fixed_threshold(4));
    RoundOutcome o = rig.run_round();
    CHECK(o.decision == Decision::Busy);  // 50..80 exceed, exactly four
    CHECK(o.path == DecisionPath::VoteCount);
    CHECK(o.ym_invocations <= 5);  // 2 + ceil(log2 8)
}

TEST_CASE("identical readings collapse to one distinct value") {
    Rig rig({5, 5, 5}, 3);
    RoundOutcome o = rig.run_round();
    CHECK(o.distinct_values == 1);
    CHECK(o.decision == Decision::Busy);
    CHECK(o.path == DecisionPath::MinShortcut);
    CHECK(o.ym_invocations == 2);

    Rig rig2({5, 5, 5}, 7);
    RoundOutcome o2 = rig2.run_round();
    CHECK(o2.distinct_values == 1);
    CHECK(o2.decision == Decision::Free);
    CHECK(o2.ym_invocations == 1);
}

TEST_CASE("duplicates keep their multiplicity in the vote") {
    // Readings 1,1,1,2 with tau=1: only the 2 exceeds, lambda=2 -> free.
    Rig rig({1, 1, 1, 2}, 1);
    RoundOutcome o = rig.run_round();
    CHECK(o.n_active == 4);
    CHECK(o.distinct_values == 2);
    CHECK(o.decision == Decision::Free);
    // Max probe goes to the sole holder of 2; min probe to the lowest id
    // among the tied holders of 1.
    CHECK(rig.gt_inits_seen(4) == 1);
    CHECK(rig.gt_inits_seen(1) == 1);
    CHECK(rig.gt_inits_seen(2) == 0);
    CHECK(rig.gt_inits_seen(3) == 0);

    // Same multiset against tau=0: all four exceed -> busy.
    Rig rig2({1, 1, 1, 2}, 0);
    CHECK(rig2.run_round().decision == Decision::Busy);
}

TEST_CASE("reports from a stale epoch are rejected") {
    Rig rig({3, 9}, 5);
    rig.tree.join({50});  // group moves on; engines keep their old views
    rig.fc->observe_epoch(rig.tree.epoch());
    RoundOutcome o = rig.run_round();
    CHECK(o.skipped);
    CHECK_FALSE(o.decided);
    CHECK(o.fault.find("epoch-mismatch") != std::string::npos);

    // Once the members catch up, rounds decide again.
    for (auto& [id, eng] : rig.sus) eng.set_group(rig.tree.view(id));
    RoundOutcome o2 = rig.run_round();
    CHECK(o2.decided);
    CHECK(o2.decision == Decision::Busy);
}

TEST_CASE("a silent responder is dropped and the round restarts once") {
    Rig rig({1, 2, 9}, 5);
    rig.sus.at(3).set_fail_comparisons(true);  // holder of the maximum
    RoundOutcome o = rig.run_round();
    CHECK(o.restarted);
    CHECK(o.decided);
    REQUIRE(o.dropped_mid_round.size() == 1);
    CHECK(o.dropped_mid_round[0] == 3);
    // Survivors 1,2 against tau=5: nothing exceeds -> free.
    CHECK(o.decision == Decision::Free);
    CHECK(o.n_active == 2);
}

TEST_CASE("a second silent responder aborts the round") {
    Rig rig({1, 2, 8, 9}, 5);
    rig.sus.at(3).set_fail_comparisons(true);
    rig.sus.at(4).set_fail_comparisons(true);
    RoundOutcome o = rig.run_round();
    CHECK(o.aborted);
    CHECK_FALSE(o.decided);
    CHECK(o.dropped_mid_round.size() == 2);

    // The rig recovers next round once the responders behave.
    rig.sus.at(3).set_fail_comparisons(false);
    rig.sus.at(4).set_fail_comparisons(false);
    RoundOutcome o2 = rig.run_round();
    CHECK(o2.decided);
    CHECK(o2.decision == Decision::Busy);  // 8 and 9 exceed, lambda=2
}

TEST_CASE("no reports means no quorum") {
    Rig rig({4, 4}, 2);
    rig.fc->begin_round(1);
    rig.pump({});
    RoundOutcome o = rig.fc->outcome();
    CHECK(o.skipped);
    CHECK_FALSE(o.decided);
}

TEST_CASE("engines validate their configuration") {
    SensingConfig bad;
    bad.gamma = 4;
    bad.tau = 16;  // wider than gamma
    bad.pi = profile_group(false, 4);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    SensingConfig no_pi;
    no_pi.gamma = 4;
    no_pi.tau = 3;
    CHECK_THROWS_AS(FcEngine(no_pi, DetRng(1, "x")), std::invalid_argument);

    SensingConfig wide;
    wide.gamma = 20;  // needs plain_bits >= 41
    wide.tau = 1;
    CHECK_THROWS_AS(wide.validate(), std::invalid_argument);
}

TEST_CASE("reporting requires an established group key") {
    SensingConfig config;
    config.gamma = 4;
    config.tau = 3;
    config.pi = profile_group(false, 4);
    IdentityRegistry reg;
    DetRng rng(700, "nogroup");
    reg.add(make_identity(kFcId, rng));
    reg.add(make_identity(1, rng));
    auto [fc_end, su_end] = channel_establish(reg, kFcId, 1);
    FcEngine fc(config, rng.fork("fc"));
    SuEngine su(1, config, fc.params(), fc.pk(), std::move(su_end),
                rng.fork("su"));
    CHECK_THROWS_AS(su.start_round(1), ProtocolError);
    CHECK_THROWS_AS(su.set_rss(16), std::invalid_argument);
}
