#include "lpos/selftest.hpp"

#include <cstdio>

#include "lpos/cost.hpp"
#include "lpos/sim.hpp"

namespace lpos {

namespace {

struct SuiteResult {
    bool ok = true;
    size_t rounds = 0;
    std::string detail;

    void fail(std::string msg) {
        ok = false;
        if (detail.empty()) detail = std::move(msg);
    }
};

// Decided, fault-free rounds must match the plaintext oracle and stay within
// the session bound; shortcut paths have exact counts.
void check_round(const RoundTranscript& t, SuiteResult& res) {
    res.rounds++;
    const RoundOutcome& o = t.outcome;
    if (o.skipped || o.aborted) return;
    if (!o.decided) {
        res.fail("round neither decided nor skipped");
        return;
    }
    if (!t.oracle_valid) {
        res.fail("oracle missing for a decided round");
        return;
    }
    if (o.decision != t.oracle) {
        res.fail("round " + std::to_string(o.round) + ": engine says " +
                 decision_name(o.decision) + ", oracle says " +
                 decision_name(t.oracle));
        return;
    }
    if (o.restarted) return;  // the bound applies to fault-free rounds
    uint32_t bound = 2 + (o.distinct_values > 1 ? ceil_log2(o.distinct_values) : 0);
    if (o.ym_invocations > bound)
        res.fail("round " + std::to_string(o.round) + ": " +
                 std::to_string(o.ym_invocations) + " sessions for u=" +
                 std::to_string(o.distinct_values));
    if (o.path == DecisionPath::MaxShortcut && o.ym_invocations != 1)
        res.fail("max shortcut took more than one session");
    if (o.path == DecisionPath::MinShortcut && o.ym_invocations != 2)
        res.fail("min shortcut took other than two sessions");
    size_t inits = 0;
    for (const MessageRecord& m : t.messages)
        if (m.type == FrameType::GtInit) inits++;
    if (inits != o.ym_invocations)
        res.fail("session count disagrees with the message log");
}

SuiteResult exhaustive_suite(bool nist) {
    SuiteResult res;
    const unsigned gamma = 2;
    const uint64_t top = uint64_t(1) << gamma;
    for (uint32_t n = 1; n <= 3 && res.ok; n++) {
        // Every reading vector, one round each, against every threshold.
        std::vector<std::vector<uint64_t>> rows;
        uint64_t total = 1;
        for (uint32_t i = 0; i < n; i++) total *= top;
        for (uint64_t v = 0; v < total; v++) {
            std::vector<uint64_t> row;
            uint64_t x = v;
            for (uint32_t i = 0; i < n; i++) {
                row.push_back(x % top);
                x /= top;
            }
            rows.push_back(std::move(row));
        }
        for (uint64_t tau = 0; tau < top && res.ok; tau++) {
            Scenario s;
            s.n = n;
            s.rounds = uint32_t(rows.size());
            s.seed = 77 + tau;
            s.gamma = gamma;
            s.tau = tau;
            s.nist_profile = nist;
            s.rss_model = RssModel::Explicit;
            s.explicit_rss = rows;
            Simulation sim(s);
            for (uint32_t r = 0; r < s.rounds && res.ok; r++)
                check_round(sim.run_round(), res);
        }
    }
    return res;
}

SuiteResult random_suite(bool nist) {
    SuiteResult res;
    DetRng rng(20250814, "selftest");
    const int scenarios = nist ? 6 : 40;
    for (int i = 0; i < scenarios && res.ok; i++) {
        Scenario s;
        s.n = uint32_t(1 + rng.u64_below(16));
        s.rounds = 5;
        s.seed = rng.u64();
        s.gamma = 8;
        s.tau = rng.u64_below(uint64_t(1) << s.gamma);
        s.nist_profile = nist;
        for (const RoundTranscript& t : run_scenario(s)) check_round(t, res);
    }
    return res;
}

Scenario taint_scenario(bool nist) {
    Scenario s;
    s.n = 6;
    s.rounds = 8;
    s.seed = 4242;
    s.gamma = 16;
    s.tau = 30000;
    s.nist_profile = nist;
    return s;
}

}  // namespace

bool run_selftests(bool nist_profile) {
    bool all_ok = true;
    auto report = [&](const char* name, const SuiteResult& r) {
        if (r.ok)
            std::printf("selftest: %-28s pass (%zu rounds)\n", name, r.rounds);
        else
            std::printf("selftest: %-28s FAIL: %s\n", name, r.detail.c_str());
        all_ok = all_ok && r.ok;
    };

    report("oracle-equivalence/exhaustive", exhaustive_suite(nist_profile));
    report("oracle-equivalence/random", random_suite(nist_profile));

    TaintReport honest = sentinel_taint_suite(taint_scenario(nist_profile), 2);
    if (honest.pass) {
        std::printf("selftest: %-28s pass (%zu rounds)\n", "taint/honest",
                    honest.rounds_checked);
    } else {
        std::printf("selftest: %-28s FAIL: %s\n", "taint/honest",
                    honest.leaks.front().c_str());
        all_ok = false;
    }

    Scenario leaky = taint_scenario(nist_profile);
    leaky.debug_leak_rss = true;
    TaintReport control = sentinel_taint_suite(leaky, 2);
    if (!control.pass) {
        std::printf("selftest: %-28s pass (leak detected: %s)\n",
                    "taint/negative-control", control.leaks.front().c_str());
    } else {
        std::printf("selftest: %-28s FAIL: planted leak not flagged\n",
                    "taint/negative-control");
        all_ok = false;
    }

    std::printf("selftest: %s\n", all_ok ? "all suites passed" : "FAILURES above");
    return all_ok;
}

}  // namespace lpos
