// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Tolerances and limits are pinned here, not configurable.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lpos/cost.hpp"
#include "lpos/errors.hpp"
#include "lpos/gt.hpp"
#include "lpos/keytree.hpp"
#include "lpos/ope.hpp"
#include "lpos/sim.hpp"

using namespace lpos;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// --- criterion 1: engine decision == plaintext oracle, exhaustively and at random ---

bool criterion_oracle_equivalence(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    const double limit_s = 60.0;
    size_t exhaustive = 0, random_rounds = 0;

    for (unsigned gamma = 1; gamma <= 3; gamma++) {
        uint64_t top = uint64_t(1) << gamma;
        for (uint32_t n = 1; n <= 4; n++) {
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
            for (uint64_t tau = 0; tau < top; tau++) {
                Scenario s;
                s.n = n;
                s.rounds = uint32_t(rows.size());
                s.seed = 1000 + gamma * 100 + n * 10 + tau;
                s.gamma = gamma;
                s.tau = tau;
                s.ope = OpeParams{2 * gamma + 1, 2 * gamma + 17};
                s.rss_model = RssModel::Explicit;
                s.explicit_rss = rows;
                Simulation sim(s);
                for (uint32_t r = 0; r < s.rounds; r++) {
                    RoundTranscript t = sim.run_round();
                    exhaustive++;
                    if (!t.outcome.decided || !t.oracle_valid ||
                        t.outcome.decision != t.oracle) {
                        detail = fmt("exhaustive mismatch at gamma=%u n=%u tau=%llu",
                                     gamma, n, (unsigned long long)tau);
                        return false;
                    }
                }
            }
        }
    }

    DetRng rng(424242, "acceptance-c1");
    while (random_rounds < 1000) {
        Scenario s;
        s.n = uint32_t(1 + rng.u64_below(64));
        s.rounds = 26;
        s.seed = rng.u64();
        s.gamma = 8;
        s.tau = rng.u64_below(256);
        s.ope = OpeParams{24, 48};
        for (const RoundTranscript& t : run_scenario(s)) {
            random_rounds++;
            if (!t.outcome.decided || t.outcome.decision != t.oracle) {
                detail = fmt("random mismatch at n=%u seed=%llu round=%llu", s.n,
                             (unsigned long long)s.seed,
                             (unsigned long long)t.outcome.round);
                return false;
            }
        }
    }

    double el = seconds_since(t0);
    detail = fmt("%zu exhaustive + %zu random rounds agree (%.1fs)", exhaustive,
                 random_rounds, el);
    if (el >= limit_s) {
        detail += " OVER TIME LIMIT";
        return false;
    }
    return true;
}

// --- criterion 2: comparison sessions bounded by 2 + ceil(log2 u) ---

bool criterion_invocation_bound(std::string& detail) {
    DetRng rng(515151, "acceptance-c2");
    uint32_t worst_seen = 0;
    for (int i = 0; i < 40; i++) {
        Scenario s;
        s.n = uint32_t(1 + rng.u64_below(64));
        s.rounds = 8;
        s.seed = rng.u64();
        s.gamma = 8;
        s.tau = rng.u64_below(256);
        s.ope = OpeParams{24, 48};
        for (const RoundTranscript& t : run_scenario(s)) {
            const RoundOutcome& o = t.outcome;
            if (!o.decided || o.restarted) continue;
            uint32_t u = o.distinct_values;
            uint32_t bound = 2 + (u > 1 ? ceil_log2(u) : 0);
            if (o.ym_invocations > bound) {
                detail = fmt("bound broken: %u sessions for u=%u", o.ym_invocations, u);
                return false;
            }
            worst_seen = std::max(worst_seen, o.ym_invocations);
        }
    }

    // Constructed worst case: 64 distinct readings, threshold at the median.
    Scenario worst;
    worst.n = 64;
    worst.rounds = 1;
    worst.seed = 7;
    worst.gamma = 8;
    worst.tau = 62;
    worst.ope = OpeParams{24, 48};
    worst.rss_model = RssModel::Explicit;
    worst.explicit_rss.emplace_back();
    for (uint64_t i = 0; i < 64; i++) worst.explicit_rss[0].push_back(2 * i);
    RoundTranscript wt = run_scenario(worst)[0];
    if (!wt.outcome.decided || wt.outcome.decision != wt.oracle) {
        detail = "worst case failed to decide correctly";
        return false;
    }
    if (wt.outcome.ym_invocations < 7 || wt.outcome.ym_invocations > 8) {
        detail = fmt("worst case used %u sessions, expected 7..8",
                     wt.outcome.ym_invocations);
        return false;
    }

    // Max shortcut: threshold above everything, single session.
    Scenario shortcut = worst;
    shortcut.tau = 255;
    RoundTranscript st = run_scenario(shortcut)[0];
    if (st.outcome.ym_invocations != 1 || st.outcome.decision != Decision::Free) {
        detail = fmt("max shortcut used %u sessions", st.outcome.ym_invocations);
        return false;
    }

    detail = fmt("bound holds on 320 random rounds (max seen %u); worst case %u, "
                 "shortcut 1",
                 worst_seen, wt.outcome.ym_invocations);
    return true;
}

// --- criterion 3: secure comparison equals arithmetic for every pair, l <= 6 ---

bool criterion_gt_exhaustive(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    const double limit_s = 300.0;
    size_t pairs = 0;
    for (unsigned l = 1; l <= 6; l++) {
        ElGamalParams params = profile_group(false, l);
        DetRng rng(616161 + l, "acceptance-c3");
        ElGamalKeyPair kp = elgamal_keygen(params, rng);
        uint64_t top = uint64_t(1) << l;
        for (uint64_t tau = 0; tau < top; tau++)
            for (uint64_t r = 0; r < top; r++) {
                pairs++;
                if (ym_compare_bit(params, kp, tau, r, rng) != (tau >= r ? 1 : 0)) {
                    detail = fmt("mismatch at l=%u tau=%llu r=%llu", l,
                                 (unsigned long long)tau, (unsigned long long)r);
                    return false;
                }
            }
    }
    double el = seconds_since(t0);
    detail = fmt("%zu comparison pairs exact (%.1fs)", pairs, el);
    if (el >= limit_s) {
        detail += " OVER TIME LIMIT";
        return false;
    }
    return true;
}

// --- criterion 4: order-preserving encryption is a strict monotone injection ---

bool criterion_ope_order(std::string& detail) {
    size_t checked = 0;
    for (unsigned d = 1; d <= 10; d++) {
        OpeParams params{d, d + 8};
        for (uint64_t k = 0; k < 10; k++) {
            OpeKey key;
            DetRng rng(717171 + d * 16 + k, "acceptance-c4");
            rng.fill(key.bytes.data(), key.bytes.size());
            uint64_t prev = 0;
            for (uint64_t m = 0; m < (uint64_t(1) << d); m++) {
                OpeCiphertext ct = ope_encrypt(key, m, params);
                if (m > 0 && ct.value <= prev) {
                    detail = fmt("monotonicity broken at d=%u m=%llu", d,
                                 (unsigned long long)m);
                    return false;
                }
                prev = ct.value;
                if (ope_decrypt(key, ct, params) != m) {
                    detail = fmt("round-trip broken at d=%u m=%llu", d,
                                 (unsigned long long)m);
                    return false;
                }
                checked++;
            }
        }
    }
    detail = fmt("%zu (key, plaintext) pairs strictly ordered and invertible",
                 checked);
    return true;
}

// --- criterion 5: rekeying agreement, exclusion of leavers, no key history for joiners ---

bool criterion_rekey(std::string& detail) {
    DetRng rng(818181, "acceptance-c5");
    size_t sequences = 0, checks = 0;
    for (int seq = 0; seq < 100; seq++) {
        uint32_t n0 = uint32_t(2 + rng.u64_below(63));  // n <= 64
        std::vector<uint32_t> ids;
        for (uint32_t i = 1; i <= n0; i++) ids.push_back(i);
        KeyTree tree(ids, DetRng(rng.u64(), "acceptance-c5-tree"));
        uint32_t next_id = n0 + 1;
        std::map<uint64_t, Bytes> history;
        history[tree.epoch()] = tree.group_key();

        for (int batch = 0; batch < 4; batch++) {
            std::vector<uint32_t> members = tree.members();
            size_t max_leave = members.size() - 1;
            size_t n_join = rng.u64_below(5);
            size_t n_leave = std::min<size_t>(rng.u64_below(5), max_leave);
            if (n_join + n_leave == 0) n_join = 1;
            if (n_join + n_leave > 8) n_leave = 8 - n_join;

            std::vector<uint32_t> joins, leaves;
            for (size_t i = 0; i < n_join; i++) joins.push_back(next_id++);
            rng.shuffle(members);
            for (size_t i = 0; i < n_leave; i++) leaves.push_back(members[i]);

            std::map<uint32_t, MemberView> stale;
            for (uint32_t id : leaves) stale[id] = tree.view(id);
            uint64_t old_epoch = tree.epoch();

            tree.update(joins, leaves);
            Bytes key = tree.group_key();
            if (history.count(tree.epoch())) {
                detail = "epoch reused across batches";
                return false;
            }
            history[tree.epoch()] = key;

            for (uint32_t id : tree.members()) {
                checks++;
                if (derive_group_key(tree.view(id)) != key) {
                    detail = fmt("member %u disagrees after batch", id);
                    return false;
                }
            }
            for (auto& [id, view] : stale) {
                checks++;
                if (derive_group_key(view, tree.epoch()) == key) {
                    detail = fmt("leaver %u can still derive the group key", id);
                    return false;
                }
            }
            for (uint32_t id : joins) {
                MemberView v = tree.view(id);
                for (uint64_t e = 1; e <= old_epoch; e++) {
                    checks++;
                    if (history.count(e) && derive_group_key(v, e) == history[e]) {
                        detail = fmt("joiner %u derived the epoch-%llu key", id,
                                     (unsigned long long)e);
                        return false;
                    }
                }
            }
        }
        sequences++;
    }
    detail = fmt("%zu membership sequences, %zu agreement/exclusion checks",
                 sequences, checks);
    return true;
}

// --- criterion 6: dropouts only move the voting threshold ---

bool criterion_fault_tolerance(std::string& detail) {
    size_t rounds = 0;
    for (uint32_t k = 1; k <= 15; k++) {
        Scenario s;
        s.n = 16;
        s.rounds = 4;
        s.seed = 900 + k;
        s.gamma = 8;
        s.tau = 120;
        s.ope = OpeParams{24, 48};
        s.events.push_back({1, k, 0, 0, 0});
        uint32_t survivors = 16 - k;
        uint32_t expect_lambda = (survivors + 1) / 2;
        for (const RoundTranscript& t : run_scenario(s)) {
            rounds++;
            if (t.outcome.n_active != survivors ||
                t.outcome.lambda != expect_lambda) {
                detail = fmt("k=%u: n_active=%u lambda=%u, expected %u/%u", k,
                             t.outcome.n_active, t.outcome.lambda, survivors,
                             expect_lambda);
                return false;
            }
            if (!t.outcome.decided || t.outcome.decision != t.oracle) {
                detail = fmt("k=%u: decision disagrees with survivor oracle", k);
                return false;
            }
        }
    }
    detail = fmt("all dropout counts k=1..15 decide with lambda=ceil((16-k)/2), "
                 "%zu rounds",
                 rounds);
    return true;
}

// --- criterion 7: sentinel taint suite at the nist profile, plus negative control ---

bool criterion_taint(std::string& detail) {
    Scenario s;
    s.n = 8;
    s.rounds = 34;  // 3 runs x 34 = 102 honest rounds scanned
    s.seed = 2025;
    s.gamma = 16;
    s.tau = 30000;
    s.nist_profile = true;

    TaintReport honest = sentinel_taint_suite(s, 2);
    if (!honest.pass) {
        detail = "honest run flagged: " + honest.leaks.front();
        return false;
    }
    if (honest.rounds_checked < 100) {
        detail = fmt("only %zu rounds checked", honest.rounds_checked);
        return false;
    }

    Scenario broken = s;
    broken.debug_leak_rss = true;
    broken.rounds = 10;
    TaintReport control = sentinel_taint_suite(broken, 2);
    if (control.pass) {
        detail = "negative control not flagged";
        return false;
    }
    detail = fmt("%zu honest rounds clean; planted leak flagged (%zu findings)",
                 honest.rounds_checked, control.leaks.size());
    return true;
}

// --- criterion 8: cost-model table values and the crossover ---

bool criterion_cost_table(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    struct Expect {
        Scheme s;
        uint64_t bits;
    } expected[] = {
        {Scheme::Lpos, 525888},
        {Scheme::Eceg, 655360},
        {Scheme::Ppss, 1048576},
        {Scheme::Pdaft, 2099200},
    };
    for (const auto& e : expected) {
        uint64_t got = comm_cost(e.s, 1024);
        if (got != e.bits) {
            detail = fmt("%s(1024) = %llu, expected %llu", scheme_name(e.s),
                         (unsigned long long)got, (unsigned long long)e.bits);
            return false;
        }
    }
    uint64_t crossover = 0;
    for (uint64_t n = 2; n <= 2048; n++)
        if (comm_cost(Scheme::Lpos, n) < comm_cost(Scheme::Eceg, n)) {
            crossover = n;
            break;
        }
    if (crossover == 0) {
        detail = "no crossover against eceg by n=2048";
        return false;
    }
    for (uint64_t n = 2; n < crossover; n++)
        if (comm_cost(Scheme::Eceg, n) >= comm_cost(Scheme::Lpos, n)) {
            detail = fmt("eceg not cheaper below the crossover at n=%llu",
                         (unsigned long long)n);
            return false;
        }
    double el = seconds_since(t0);
    detail = fmt("table values exact; eceg/lpos crossover at n*=%llu (%.3fs)",
                 (unsigned long long)crossover, el);
    if (el >= 1.0) {
        detail += " OVER TIME LIMIT";
        return false;
    }
    return true;
}

// --- criterion 9: measured comparison traffic within the analytical bound ---

bool criterion_measured_vs_model(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    const double limit_s = 600.0;
    std::ostringstream seen;
    for (uint32_t n : {8u, 32u, 128u}) {
        Scenario s;
        s.n = n;
        s.rounds = 5;
        s.seed = 3000 + n;
        s.gamma = 16;
        s.tau = 30000;
        s.nist_profile = true;
        uint64_t bound_bits = 2ull * 16 * 1024 * (2 + ceil_log2(n));
        uint64_t max_bytes = 0;
        for (const RoundTranscript& t : run_scenario(s)) {
            max_bytes = std::max(max_bytes, t.metrics.comparison_bytes);
            if (t.metrics.comparison_bytes > bound_bits) {
                detail = fmt("n=%u: %llu comparison bytes exceed the %llu-bit model",
                             n, (unsigned long long)t.metrics.comparison_bytes,
                             (unsigned long long)bound_bits);
                return false;
            }
            if (!t.outcome.decided || t.outcome.decision != t.oracle) {
                detail = fmt("n=%u: round failed to decide correctly", n);
                return false;
            }
        }
        seen << " n=" << n << ":" << max_bytes << "B<=" << bound_bits << "b";
    }
    double el = seconds_since(t0);
    detail = fmt("per-round comparison traffic under the model:%s (%.1fs)",
                 seen.str().c_str(), el);
    if (el >= limit_s) {
        detail += " OVER TIME LIMIT";
        return false;
    }
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<bool(std::string&)> fn;
    };
    std::vector<Criterion> criteria = {
        {1, "oracle equivalence", criterion_oracle_equivalence},
        {2, "invocation bound", criterion_invocation_bound},
        {3, "comparison exhaustive", criterion_gt_exhaustive},
        {4, "ope order preservation", criterion_ope_order},
        {5, "rekey freshness/exclusion", criterion_rekey},
        {6, "fault tolerance", criterion_fault_tolerance},
        {7, "taint structure", criterion_taint},
        {8, "cost table/crossover", criterion_cost_table},
        {9, "measured vs model", criterion_measured_vs_model},
    };

    int failures = 0;
    for (auto& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d (%s): %s — %s\n", c.id, c.name,
                    ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        if (!ok) failures++;
    }
    if (failures)
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    else
        std::printf("all %zu criteria passed\n", criteria.size());
    return failures == 0 ? 0 : 1;
}
