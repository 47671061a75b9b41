#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lpos/cost.hpp"
#include "lpos/selftest.hpp"
#include "lpos/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

lpos::ScenarioEvent parse_event(const std::string& arg, const char* op) {
    size_t colon = arg.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError(std::string("--") + op, "expected ROUND:COUNT");
    lpos::ScenarioEvent e;
    try {
        e.round = uint32_t(std::stoul(arg.substr(0, colon)));
        uint32_t count = uint32_t(std::stoul(arg.substr(colon + 1)));
        std::string name(op);
        if (name == "drop") e.drop = count;
        if (name == "join") e.join = count;
        if (name == "leave") e.leave = count;
        if (name == "fail") e.fail = count;
    } catch (const std::exception&) {
        throw CLI::ValidationError(std::string("--") + op, "expected ROUND:COUNT");
    }
    return e;
}

int cmd_run(const lpos::Scenario& scenario, const std::string& out_path) {
    std::vector<lpos::RoundTranscript> rounds = lpos::run_scenario(scenario);
    if (out_path.empty()) {
        std::cout << lpos::metrics_csv(rounds);
    } else {
        lpos::write_metrics_csv(out_path, rounds);
        std::fprintf(stderr, "wrote %zu rounds to %s\n", rounds.size(),
                     out_path.c_str());
    }
    return kExitOk;
}

int cmd_cost(const std::string& schemes_arg, uint64_t n_min, uint64_t n_max,
             const lpos::CostParams& params, const std::string& out_path) {
    std::vector<lpos::Scheme> schemes;
    std::string tok;
    std::istringstream in(schemes_arg);
    while (std::getline(in, tok, ','))
        if (!tok.empty()) schemes.push_back(lpos::scheme_from_name(tok));
    if (schemes.empty())
        throw std::invalid_argument("cost: no schemes selected");
    std::string csv = lpos::cost_csv(schemes, n_min, n_max, params);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cost: cannot open " + out_path);
        out << csv;
        std::fprintf(stderr, "wrote cost sweep to %s\n", out_path.c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LPOS cooperative spectrum sensing simulator"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "execute a sensing scenario");
    std::string scenario_file;
    lpos::Scenario sc;
    std::string lambda_arg = "auto";
    std::string profile = "test";
    std::string out_path;
    std::vector<std::string> drops, joins, leaves, fails;
    bool parallel = false;
    run->add_option("--scenario", scenario_file, "scenario file (flags override)");
    auto* n_opt = run->add_option("--n", sc.n, "number of secondary users");
    auto* tau_opt = run->add_option("--tau", sc.tau, "energy threshold");
    auto* gamma_opt = run->add_option("--gamma", sc.gamma, "reading bit width");
    auto* lambda_opt =
        run->add_option("--lambda", lambda_arg, "voting threshold (count or 'auto')");
    auto* rounds_opt = run->add_option("--rounds", sc.rounds, "rounds to simulate");
    auto* seed_opt = run->add_option("--seed", sc.seed, "deterministic seed");
    auto* profile_opt = run->add_option("--profile", profile, "test or nist")
                            ->check(CLI::IsMember({"test", "nist"}));
    run->add_option("--drop", drops, "ROUND:COUNT users stop reporting");
    run->add_option("--join", joins, "ROUND:COUNT users join the group");
    run->add_option("--leave", leaves, "ROUND:COUNT users leave the group");
    run->add_option("--fail", fails, "ROUND:COUNT users ignore probes that round");
    run->add_flag("--parallel", parallel, "deliver bus waves on worker threads");
    run->add_option("--out", out_path, "metrics CSV path (default: stdout)");

    // --- cost ---
    auto* cost = app.add_subcommand("cost", "communication cost sweep");
    std::string schemes_arg = "lpos,eceg,pdaft,ppss";
    uint64_t n_min = 2, n_max = 2048;
    lpos::CostParams cp;
    std::string cost_out;
    cost->add_option("--schemes", schemes_arg, "comma list: lpos,eceg,pdaft,ppss");
    cost->add_option("--n-min", n_min, "smallest user count");
    cost->add_option("--n-max", n_max, "largest user count");
    cost->add_option("--gamma", cp.gamma, "reading bit width");
    cost->add_option("--p-bits", cp.p_bits, "comparison modulus bits");
    cost->add_option("--q-bits", cp.q_bits, "EC element bits");
    cost->add_option("--n-bits", cp.n_bits, "Paillier modulus bits");
    cost->add_option("--eps-ope", cp.eps_ope, "OPE ciphertext bits");
    cost->add_option("--out", cost_out, "cost CSV path (default: stdout)");

    // --- selftest ---
    auto* selftest = app.add_subcommand("selftest", "run the smoke suites");
    std::string st_profile = "test";
    selftest->add_option("--profile", st_profile, "test or nist")
        ->check(CLI::IsMember({"test", "nist"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            lpos::Scenario base;
            if (!scenario_file.empty()) base = lpos::scenario_from_file(scenario_file);
            if (*n_opt || scenario_file.empty()) base.n = sc.n;
            if (*tau_opt || scenario_file.empty()) base.tau = sc.tau;
            if (*gamma_opt || scenario_file.empty()) base.gamma = sc.gamma;
            if (*rounds_opt || scenario_file.empty()) base.rounds = sc.rounds;
            if (*seed_opt || scenario_file.empty()) base.seed = sc.seed;
            if (*lambda_opt || scenario_file.empty())
                base.lambda = lambda_arg == "auto"
                                  ? lpos::LambdaPolicy::half_voting()
                                  : lpos::LambdaPolicy::fixed_threshold(
                                        uint32_t(std::stoul(lambda_arg)));
            if (*profile_opt || scenario_file.empty())
                base.nist_profile = profile == "nist";
            if (parallel) base.parallel_bus = true;
            for (const auto& s : drops) base.events.push_back(parse_event(s, "drop"));
            for (const auto& s : joins) base.events.push_back(parse_event(s, "join"));
            for (const auto& s : leaves)
                base.events.push_back(parse_event(s, "leave"));
            for (const auto& s : fails) base.events.push_back(parse_event(s, "fail"));
            if (const char* env = std::getenv("LPOS_SEED"))
                base.seed = std::stoull(env);
            base.validate();
            return cmd_run(base, out_path);
        }
        if (cost->parsed()) return cmd_cost(schemes_arg, n_min, n_max, cp, cost_out);
        if (selftest->parsed())
            return lpos::run_selftests(st_profile == "nist") ? kExitOk : kExitFailure;
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
