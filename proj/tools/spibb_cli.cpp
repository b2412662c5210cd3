// Command-line front end: experiments, grid search, assumption audit, safety
// bound, benchmark export and summary of stored results.

#include "spibb/io.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace spibb;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// 12 significant digits; integral values keep a trailing ".0".
std::string number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
    std::string out(buf, res.ptr);
    if (out.find_first_of(".e") == std::string::npos) out += ".0";
    return out;
}

std::filesystem::path output_dir(const std::filesystem::path& configured, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("SPIBB_OUTPUT_DIR"); env != nullptr && *env != '\0')
        return env;
    return configured;
}

int run_experiment_cmd(const std::string& config_path, int jobs, const std::string& out) {
    const ExperimentFile file = load_experiment(config_path);
    const auto results = run_experiment(file.config, jobs);
    const auto summary = summarize(results);
    const auto [r, s] = export_results(results, summary, output_dir(file.config.output, out),
                                       file.format);
    std::cout << "wrote " << r.string() << " (" << results.size() << " records)\n"
              << "wrote " << s.string() << " (" << summary.size() << " rows)\n";
    return 0;
}

int grid_search_cmd(const std::string& config_path, int jobs, const std::string& out) {
    ExperimentFile file = load_experiment(config_path);
    if (file.grids.empty())
        for (const auto& spec : file.config.algorithms)
            file.grids[spec.kind] = default_grid(file.config.benchmark, spec.kind);
    const auto result = grid_search(file.config, file.grids, jobs);

    const auto dir = output_dir(file.config.output, out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
    {
        std::ofstream table(dir / "grid_table.csv", std::ios::binary | std::ios::trunc);
        table << summary_to_csv(result.table);
        if (!table) throw std::runtime_error("failed writing grid_table.csv");
    }
    nlohmann::json best = nlohmann::json::array();
    for (const auto& [kind, choice] : result.best) {
        auto entry = algorithm_to_json(choice.best);
        entry["cvar_1pct_smallest"] = choice.cvar_smallest;
        entry["mean_all_sizes"] = choice.mean_all;
        best.push_back(entry);
        std::cout << choice.best.label() << "  cvar_1pct=" << number(choice.cvar_smallest)
                  << "  mean=" << number(choice.mean_all) << '\n';
    }
    std::ofstream best_file(dir / "grid_best.json", std::ios::binary | std::ios::trunc);
    best_file << best.dump(2) << '\n';
    if (!best_file) throw std::runtime_error("failed writing grid_best.json");
    return 0;
}

struct AssumptionArgs {
    std::string model;
    std::string dataset;
    int counterexample = 0;
    std::vector<double> gammas{0.95};
    double delta = 0.05;
    int trajectories = 100;
    std::uint64_t seed = 0;
};

int assumption_check_cmd(const AssumptionArgs& args) {
    std::optional<Mdp> mdp;
    std::optional<TabularPolicy> baseline;
    VisitCounts counts;
    if (args.counterexample > 0) {
        auto ce = counterexample_mdp(args.counterexample, args.gammas.front());
        mdp.emplace(std::move(ce.mdp));
        baseline.emplace(std::move(ce.baseline));
        counts = std::move(ce.counts);
    } else {
        auto file = load_model(args.model);
        if (!file.baseline) throw ConfigError("model has no baseline policy");
        mdp.emplace(std::move(file.mdp));
        baseline.emplace(std::move(*file.baseline));
        const Dataset data = args.dataset.empty()
                                 ? sample_dataset(*mdp, *baseline, args.trajectories, 200, args.seed)
                                 : load_dataset(args.dataset);
        if (data.n_states != mdp->n_states() || data.n_actions != mdp->n_actions())
            throw ConfigError("dataset shape does not match the model");
        counts = visit_counts(data, mdp->terminal(), true);
    }
    const auto report = assumption1_min_kappa(*mdp, *baseline, error_function_p(counts, args.delta));

    std::cout << "state,action,ratio\n";
    for (int s = 0; s < report.ratios.n_states; ++s)
        for (int a = 0; a < report.ratios.n_actions; ++a)
            std::cout << s << ',' << a << ',' << number(report.ratios(s, a)) << '\n';
    std::cout << "max_ratio " << number(report.max_ratio);
    if (report.max_state >= 0) std::cout << " at (" << report.max_state << ',' << report.max_action << ')';
    std::cout << '\n';
    if (!report.skipped.empty())
        std::cout << "skipped " << report.skipped.size() << " unvisited pairs\n";
    bool violated = false;
    for (double gamma : args.gammas) {
        const bool ok = report.feasible(gamma);
        violated = violated || !ok;
        std::cout << "gamma " << number(gamma) << ": " << (ok ? "feasible" : "infeasible")
                  << " (max_ratio * gamma = " << number(report.max_ratio * gamma) << ")\n";
    }
    std::cout << (violated ? "Assumption 1 violated" : "Assumption 1 satisfied") << '\n';
    return 0;
}

int gen_benchmark_cmd(const std::string& kind, std::uint64_t seed, const std::string& out,
                      int n_states, double eta) {
    const Benchmark benchmark = parse_benchmark(kind);
    if (benchmark == Benchmark::RandomMdps) {
        RandomMdpConfig config;
        config.n_states = n_states;
        config.eta = eta;
        const auto inst = make_random_mdp_instance(config, seed);
        save_model(out, inst.mdp, &inst.baseline);
        std::cout << "easter_egg " << inst.easter_egg << "\nrho_b " << number(inst.rho_baseline)
                  << "\nrho_star " << number(inst.rho_optimal) << '\n';
    } else {
        const WetChickenConfig config;
        const Mdp mdp = wet_chicken_mdp(config);
        const TabularPolicy baseline = wet_chicken_baseline(config);
        save_model(out, mdp, &baseline);
    }
    std::cout << "wrote " << out << '\n';
    return 0;
}

int summarize_cmd(const std::string& path, double alpha) {
    const auto rows = summarize(results_from_csv(read_text(path)), alpha);
    std::cout << summary_to_csv(rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safe policy improvement experiments on tabular MDPs"};
    app.require_subcommand(1);

    int jobs = 1;
    std::string config_path, out;

    auto* run = app.add_subcommand("run-experiment", "Run a JSON-configured experiment");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out,-o", out, "Output directory (overrides config and SPIBB_OUTPUT_DIR)");

    auto* grid = app.add_subcommand("grid-search", "Hyper-parameter grid search");
    grid->add_option("config", config_path, "Experiment config (JSON)")->required();
    grid->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
    grid->add_option("--out,-o", out, "Output directory (overrides config and SPIBB_OUTPUT_DIR)");

    AssumptionArgs assumption;
    auto* check = app.add_subcommand("assumption-check", "Smallest kappa of the error-propagation assumption");
    auto* model_opt = check->add_option("--model", assumption.model, "Model JSON with a baseline")
                          ->check(CLI::ExistingFile);
    auto* ce_opt = check->add_option("--counterexample", assumption.counterexample,
                                     "Use the n-leaf counterexample MDP")
                       ->check(CLI::PositiveNumber);
    model_opt->excludes(ce_opt);
    check->add_option("--dataset", assumption.dataset, "Dataset (JSON lines)")
        ->check(CLI::ExistingFile)
        ->needs(model_opt);
    check->add_option("--gamma", assumption.gammas, "Discount factors to test")
        ->expected(1, -1)
        ->check(CLI::Range(0.0, 1.0));
    check->add_option("--delta", assumption.delta, "Confidence parameter")->check(CLI::PositiveNumber);
    check->add_option("--trajectories", assumption.trajectories,
                      "Baseline trajectories sampled when no dataset is given")
        ->check(CLI::PositiveNumber);
    check->add_option("--seed", assumption.seed, "Sampling seed");

    double epsilon = 0.0, gamma = 0.95, gmax = 1.0;
    auto* bound = app.add_subcommand("safety-bound", "Admissible loss epsilon*G_max/(1-gamma)");
    bound->add_option("--epsilon", epsilon)->required()->check(CLI::NonNegativeNumber);
    bound->add_option("--gamma", gamma)->required()->check(CLI::Range(0.0, 1.0));
    bound->add_option("--gmax", gmax)->required()->check(CLI::NonNegativeNumber);

    std::string kind;
    std::uint64_t seed = 0;
    int n_states = 50;
    double eta = 0.9;
    auto* gen = app.add_subcommand("gen-benchmark", "Export a benchmark MDP and baseline as JSON");
    gen->add_option("--kind", kind)->required()->check(CLI::IsMember({"random_mdps", "wet_chicken"}));
    gen->add_option("--seed", seed);
    gen->add_option("--out", out)->required();
    gen->add_option("--n-states", n_states, "Random MDPs only")->check(CLI::Range(3, 100000));
    gen->add_option("--eta", eta, "Random MDPs only")->check(CLI::Range(0.0, 1.0));

    std::string results_path;
    double alpha = 0.01;
    auto* sum = app.add_subcommand("summarize", "Mean and CVaR of a results CSV");
    sum->add_option("results", results_path)->required()->check(CLI::ExistingFile);
    sum->add_option("--alpha", alpha)->check(CLI::Range(1e-12, 1.0));

    try {
        app.parse(argc, argv);
        if (check->parsed() && assumption.model.empty() && assumption.counterexample == 0)
            throw CLI::RequiredError("assumption-check needs --model or --counterexample");
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (run->parsed()) return run_experiment_cmd(config_path, jobs, out);
        if (grid->parsed()) return grid_search_cmd(config_path, jobs, out);
        if (check->parsed()) return assumption_check_cmd(assumption);
        if (bound->parsed()) {
            if (gamma >= 1.0) throw std::invalid_argument("gamma must be below 1");
            std::cout << number(theorem1_bound(epsilon, gamma, gmax)) << '\n';
            return 0;
        }
        if (gen->parsed()) return gen_benchmark_cmd(kind, seed, out, n_states, eta);
        if (sum->parsed()) return summarize_cmd(results_path, alpha);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
