#include "spibb/harness.hpp"

#include "number_format.hpp"
#include "seeding.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace spibb {

namespace {

using detail::derive_seed;
using detail::format_number;

constexpr std::uint64_t kInstanceStream = 1;
constexpr std::uint64_t kDatasetStream = 1000;

std::string sanitize(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
    return text;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument("cannot parse number '" + text + "'");
    return value;
}

template <class Int>
Int parse_int(const std::string& text) {
    Int value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument("cannot parse integer '" + text + "'");
    return value;
}

AlgorithmSpec spec_from_params(AlgorithmKind kind, const std::string& params) {
    AlgorithmSpec spec{kind};
    if (params.empty()) return spec;
    for (const auto& item : split(params, ';')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad parameter '" + item + "'");
        const auto key = item.substr(0, eq);
        const auto value = item.substr(eq + 1);
        if (key == "kappa_adj")
            spec.kappa_adj = parse_double(value);
        else if (key == "n_wedge")
            spec.n_wedge = parse_int<int>(value);
        else if (key == "xi")
            spec.xi = parse_double(value);
        else if (key == "epsilon")
            spec.epsilon = parse_double(value);
        else if (key == "delta")
            spec.delta = parse_double(value);
        else
            throw std::invalid_argument("unknown parameter '" + key + "'");
    }
    return spec;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view to_string(Benchmark benchmark) {
    return benchmark == Benchmark::RandomMdps ? "random_mdps" : "wet_chicken";
}

Benchmark parse_benchmark(std::string_view name) {
    if (name == "random_mdps") return Benchmark::RandomMdps;
    if (name == "wet_chicken") return Benchmark::WetChicken;
    throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (n_trials < 1) throw std::invalid_argument("ExperimentConfig: n_trials must be >= 1");
    if (data_sizes.empty()) throw std::invalid_argument("ExperimentConfig: no data sizes");
    for (std::size_t i = 0; i < data_sizes.size(); ++i) {
        if (data_sizes[i] < 1) throw std::invalid_argument("ExperimentConfig: data sizes must be >= 1");
        if (i > 0 && data_sizes[i] <= data_sizes[i - 1])
            throw std::invalid_argument("ExperimentConfig: data sizes must be strictly increasing");
    }
    if (algorithms.empty()) throw std::invalid_argument("ExperimentConfig: no algorithms");
    for (const auto& spec : algorithms) spec.validate();
    if (max_trajectory_length < 1)
        throw std::invalid_argument("ExperimentConfig: max_trajectory_length must be >= 1");
    if (benchmark == Benchmark::RandomMdps)
        random_mdp.validate();
    else
        wet_chicken.validate();
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index) {
    return derive_seed(base_seed, static_cast<std::uint64_t>(trial_index));
}

std::vector<TrialResult> run_trial(const ExperimentConfig& config, int trial_index) {
    using Clock = std::chrono::steady_clock;
    const std::uint64_t seed = trial_seed(config.base_seed, trial_index);

    std::optional<Mdp> mdp;
    std::optional<TabularPolicy> baseline;
    int instance = 0;
    double rho_b = 0.0, rho_star = 0.0;
    if (config.benchmark == Benchmark::RandomMdps) {
        auto draw = make_random_mdp_instance(config.random_mdp, derive_seed(seed, kInstanceStream));
        instance = draw.easter_egg;
        rho_b = draw.rho_baseline;
        rho_star = draw.rho_optimal;
        mdp.emplace(std::move(draw.mdp));
        baseline.emplace(std::move(draw.baseline));
    } else {
        mdp.emplace(wet_chicken_mdp(config.wet_chicken));
        baseline.emplace(wet_chicken_baseline(config.wet_chicken));
        rho_b = performance(*mdp, *baseline);
        rho_star = performance(*mdp, value_iteration(*mdp).policy);
        if (!(rho_star > rho_b))
            throw std::runtime_error("run_trial: optimal policy does not beat the baseline");
    }

    std::vector<TrialResult> out;
    out.reserve(config.data_sizes.size() * config.algorithms.size());
    for (std::size_t i = 0; i < config.data_sizes.size(); ++i) {
        const int size = config.data_sizes[i];
        const std::uint64_t data_seed = derive_seed(seed, kDatasetStream + i);
        Dataset data = config.benchmark == Benchmark::RandomMdps
                           ? sample_dataset(*mdp, *baseline, size, config.max_trajectory_length,
                                            data_seed)
                           : sample_dataset(*mdp, *baseline, 1, size, data_seed);
        const TrainInput input(std::move(data), *baseline, mdp->gamma(), mdp->r_max(),
                               mdp->terminal(), mdp->initial_state(), &*mdp);
        for (const auto& spec : config.algorithms) {
            TrialResult r;
            r.trial = trial_index;
            r.seed = seed;
            r.benchmark = config.benchmark;
            r.instance = instance;
            r.algorithm = spec;
            r.data_size = size;
            r.rho_b = rho_b;
            r.rho_star = rho_star;
            const auto start = Clock::now();
            try {
                const TabularPolicy policy = train(spec, input);
                r.rho = performance(*mdp, policy);
                r.rho_bar = normalize(r.rho, rho_b, rho_star);
            } catch (const std::exception& e) {
                r.rho = std::numeric_limits<double>::quiet_NaN();
                r.rho_bar = std::numeric_limits<double>::quiet_NaN();
                r.error = e.what();
                if (r.error.empty()) r.error = "training failed";
            }
            if (config.record_timing)
                r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& config, int jobs) {
    config.validate();
    const int n = config.n_trials;
    std::vector<std::vector<TrialResult>> per_trial(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                per_trial[static_cast<std::size_t>(i)] = run_trial(config, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(jobs, 1, n);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<TrialResult> all;
    for (auto& chunk : per_trial)
        for (auto& r : chunk) all.push_back(std::move(r));
    return all;
}

double normalize(double rho, double rho_b, double rho_star) {
    if (!(rho_star > rho_b)) throw std::domain_error("normalize: rho_star must exceed rho_b");
    return (rho - rho_b) / (rho_star - rho_b);
}

double cvar(std::vector<double> values, double alpha) {
    if (values.empty()) throw std::invalid_argument("cvar: no values");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("cvar: alpha must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += values[i];
    return sum / static_cast<double>(k);
}

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results, double alpha) {
    struct Group {
        SummaryRow row;
        std::vector<double> values;
    };
    std::vector<Group> groups;
    for (const auto& r : results) {
        const auto label = r.algorithm.label();
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.row.algorithm == label && g.row.data_size == r.data_size;
        });
        if (it == groups.end()) {
            groups.push_back({SummaryRow{label, r.data_size}, {}});
            it = std::prev(groups.end());
        }
        if (r.ok() && std::isfinite(r.rho_bar))
            it->values.push_back(r.rho_bar);
        else
            ++it->row.n_failed;
    }
    std::vector<SummaryRow> out;
    for (auto& g : groups) {
        g.row.n = static_cast<int>(g.values.size());
        if (g.values.empty()) {
            g.row.mean = g.row.cvar_1pct = std::numeric_limits<double>::quiet_NaN();
        } else {
            double sum = 0.0;
            for (double v : g.values) sum += v;
            g.row.mean = sum / static_cast<double>(g.values.size());
            g.row.cvar_1pct = cvar(g.values, alpha);
        }
        out.push_back(std::move(g.row));
    }
    return out;
}

AlgorithmSpec table1_spec(Benchmark benchmark, AlgorithmKind kind) {
    const bool random = benchmark == Benchmark::RandomMdps;
    AlgorithmSpec spec{kind};
    switch (kind) {
    case AlgorithmKind::RaMDP:
        spec.kappa_adj = random ? 0.05 : 2.0;
        break;
    case AlgorithmKind::RMin:
        spec.n_wedge = 3;
        break;
    case AlgorithmKind::DUIPI:
        spec.xi = random ? 0.1 : 0.5;
        break;
    case AlgorithmKind::PiB_SPIBB:
    case AlgorithmKind::PiLeqB_SPIBB:
        spec.n_wedge = random ? 10 : 7;
        break;
    case AlgorithmKind::ApproxSoftSPIBB:
    case AlgorithmKind::AdvApproxSoftSPIBB:
        spec.delta = 1.0;
        spec.epsilon = random ? 2.0 : 1.0;
        break;
    case AlgorithmKind::LowerApproxSoftSPIBB:
        spec.delta = 1.0;
        spec.epsilon = random ? 1.0 : 0.5;
        break;
    default:
        break;
    }
    return spec;
}

std::vector<AlgorithmSpec> table1_algorithms(Benchmark benchmark) {
    std::vector<AlgorithmSpec> out;
    for (auto kind : {AlgorithmKind::BasicRL, AlgorithmKind::RaMDP, AlgorithmKind::RMin,
                      AlgorithmKind::DUIPI, AlgorithmKind::PiB_SPIBB, AlgorithmKind::PiLeqB_SPIBB,
                      AlgorithmKind::ApproxSoftSPIBB, AlgorithmKind::AdvApproxSoftSPIBB,
                      AlgorithmKind::LowerApproxSoftSPIBB})
        out.push_back(table1_spec(benchmark, kind));
    return out;
}

std::vector<AlgorithmSpec> default_grid(Benchmark benchmark, AlgorithmKind kind) {
    const AlgorithmSpec ref = table1_spec(benchmark, kind);
    std::vector<AlgorithmSpec> grid;
    constexpr double kScales[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    switch (kind) {
    case AlgorithmKind::RaMDP:
        for (double f : kScales) grid.push_back({kind, ref.kappa_adj * f});
        break;
    case AlgorithmKind::DUIPI:
        for (double f : kScales) {
            AlgorithmSpec s = ref;
            s.xi = ref.xi * f;
            grid.push_back(s);
        }
        break;
    case AlgorithmKind::RMin:
    case AlgorithmKind::PiB_SPIBB:
    case AlgorithmKind::PiLeqB_SPIBB:
        for (int n : {1, 3, 5, 7, 10, 15, 20}) {
            AlgorithmSpec s = ref;
            s.n_wedge = n;
            grid.push_back(s);
        }
        break;
    case AlgorithmKind::ApproxSoftSPIBB:
    case AlgorithmKind::AdvApproxSoftSPIBB:
    case AlgorithmKind::LowerApproxSoftSPIBB:
        for (double f : kScales) {
            AlgorithmSpec s = ref;
            s.epsilon = ref.epsilon * f;
            grid.push_back(s);
        }
        break;
    default:
        grid.push_back(ref);
        break;
    }
    return grid;
}

GridSearchResult select_best(const std::vector<AlgorithmSpec>& grid,
                             const std::vector<SummaryRow>& table, int smallest_size) {
    GridSearchResult result;
    result.table = table;
    for (const auto& spec : grid) {
        const auto label = spec.label();
        double cv = -std::numeric_limits<double>::infinity();
        double mean_sum = 0.0;
        int mean_count = 0;
        for (const auto& row : table) {
            if (row.algorithm != label || row.n == 0) continue;
            if (row.data_size == smallest_size) cv = row.cvar_1pct;
            mean_sum += row.mean;
            ++mean_count;
        }
        const double mean_all = mean_count > 0 ? mean_sum / mean_count
                                               : -std::numeric_limits<double>::infinity();
        auto it = result.best.find(spec.kind);
        if (it == result.best.end()) {
            result.best.emplace(spec.kind, GridChoice{spec, cv, mean_all});
            continue;
        }
        const GridChoice& cur = it->second;
        if (cv > cur.cvar_smallest || (cv == cur.cvar_smallest && mean_all > cur.mean_all))
            it->second = GridChoice{spec, cv, mean_all};
    }
    return result;
}

GridSearchResult grid_search(const ExperimentConfig& config,
                             const std::map<AlgorithmKind, std::vector<AlgorithmSpec>>& grids,
                             int jobs) {
    std::vector<AlgorithmSpec> all;
    for (const auto& [kind, grid] : grids) {
        if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
        for (const auto& spec : grid) {
            if (spec.kind != kind) throw std::invalid_argument("grid_search: grid kind mismatch");
            all.push_back(spec);
        }
    }
    ExperimentConfig run = config;
    run.algorithms = all;
    const auto results = run_experiment(run, jobs);
    return select_best(all, summarize(results), config.data_sizes.front());
}

std::string results_to_csv(const std::vector<TrialResult>& results) {
    std::string out =
        "trial,seed,benchmark,algorithm,params,size,rho,rho_b,rho_star,rho_bar,seconds,instance,error\n";
    for (const auto& r : results) {
        out += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' +
               std::string(to_string(r.benchmark)) + ',' + std::string(to_string(r.algorithm.kind)) +
               ',' + r.algorithm.params() + ',' + std::to_string(r.data_size) + ',' +
               format_number(r.rho) + ',' + format_number(r.rho_b) + ',' +
               format_number(r.rho_star) + ',' + format_number(r.rho_bar) + ',' +
               format_number(r.seconds) + ',' + std::to_string(r.instance) + ',' + sanitize(r.error) +
               '\n';
    }
    return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& summary) {
    std::string out = "algorithm,size,mean,cvar_1pct,n,n_failed\n";
    for (const auto& row : summary)
        out += row.algorithm + ',' + std::to_string(row.data_size) + ',' + format_number(row.mean) +
               ',' + format_number(row.cvar_1pct) + ',' + std::to_string(row.n) + ',' +
               std::to_string(row.n_failed) + '\n';
    return out;
}

std::vector<TrialResult> results_from_csv(const std::string& text) {
    const auto lines = csv_lines(text);
    if (lines.empty() || lines.front().rfind("trial,seed,", 0) != 0)
        throw std::invalid_argument("results csv: missing header");
    std::vector<TrialResult> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split(lines[i], ',');
        if (f.size() != 13) throw std::invalid_argument("results csv: expected 13 fields");
        TrialResult r;
        r.trial = parse_int<int>(f[0]);
        r.seed = parse_int<std::uint64_t>(f[1]);
        r.benchmark = parse_benchmark(f[2]);
        r.algorithm = spec_from_params(parse_algorithm_kind(f[3]), f[4]);
        r.data_size = parse_int<int>(f[5]);
        r.rho = parse_double(f[6]);
        r.rho_b = parse_double(f[7]);
        r.rho_star = parse_double(f[8]);
        r.rho_bar = parse_double(f[9]);
        r.seconds = parse_double(f[10]);
        r.instance = parse_int<int>(f[11]);
        r.error = f[12];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SummaryRow> summary_from_csv(const std::string& text) {
    const auto lines = csv_lines(text);
    if (lines.empty() || lines.front().rfind("algorithm,size,", 0) != 0)
        throw std::invalid_argument("summary csv: missing header");
    std::vector<SummaryRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != 6) throw std::invalid_argument("summary csv: expected 6 fields");
        out.push_back({f[0], parse_int<int>(f[1]), parse_double(f[2]), parse_double(f[3]),
                       parse_int<int>(f[4]), parse_int<int>(f[5])});
    }
    return out;
}

std::pair<std::filesystem::path, std::filesystem::path> export_results(
    const std::vector<TrialResult>& results, const std::vector<SummaryRow>& summary,
    const std::filesystem::path& dir, ExportFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());

    if (format == ExportFormat::Csv) {
        const auto results_path = dir / "results.csv";
        const auto summary_path = dir / "summary.csv";
        write_file(results_path, results_to_csv(results));
        write_file(summary_path, summary_to_csv(summary));
        return {results_path, summary_path};
    }

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) {
        rows.push_back({{"trial", r.trial},
                        {"seed", r.seed},
                        {"benchmark", to_string(r.benchmark)},
                        {"algorithm", to_string(r.algorithm.kind)},
                        {"params", r.algorithm.params()},
                        {"size", r.data_size},
                        {"rho", number_or_null(r.rho)},
                        {"rho_b", number_or_null(r.rho_b)},
                        {"rho_star", number_or_null(r.rho_star)},
                        {"rho_bar", number_or_null(r.rho_bar)},
                        {"seconds", r.seconds},
                        {"instance", r.instance},
                        {"error", r.error}});
    }
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& row : summary) {
        groups.push_back({{"algorithm", row.algorithm},
                          {"size", row.data_size},
                          {"mean", number_or_null(row.mean)},
                          {"cvar_1pct", number_or_null(row.cvar_1pct)},
                          {"n", row.n},
                          {"n_failed", row.n_failed}});
    }
    const auto results_path = dir / "results.json";
    const auto summary_path = dir / "summary.json";
    write_file(results_path, rows.dump(2) + "\n");
    write_file(summary_path, groups.dump(2) + "\n");
    return {results_path, summary_path};
}

Assumption1Sweep assumption1_sweep(const std::vector<double>& gammas, int n_instances,
                                   int n_trajectories, double delta, std::uint64_t seed,
                                   RandomMdpConfig base) {
    if (n_instances < 1 || n_trajectories < 1)
        throw std::invalid_argument("assumption1_sweep: need instances and trajectories");
    Assumption1Sweep sweep;
    sweep.gammas = gammas;
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        RandomMdpConfig cfg = base;
        cfg.gamma = gammas[g];
        bool feasible = false;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_instances; ++i) {
            const std::uint64_t s = derive_seed(derive_seed(seed, g), static_cast<std::uint64_t>(i));
            const Mdp mdp = generate_random_mdp(cfg, derive_seed(s, 1));
            const auto baseline = generate_baseline(mdp, cfg.eta, derive_seed(s, 2));
            const Dataset data =
                sample_dataset(mdp, baseline.policy, n_trajectories, 200, derive_seed(s, 3));
            const auto counts = visit_counts(data, mdp.terminal(), true);
            const auto report =
                assumption1_min_kappa(mdp, baseline.policy, error_function_p(counts, delta));
            best = std::min(best, report.max_ratio);
            feasible = feasible || report.feasible(cfg.gamma);
        }
        sweep.feasible.push_back(feasible);
        sweep.best_max_ratio.push_back(best);
    }
    return sweep;
}

}  // namespace spibb
