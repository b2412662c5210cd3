#pragma once

#include "spibb/algorithms.hpp"
#include "spibb/benchmarks.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace spibb {

enum class Benchmark { RandomMdps, WetChicken };

std::string_view to_string(Benchmark benchmark);
Benchmark parse_benchmark(std::string_view name);

struct ExperimentConfig {
    Benchmark benchmark = Benchmark::RandomMdps;
    /// Trajectory counts (Random MDPs) or trajectory length (Wet Chicken).
    std::vector<int> data_sizes{10};
    std::vector<AlgorithmSpec> algorithms;
    int n_trials = 1;
    std::uint64_t base_seed = 0;
    RandomMdpConfig random_mdp;
    WetChickenConfig wet_chicken;
    /// Length cap of each Random MDPs trajectory.
    int max_trajectory_length = 200;
    /// Measure wall time per record. Off by default so outputs stay byte-stable.
    bool record_timing = false;
    std::filesystem::path output = "results";

    void validate() const;
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    Benchmark benchmark = Benchmark::RandomMdps;
    /// Easter-egg state for Random MDPs, 0 for Wet Chicken.
    int instance = 0;
    AlgorithmSpec algorithm;
    int data_size = 0;
    double rho = 0.0;
    double rho_b = 0.0;
    double rho_star = 0.0;
    double rho_bar = 0.0;
    double seconds = 0.0;
    /// Empty on success. Failed records carry rho_bar = NaN.
    std::string error;

    bool ok() const { return error.empty(); }
    bool operator==(const TrialResult&) const = default;
};

/// Seed of trial `trial_index`, a counter-based split of the base seed.
std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index);

/// One record per (data size, algorithm), sizes outermost. Every random draw is
/// derived from (base_seed, trial_index).
std::vector<TrialResult> run_trial(const ExperimentConfig& config, int trial_index);

/// All trials, ordered by trial index. The output does not depend on `jobs`.
std::vector<TrialResult> run_experiment(const ExperimentConfig& config, int jobs = 1);

/// (rho - rho_b) / (rho_star - rho_b). Throws std::domain_error if rho_star <= rho_b.
double normalize(double rho, double rho_b, double rho_star);

/// Mean of the ceil(alpha n) smallest values.
double cvar(std::vector<double> values, double alpha);

struct SummaryRow {
    std::string algorithm;  // AlgorithmSpec::label()
    int data_size = 0;
    double mean = 0.0;
    double cvar_1pct = 0.0;
    int n = 0;
    int n_failed = 0;

    bool operator==(const SummaryRow&) const = default;
};

/// Groups by (algorithm label, data size) in first-seen order; failed records
/// are counted but excluded from the statistics.
std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results, double alpha = 0.01);

/// Hyper-parameters of the reference settings for a benchmark.
AlgorithmSpec table1_spec(Benchmark benchmark, AlgorithmKind kind);
/// All nine SPI algorithms with their reference hyper-parameters.
std::vector<AlgorithmSpec> table1_algorithms(Benchmark benchmark);
/// Default grid around the reference value.
std::vector<AlgorithmSpec> default_grid(Benchmark benchmark, AlgorithmKind kind);

struct GridChoice {
    AlgorithmSpec best;
    double cvar_smallest = 0.0;
    double mean_all = 0.0;
};

struct GridSearchResult {
    std::map<AlgorithmKind, GridChoice> best;
    std::vector<SummaryRow> table;
};

/// Picks per algorithm kind the point with the highest 1%-CVaR at the smallest
/// data size; ties go to the higher mean across all sizes, then to the first
/// point listed.
GridSearchResult select_best(const std::vector<AlgorithmSpec>& grid,
                             const std::vector<SummaryRow>& table, int smallest_size);

/// Runs every grid point through run_experiment and applies select_best.
GridSearchResult grid_search(const ExperimentConfig& config,
                             const std::map<AlgorithmKind, std::vector<AlgorithmSpec>>& grids,
                             int jobs = 1);

enum class ExportFormat { Csv, Json };

/// Writes results.{csv,json} and summary.{csv,json} into `dir`; returns the
/// two paths. Throws std::runtime_error when a file cannot be written.
std::pair<std::filesystem::path, std::filesystem::path> export_results(
    const std::vector<TrialResult>& results, const std::vector<SummaryRow>& summary,
    const std::filesystem::path& dir, ExportFormat format = ExportFormat::Csv);

std::string results_to_csv(const std::vector<TrialResult>& results);
std::string summary_to_csv(const std::vector<SummaryRow>& summary);
std::vector<TrialResult> results_from_csv(const std::string& text);
std::vector<SummaryRow> summary_from_csv(const std::string& text);

struct Assumption1Sweep {
    std::vector<double> gammas;
    /// Per gamma: whether some sampled (baseline, dataset) pair satisfied every ratio.
    std::vector<bool> feasible;
    /// Smallest max-ratio over the sampled instances, per gamma.
    std::vector<double> best_max_ratio;
};

/// Samples Random MDPs per gamma, builds e_P from a baseline dataset and checks
/// whether max ratio * gamma < 1.
Assumption1Sweep assumption1_sweep(const std::vector<double>& gammas, int n_instances,
                                   int n_trajectories, double delta, std::uint64_t seed,
                                   RandomMdpConfig base = {});

}  // namespace spibb
