#pragma once

#include "spibb/mdp.hpp"
#include "spibb/uncertainty.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace spibb {

/// SPI algorithms. Baseline and Optimal are reference policies used by the
/// experiment harness (Optimal reads the true MDP and never sees the data).
enum class AlgorithmKind {
    BasicRL,
    RaMDP,
    RMin,
    DUIPI,
    PiB_SPIBB,
    PiLeqB_SPIBB,
    ApproxSoftSPIBB,
    AdvApproxSoftSPIBB,
    LowerApproxSoftSPIBB,
    Baseline,
    Optimal,
};

std::string_view to_string(AlgorithmKind kind);
/// Throws std::invalid_argument on unknown names.
AlgorithmKind parse_algorithm_kind(std::string_view name);

/// Whether the algorithm restricts the policy set relative to the baseline.
bool is_spibb_family(AlgorithmKind kind);

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::BasicRL;
    double kappa_adj = 0.0;  // RaMDP reward penalty weight
    int n_wedge = 0;         // count threshold for R-MIN and SPIBB
    double xi = 0.0;         // DUIPI standard-deviation weight
    double epsilon = 0.0;    // Soft-SPIBB budget
    double delta = 1.0;      // Soft-SPIBB confidence

    /// Throws std::invalid_argument for negative or non-finite parameters.
    void validate() const;
    /// Name plus the parameters relevant to `kind`, e.g. "RaMDP(kappa_adj=2)".
    std::string label() const;
    /// Parameters relevant to `kind`, e.g. "delta=1;epsilon=2".
    std::string params() const;

    bool operator==(const AlgorithmSpec&) const = default;
};

/// Everything an algorithm may use. The statistics are computed once from the
/// dataset; true_mdp is a non-owning pointer for reference policies only.
struct TrainInput {
    TrainInput(Dataset dataset, TabularPolicy baseline, double gamma, double r_max,
               std::vector<bool> terminal = {}, int initial_state = 0,
               const Mdp* true_mdp = nullptr);

    Dataset dataset;
    TabularPolicy baseline;
    double gamma = 0.95;
    double r_max = 1.0;
    std::vector<bool> terminal;
    int initial_state = 0;
    const Mdp* true_mdp = nullptr;

    Mdp mle;
    VisitCounts counts;
    MonteCarloEstimate q_baseline;

    double g_max() const { return r_max / (1.0 - gamma); }
};

/// Dispatches on spec.kind. Always returns a row-stochastic policy.
TabularPolicy train(const AlgorithmSpec& spec, const TrainInput& input);

TabularPolicy basic_rl(const TrainInput& input);

/// R̂(s,a) - kappa_adj / sqrt(N(s,a)); -G_max at unvisited pairs.
std::vector<double> ramdp_rewards(const TrainInput& input, double kappa_adj);
TabularPolicy ramdp(const TrainInput& input, double kappa_adj);

TabularPolicy r_min(const TrainInput& input, int n_wedge);

struct DuipiResult {
    TabularPolicy policy;
    QTable q;
    QTable sigma_q;
    int iterations = 0;
    /// Smallest sigma_Q^2 encountered across all iterations.
    double min_variance = 0.0;
};

DuipiResult duipi_solve(const TrainInput& input, double xi);
TabularPolicy duipi(const TrainInput& input, double xi);

/// Deterministic policy maximising q - xi * sigma, lowest index on ties.
TabularPolicy penalized_greedy(const QTable& q, const QTable& sigma, double xi);

enum class SpibbVariant { PiB, PiLeqB };

/// One SPIBB improvement step; pairs with N < n_wedge are bootstrapped.
TabularPolicy spibb_step(const QTable& q, const TabularPolicy& baseline, const VisitCounts& counts,
                         int n_wedge, SpibbVariant variant);

/// Policy iteration on the MLE model with spibb_step until the policy is stable.
TabularPolicy spibb(const TrainInput& input, int n_wedge, SpibbVariant variant);

enum class SoftVariant { Approx, Adv, Lower };

/**
 * Budgeted improvement step of Soft-SPIBB.
 *
 * Starting from pi_b(.|s), mass moves from lower-valued donors to
 * higher-valued receivers of q. A move of mass m from a- to a+ costs
 * m (e(a-) + e(a+)) of the per-state budget epsilon for Approx and Adv, and
 * m e(a+) for Lower. Approx and Lower return the exact maximiser of the
 * per-state linear program. Adv moves greedily and caps moves so that the
 * running advantage sum m (Q_b(a+) - Q_b(a-)) never becomes negative;
 * q_baseline is required for it and ignored otherwise.
 */
TabularPolicy soft_spibb_step(const QTable& q, const TabularPolicy& baseline, const ErrorTable& e,
                              double epsilon, SoftVariant variant,
                              const QTable* q_baseline = nullptr);

/// Policy iteration on the MLE model with soft_spibb_step and e = e_Q(delta).
TabularPolicy soft_spibb(const TrainInput& input, double epsilon, double delta,
                         SoftVariant variant);

enum class ConstraintKind { Symmetric, Lower };

struct ConstraintCheck {
    bool ok = true;
    /// max_s (weighted deviation(s) - epsilon); positive means violated.
    double max_slack = 0.0;
};

/// Per-state check of sum_a e(s,a)|pi - pi_b| <= epsilon (Symmetric) or of
/// sum_a e(s,a) max(0, pi - pi_b) <= epsilon (Lower), within tol. Pairs with
/// infinite error must be unchanged (Symmetric) or not increased (Lower).
ConstraintCheck verify_constrained(const TabularPolicy& policy, const TabularPolicy& baseline,
                                   const ErrorTable& e, double epsilon, ConstraintKind kind,
                                   double tol = 1e-9);

/// min_s sum_a q(s,a) (pi(a|s) - pi_b(a|s)); nonnegative iff pi is
/// pi_b-advantageous w.r.t. q.
double advantage_margin(const TabularPolicy& policy, const TabularPolicy& baseline,
                        const QTable& q);

inline constexpr int kMaxPolicyIterations = 300;
inline constexpr double kPolicyIterationTol = 1e-5;

}  // namespace spibb
