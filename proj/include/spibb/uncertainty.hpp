#pragma once

#include "spibb/mdp.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace spibb {

/// N_D(s,a), the number of occurrences of each state-action pair in a dataset.
struct VisitCounts {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::int64_t> counts;

    VisitCounts() = default;
    VisitCounts(int states, int actions)
        : n_states(states), n_actions(actions),
          counts(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions), 0) {}

    std::int64_t& operator()(int s, int a) {
        return counts[static_cast<std::size_t>(s) * n_actions + a];
    }
    std::int64_t operator()(int s, int a) const {
        return counts[static_cast<std::size_t>(s) * n_actions + a];
    }
    std::int64_t total() const;
};

enum class ErrorKind { QError, PError };

inline constexpr double kInfiniteError = std::numeric_limits<double>::infinity();

/// Per-pair uncertainty. +infinity marks pairs without data.
struct ErrorTable {
    ActionTable values;
    ErrorKind kind = ErrorKind::QError;
    double delta = 1.0;

    double operator()(int s, int a) const { return values(s, a); }
    int n_states() const { return values.n_states; }
    int n_actions() const { return values.n_actions; }
};

/// Exact occurrence counts. With count_terminal_arrivals, every transition into a
/// terminal state s' also counts as a visit of each absorbing pair (s', a').
VisitCounts visit_counts(const Dataset& dataset, const std::vector<bool>& terminal = {},
                         bool count_terminal_arrivals = false);

/// e_Q(s,a) = sqrt(2 / N log(2|S||A| / delta)); +inf where N = 0.
ErrorTable error_function_q(const VisitCounts& counts, double delta);

/// e_P(s,a) = sqrt(2 / N log(2|S||A| 2^|A| / delta)); +inf where N = 0.
ErrorTable error_function_p(const VisitCounts& counts, double delta);

/// Magnitude of the admissible loss epsilon * g_max / (1 - gamma) for a
/// constrained, advantageous policy.
double theorem1_bound(double epsilon, double gamma, double g_max);

struct KappaReport {
    /// ratio(s,a); NaN where the pair was skipped because its own error is infinite.
    ActionTable ratios;
    double max_ratio = 0.0;
    int max_state = -1;
    int max_action = -1;
    /// Pairs whose own e_P is infinite (vacuous, excluded from the maximum).
    std::vector<std::pair<int, int>> skipped;

    /// Whether some kappa < 1/gamma satisfies every checked pair.
    bool feasible(double gamma) const { return max_ratio * gamma < 1.0; }
};

/**
 * Smallest kappa for which
 *   sum_{s',a'} e_P(s',a') pi_b(a'|s') P(s'|s,a) <= kappa e_P(s,a)
 * holds at every pair with finite e_P(s,a). Terminal states act as zero-reward
 * self-loops, so a pair leading into terminal s' is charged the error of the
 * absorbing pairs (s', .). A zero e_P with positive left-hand side gives +inf.
 */
KappaReport assumption1_min_kappa(const Mdp& mdp, const TabularPolicy& baseline,
                                  const ErrorTable& e_p);

/// Star-shaped MDP: state 0 has a single action reaching each of the n terminal
/// states with probability 1/n.
struct Counterexample {
    Mdp mdp;
    TabularPolicy baseline;
    /// Balanced data: every terminal state reached once, N(0) = n.
    VisitCounts counts;
};

Counterexample counterexample_mdp(int n, double gamma = 0.95);

}  // namespace spibb
