#pragma once

#include "spibb/mdp.hpp"

#include <vector>

namespace spibb::detail {

/// Compressed successor lists of an Mdp. Terminal states get empty rows so that
/// every backup through them is zero.
struct SparseKernel {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::size_t> row_start;  // (s * n_actions + a) -> first entry
    std::vector<int> next;
    std::vector<double> prob;
    std::vector<double> reward;          // R(s,a), zero at terminal states
    std::vector<bool> terminal;

    explicit SparseKernel(const Mdp& mdp);

    std::size_t pair(int s, int a) const {
        return static_cast<std::size_t>(s) * n_actions + a;
    }

    /// sum_{s'} P(s'|s,a) v(s')
    double expect(int s, int a, const std::vector<double>& v) const {
        double acc = 0.0;
        const std::size_t p = pair(s, a);
        for (std::size_t k = row_start[p]; k < row_start[p + 1]; ++k) acc += prob[k] * v[next[k]];
        return acc;
    }
};

/// Q(s,a) = R(s,a) + gamma * E[v(s')], zero at terminal states.
QTable backup(const SparseKernel& kernel, double gamma, const std::vector<double>& v);

/// Fixed point of v = r_pi + gamma P_pi v by Jacobi iteration. Throws
/// std::runtime_error when max_sweeps is exceeded.
std::vector<double> evaluate_state_values(const SparseKernel& kernel, double gamma,
                                          const TabularPolicy& policy, double tol,
                                          int max_sweeps, int* sweeps_out = nullptr);

}  // namespace spibb::detail
