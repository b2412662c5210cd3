#include "spibb/mdp.hpp"

#include "sparse_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace spibb {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kPolicySumTol = 1e-9;
constexpr double kNegativeClamp = -1e-12;

std::size_t area(int a, int b) { return static_cast<std::size_t>(a) * static_cast<std::size_t>(b); }

// Index of the first cumulative bin exceeding u.
int sample_index(std::span<const double> probs, double u) {
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = static_cast<int>(i);
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    // u landed in the rounding gap above the cumulative sum
    return last_positive;
}

}  // namespace

Mdp::Mdp(int n_states, int n_actions, std::vector<double> transition, std::vector<double> reward,
         double gamma, std::vector<bool> terminal, int initial_state, double r_max)
    : n_states_(n_states), n_actions_(n_actions), transition_(std::move(transition)),
      reward_(std::move(reward)), gamma_(gamma), terminal_(std::move(terminal)),
      initial_state_(initial_state), r_max_(r_max) {
    if (n_states_ <= 0 || n_actions_ <= 0)
        throw std::invalid_argument("Mdp: state and action counts must be positive");
    if (transition_.size() != area(n_states_, n_actions_) * static_cast<std::size_t>(n_states_))
        throw std::invalid_argument("Mdp: transition kernel has wrong size");
    if (reward_.size() != area(n_states_, n_actions_))
        throw std::invalid_argument("Mdp: reward table has wrong size");
    if (terminal_.empty()) terminal_.assign(static_cast<std::size_t>(n_states_), false);
    if (terminal_.size() != static_cast<std::size_t>(n_states_))
        throw std::invalid_argument("Mdp: terminal flags have wrong size");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0))
        throw std::invalid_argument("Mdp: discount must lie in [0, 1)");
    if (initial_state_ < 0 || initial_state_ >= n_states_)
        throw std::invalid_argument("Mdp: initial state out of range");
    if (!(r_max_ >= 0.0)) throw std::invalid_argument("Mdp: r_max must be nonnegative");

    for (int s = 0; s < n_states_; ++s) {
        if (is_terminal(s)) continue;
        for (int a = 0; a < n_actions_; ++a) {
            double sum = 0.0;
            for (double p : transition_row(s, a)) {
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("Mdp: transition probability outside [0, 1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw std::invalid_argument("Mdp: transition row (" + std::to_string(s) + ", " +
                                            std::to_string(a) + ") does not sum to 1");
            if (!(std::abs(this->reward(s, a)) <= r_max_ + 1e-12))
                throw std::invalid_argument("Mdp: reward exceeds r_max");
        }
    }
}

Mdp Mdp::with_entry_rewards(int n_states, int n_actions, std::vector<double> transition,
                            std::vector<double> entry_reward, double gamma,
                            std::vector<bool> terminal, int initial_state, double r_max) {
    if (n_states <= 0 || entry_reward.size() != static_cast<std::size_t>(n_states))
        throw std::invalid_argument("Mdp: entry rewards need one value per state");
    if (n_actions <= 0 || transition.size() != area(n_states, n_actions) * static_cast<std::size_t>(n_states))
        throw std::invalid_argument("Mdp: transition kernel has wrong size");
    for (double r : entry_reward)
        if (!(std::abs(r) <= r_max + 1e-12)) throw std::invalid_argument("Mdp: reward exceeds r_max");
    std::vector<double> reward(area(n_states, n_actions), 0.0);
    for (std::size_t p = 0; p < reward.size(); ++p) {
        const double* row = transition.data() + p * static_cast<std::size_t>(n_states);
        double r = 0.0;
        for (int n = 0; n < n_states; ++n) r += row[n] * entry_reward[static_cast<std::size_t>(n)];
        reward[p] = std::clamp(r, -r_max, r_max);
    }
    Mdp out(n_states, n_actions, std::move(transition), std::move(reward), gamma,
            std::move(terminal), initial_state, r_max);
    out.entry_reward_ = std::move(entry_reward);
    return out;
}

TabularPolicy::TabularPolicy(int n_states, int n_actions, std::vector<double> probs)
    : n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
    if (n_states_ <= 0 || n_actions_ <= 0)
        throw std::invalid_argument("TabularPolicy: shape must be positive");
    if (probs_.size() != area(n_states_, n_actions_))
        throw std::invalid_argument("TabularPolicy: table has wrong size");
    for (int s = 0; s < n_states_; ++s) {
        double sum = 0.0;
        for (int a = 0; a < n_actions_; ++a) {
            double& p = probs_[area(s, n_actions_) + a];
            if (!(p >= kNegativeClamp))
                throw std::invalid_argument("TabularPolicy: negative probability in state " +
                                            std::to_string(s));
            if (p < 0.0) p = 0.0;
            sum += p;
        }
        if (std::abs(sum - 1.0) > kPolicySumTol)
            throw std::invalid_argument("TabularPolicy: row " + std::to_string(s) +
                                        " does not sum to 1");
    }
}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
    return {n_states, n_actions, std::vector<double>(area(n_states, n_actions), 1.0 / n_actions)};
}

TabularPolicy TabularPolicy::deterministic(int n_actions, std::span<const int> actions) {
    const int n_states = static_cast<int>(actions.size());
    std::vector<double> probs(area(n_states, n_actions), 0.0);
    for (int s = 0; s < n_states; ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions)
            throw std::invalid_argument("TabularPolicy: action index out of range");
        probs[area(s, n_actions) + actions[s]] = 1.0;
    }
    return {n_states, n_actions, std::move(probs)};
}

double TabularPolicy::max_abs_diff(const TabularPolicy& other) const {
    if (other.n_states_ != n_states_ || other.n_actions_ != n_actions_)
        throw std::invalid_argument("TabularPolicy: shape mismatch");
    double diff = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i)
        diff = std::max(diff, std::abs(probs_[i] - other.probs_[i]));
    return diff;
}

std::size_t Dataset::total_steps() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += t.steps.size();
    return n;
}

namespace detail {

SparseKernel::SparseKernel(const Mdp& mdp)
    : n_states(mdp.n_states()), n_actions(mdp.n_actions()),
      reward(area(mdp.n_states(), mdp.n_actions()), 0.0), terminal(mdp.terminal()) {
    row_start.reserve(area(n_states, n_actions) + 1);
    row_start.push_back(0);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            if (!mdp.is_terminal(s)) {
                reward[pair(s, a)] = mdp.reward(s, a);
                const auto row = mdp.transition_row(s, a);
                for (int n = 0; n < n_states; ++n) {
                    if (row[n] > 0.0) {
                        next.push_back(n);
                        prob.push_back(row[n]);
                    }
                }
            }
            row_start.push_back(next.size());
        }
    }
}

QTable backup(const SparseKernel& kernel, double gamma, const std::vector<double>& v) {
    QTable q(kernel.n_states, kernel.n_actions);
    for (int s = 0; s < kernel.n_states; ++s) {
        if (kernel.terminal[s]) continue;
        for (int a = 0; a < kernel.n_actions; ++a)
            q(s, a) = kernel.reward[kernel.pair(s, a)] + gamma * kernel.expect(s, a, v);
    }
    return q;
}

std::vector<double> evaluate_state_values(const SparseKernel& kernel, double gamma,
                                          const TabularPolicy& policy, double tol,
                                          int max_sweeps, int* sweeps_out) {
    if (policy.n_states() != kernel.n_states || policy.n_actions() != kernel.n_actions)
        throw std::invalid_argument("policy_evaluation: policy shape does not match the MDP");
    if (!(tol > 0.0)) throw std::invalid_argument("policy_evaluation: tol must be positive");

    const int n = kernel.n_states;
    // Policy-induced chain r_pi, P_pi in compressed form.
    std::vector<double> r_pi(static_cast<std::size_t>(n), 0.0);
    std::vector<std::size_t> start{0};
    std::vector<int> cols;
    std::vector<double> vals;
    std::vector<double> scratch(static_cast<std::size_t>(n), 0.0);
    std::vector<int> touched;
    for (int s = 0; s < n; ++s) {
        if (!kernel.terminal[s]) {
            for (int a = 0; a < kernel.n_actions; ++a) {
                const double w = policy(s, a);
                if (w == 0.0) continue;
                const std::size_t p = kernel.pair(s, a);
                r_pi[s] += w * kernel.reward[p];
                for (std::size_t k = kernel.row_start[p]; k < kernel.row_start[p + 1]; ++k) {
                    const int nx = kernel.next[k];
                    if (scratch[nx] == 0.0) touched.push_back(nx);
                    scratch[nx] += w * kernel.prob[k];
                }
            }
            std::sort(touched.begin(), touched.end());
            for (int nx : touched) {
                cols.push_back(nx);
                vals.push_back(scratch[nx]);
                scratch[nx] = 0.0;
            }
            touched.clear();
        }
        start.push_back(cols.size());
    }

    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double change = 0.0;
        for (int s = 0; s < n; ++s) {
            double acc = 0.0;
            for (std::size_t k = start[s]; k < start[s + 1]; ++k) acc += vals[k] * v[cols[k]];
            next[s] = r_pi[s] + gamma * acc;
            change = std::max(change, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (change < tol) {
            if (sweeps_out) *sweeps_out = sweep;
            return v;
        }
    }
    throw std::runtime_error("policy_evaluation: no convergence after " +
                             std::to_string(max_sweeps) + " sweeps");
}

}  // namespace detail

Evaluation policy_evaluation(const Mdp& mdp, const TabularPolicy& policy, double tol,
                             int max_sweeps) {
    const detail::SparseKernel kernel(mdp);
    Evaluation out;
    const auto v = detail::evaluate_state_values(kernel, mdp.gamma(), policy, tol, max_sweeps,
                                                 &out.sweeps);
    out.q = detail::backup(kernel, mdp.gamma(), v);
    out.v.assign(static_cast<std::size_t>(mdp.n_states()), 0.0);
    for (int s = 0; s < mdp.n_states(); ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.n_actions(); ++a) acc += policy(s, a) * out.q(s, a);
        out.v[s] = acc;
    }
    return out;
}

TabularPolicy greedy_policy(const QTable& q) {
    std::vector<int> actions(static_cast<std::size_t>(q.n_states), 0);
    for (int s = 0; s < q.n_states; ++s) {
        int best = 0;
        for (int a = 1; a < q.n_actions; ++a)
            if (q(s, a) > q(s, best)) best = a;
        actions[s] = best;
    }
    return TabularPolicy::deterministic(q.n_actions, actions);
}

GreedySolution value_iteration(const Mdp& mdp, double tol, int max_sweeps) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
    const detail::SparseKernel kernel(mdp);
    const int n = mdp.n_states();
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double change = 0.0;
        for (int s = 0; s < n; ++s) {
            if (kernel.terminal[s]) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < kernel.n_actions; ++a)
                best = std::max(best, kernel.reward[kernel.pair(s, a)] +
                                          mdp.gamma() * kernel.expect(s, a, v));
            next[s] = best;
            change = std::max(change, std::abs(best - v[s]));
        }
        v.swap(next);
        if (change < tol) {
            QTable q = detail::backup(kernel, mdp.gamma(), v);
            TabularPolicy policy = greedy_policy(q);
            return {std::move(policy), std::move(q)};
        }
    }
    throw std::runtime_error("value_iteration: no convergence after " +
                             std::to_string(max_sweeps) + " sweeps");
}

double performance(const Mdp& mdp, const TabularPolicy& policy) {
    const detail::SparseKernel kernel(mdp);
    const auto v = detail::evaluate_state_values(kernel, mdp.gamma(), policy, kEvaluationTol,
                                                 kMaxSweeps);
    // One extra backup to report the value consistent with policy_evaluation.
    const int s0 = mdp.initial_state();
    if (kernel.terminal[s0]) return 0.0;
    double acc = 0.0;
    for (int a = 0; a < mdp.n_actions(); ++a) {
        const double w = policy(s0, a);
        if (w == 0.0) continue;
        acc += w * (kernel.reward[kernel.pair(s0, a)] + mdp.gamma() * kernel.expect(s0, a, v));
    }
    return acc;
}

Dataset sample_dataset(const Mdp& mdp, const TabularPolicy& policy, int n_trajectories,
                       int max_len, std::uint64_t seed) {
    if (n_trajectories < 1) throw std::invalid_argument("sample_dataset: need >= 1 trajectory");
    if (max_len < 1) throw std::invalid_argument("sample_dataset: max_len must be >= 1");
    if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
        throw std::invalid_argument("sample_dataset: policy shape does not match the MDP");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Dataset data{mdp.n_states(), mdp.n_actions(), {}};
    data.trajectories.reserve(static_cast<std::size_t>(n_trajectories));
    for (int i = 0; i < n_trajectories; ++i) {
        Trajectory traj;
        int s = mdp.initial_state();
        while (!mdp.is_terminal(s) && static_cast<int>(traj.steps.size()) < max_len) {
            const int a = sample_index(policy.row(s), unit(rng));
            const int next = sample_index(mdp.transition_row(s, a), unit(rng));
            traj.steps.push_back({s, a, mdp.sampled_reward(s, a, next), next});
            s = next;
        }
        data.trajectories.push_back(std::move(traj));
    }
    return data;
}

Mdp mle_mdp(const Dataset& dataset, double gamma, double r_max, std::vector<bool> terminal,
            int initial_state) {
    const int n_s = dataset.n_states;
    const int n_a = dataset.n_actions;
    if (n_s <= 0 || n_a <= 0) throw std::invalid_argument("mle_mdp: dataset has no shape");

    std::vector<double> counts(area(n_s, n_a) * static_cast<std::size_t>(n_s), 0.0);
    std::vector<double> visits(area(n_s, n_a), 0.0);
    std::vector<double> reward_sum(area(n_s, n_a), 0.0);
    for (const auto& traj : dataset.trajectories) {
        for (const auto& st : traj.steps) {
            if (st.state < 0 || st.state >= n_s || st.action < 0 || st.action >= n_a ||
                st.next_state < 0 || st.next_state >= n_s)
                throw std::invalid_argument("mle_mdp: step index outside dataset shape");
            const std::size_t p = area(st.state, n_a) + st.action;
            counts[p * n_s + st.next_state] += 1.0;
            visits[p] += 1.0;
            reward_sum[p] += st.reward;
        }
    }

    std::vector<double> reward(area(n_s, n_a), 0.0);
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) {
            const std::size_t p = area(s, n_a) + a;
            double* row = counts.data() + p * n_s;
            if (visits[p] == 0.0) {
                row[s] = 1.0;
                continue;
            }
            for (int n = 0; n < n_s; ++n) row[n] /= visits[p];
            reward[p] = reward_sum[p] / visits[p];
        }
    }
    return {n_s, n_a, std::move(counts), std::move(reward), gamma, std::move(terminal),
            initial_state, r_max};
}

MonteCarloEstimate monte_carlo_q(const Dataset& dataset, double gamma) {
    const int n_s = dataset.n_states;
    const int n_a = dataset.n_actions;
    if (n_s <= 0 || n_a <= 0) throw std::invalid_argument("monte_carlo_q: dataset has no shape");
    MonteCarloEstimate est{QTable(n_s, n_a), std::vector<bool>(area(n_s, n_a), false)};
    std::vector<double> occurrences(area(n_s, n_a), 0.0);
    for (const auto& traj : dataset.trajectories) {
        double ret = 0.0;
        for (auto it = traj.steps.rbegin(); it != traj.steps.rend(); ++it) {
            ret = it->reward + gamma * ret;
            est.q(it->state, it->action) += ret;
            occurrences[area(it->state, n_a) + it->action] += 1.0;
        }
    }
    for (std::size_t p = 0; p < occurrences.size(); ++p) {
        if (occurrences[p] > 0.0) {
            est.q.values[p] /= occurrences[p];
            est.visited[p] = true;
        }
    }
    return est;
}

}  // namespace spibb
