#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spibb {

/// Row-major |S|x|A| table of reals. Used for action values, rewards and
/// anything else indexed by a state-action pair.
struct ActionTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> values;

    ActionTable() = default;
    ActionTable(int states, int actions, double fill = 0.0)
        : n_states(states), n_actions(actions),
          values(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions), fill) {}

    double& operator()(int s, int a) { return values[index(s, a)]; }
    double operator()(int s, int a) const { return values[index(s, a)]; }

    std::span<const double> row(int s) const {
        return {values.data() + index(s, 0), static_cast<std::size_t>(n_actions)};
    }
    std::span<double> row(int s) {
        return {values.data() + index(s, 0), static_cast<std::size_t>(n_actions)};
    }

private:
    std::size_t index(int s, int a) const {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
               static_cast<std::size_t>(a);
    }
};

using QTable = ActionTable;

/**
 * Dense tabular MDP.
 *
 * Terminal states are absorbing with zero reward; their transition and reward
 * rows are stored but never read by the solvers. The constructor validates
 * shapes, stochasticity of every non-terminal row (1e-12) and the reward bound.
 */
class Mdp {
public:
    Mdp(int n_states, int n_actions, std::vector<double> transition, std::vector<double> reward,
        double gamma, std::vector<bool> terminal, int initial_state, double r_max);

    /// Model whose reward is paid on entering a state: R(s,a) is the
    /// expectation of entry_reward over P(.|s,a), and sampled transitions
    /// carry entry_reward[s'].
    static Mdp with_entry_rewards(int n_states, int n_actions, std::vector<double> transition,
                                  std::vector<double> entry_reward, double gamma,
                                  std::vector<bool> terminal, int initial_state, double r_max);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    double gamma() const { return gamma_; }
    double r_max() const { return r_max_; }
    /// Bound on the absolute discounted return, r_max / (1 - gamma).
    double g_max() const { return r_max_ / (1.0 - gamma_); }
    int initial_state() const { return initial_state_; }
    bool is_terminal(int s) const { return terminal_[static_cast<std::size_t>(s)]; }
    const std::vector<bool>& terminal() const { return terminal_; }

    double transition(int s, int a, int next) const {
        return transition_[offset(s, a) + static_cast<std::size_t>(next)];
    }
    /// P(.|s,a) as a span of length n_states.
    std::span<const double> transition_row(int s, int a) const {
        return {transition_.data() + offset(s, a), static_cast<std::size_t>(n_states_)};
    }
    double reward(int s, int a) const {
        return reward_[static_cast<std::size_t>(s) * n_actions_ + a];
    }
    /// Reward observed on the transition (s, a, next): entry_reward[next] when
    /// the model has entry rewards, R(s,a) otherwise.
    double sampled_reward(int s, int a, int next) const {
        return entry_reward_.empty() ? reward(s, a) : entry_reward_[static_cast<std::size_t>(next)];
    }
    bool has_entry_rewards() const { return !entry_reward_.empty(); }
    const std::vector<double>& transition_data() const { return transition_; }
    const std::vector<double>& reward_data() const { return reward_; }
    /// Empty unless built by with_entry_rewards.
    const std::vector<double>& entry_reward_data() const { return entry_reward_; }

private:
    std::size_t offset(int s, int a) const {
        return (static_cast<std::size_t>(s) * n_actions_ + a) * static_cast<std::size_t>(n_states_);
    }

    int n_states_;
    int n_actions_;
    std::vector<double> transition_;
    std::vector<double> reward_;
    double gamma_;
    std::vector<bool> terminal_;
    int initial_state_;
    double r_max_;
    std::vector<double> entry_reward_;
};

/// Row-stochastic state -> action distribution table.
class TabularPolicy {
public:
    /// Validates every row (entries >= -1e-12, clamped to 0; sums within 1e-9).
    TabularPolicy(int n_states, int n_actions, std::vector<double> probs);

    static TabularPolicy uniform(int n_states, int n_actions);
    static TabularPolicy deterministic(int n_actions, std::span<const int> actions);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    double operator()(int s, int a) const {
        return probs_[static_cast<std::size_t>(s) * n_actions_ + a];
    }
    std::span<const double> row(int s) const {
        return {probs_.data() + static_cast<std::size_t>(s) * n_actions_,
                static_cast<std::size_t>(n_actions_)};
    }
    const std::vector<double>& data() const { return probs_; }

    /// Largest absolute entrywise difference to another policy of the same shape.
    double max_abs_diff(const TabularPolicy& other) const;

    bool operator==(const TabularPolicy&) const = default;

private:
    int n_states_;
    int n_actions_;
    std::vector<double> probs_;
};

struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;

    bool operator==(const Step&) const = default;
};

struct Trajectory {
    std::vector<Step> steps;

    bool operator==(const Trajectory&) const = default;
};

struct Dataset {
    int n_states = 0;
    int n_actions = 0;
    std::vector<Trajectory> trajectories;

    std::size_t total_steps() const;
    bool operator==(const Dataset&) const = default;
};

struct Evaluation {
    QTable q;
    std::vector<double> v;
    int sweeps = 0;
};

struct GreedySolution {
    TabularPolicy policy;
    QTable q;
};

inline constexpr double kEvaluationTol = 1e-10;
inline constexpr int kMaxSweeps = 100000;

/// Q^pi and V^pi by iterating the Bellman expectation operator until the largest
/// change falls below tol. Terminal states have Q = V = 0.
Evaluation policy_evaluation(const Mdp& mdp, const TabularPolicy& policy,
                             double tol = kEvaluationTol, int max_sweeps = kMaxSweeps);

/// Q* and the greedy deterministic policy (lowest action index on ties).
GreedySolution value_iteration(const Mdp& mdp, double tol = kEvaluationTol,
                               int max_sweeps = kMaxSweeps);

/// Deterministic policy picking argmax_a q(s,a), lowest index on exact ties.
TabularPolicy greedy_policy(const QTable& q);

/// V^pi(initial_state).
double performance(const Mdp& mdp, const TabularPolicy& policy);

/// Rolls out n_trajectories from the initial state. Rewards are
/// Mdp::sampled_reward; a trajectory stops on entering a terminal state or after
/// max_len steps.
Dataset sample_dataset(const Mdp& mdp, const TabularPolicy& policy, int n_trajectories,
                       int max_len, std::uint64_t seed);

/// Maximum likelihood model. Unvisited pairs become zero-reward self-loops.
/// `terminal` may be empty (no terminal states).
Mdp mle_mdp(const Dataset& dataset, double gamma, double r_max,
            std::vector<bool> terminal = {}, int initial_state = 0);

struct MonteCarloEstimate {
    QTable q;
    std::vector<bool> visited;

    bool is_visited(int s, int a) const {
        return visited[static_cast<std::size_t>(s) * q.n_actions + a];
    }
};

/// Every-visit Monte-Carlo estimate of Q^{pi_b}; returns are truncated at the
/// end of each trajectory.
MonteCarloEstimate monte_carlo_q(const Dataset& dataset, double gamma);

}  // namespace spibb
