#pragma once

#include "spibb/mdp.hpp"

#include <array>
#include <cstdint>

namespace spibb {

struct RandomMdpConfig {
    int n_states = 50;
    int n_actions = 4;
    int successors_per_pair = 4;
    double gamma = 0.95;
    /// Baseline performance ratio between the uniform (0) and optimal (1) policy.
    double eta = 0.9;
    /// Absolute tolerance on the baseline performance; <= 0 selects
    /// 0.01 * (V*(0) - V^uniform(0)).
    double perf_tolerance = -1.0;

    void validate() const;
};

/// Random MDP: state 0 initial, state n_states-1 terminal, every non-terminal
/// pair reaches successors_per_pair distinct states with flat-Dirichlet
/// probabilities, reward 1 on entering the terminal state (R(s,a) holds the
/// expectation).
Mdp generate_random_mdp(const RandomMdpConfig& config, std::uint64_t seed);

struct BaselineResult {
    TabularPolicy policy;
    double performance = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool within_tolerance = false;
};

/// Softmax over Q* with a bisected temperature, followed by noise rounds that
/// are kept only while the performance stays within tolerance of
/// eta V*(0) + (1 - eta) V^uniform(0).
BaselineResult generate_baseline(const Mdp& mdp, double eta, std::uint64_t seed,
                                 double tolerance = -1.0);

struct EasterEgg {
    Mdp mdp;
    int state = -1;
};

/// Turns a uniformly chosen state (neither initial nor terminal) into a
/// terminal state that pays reward 1 on entry.
EasterEgg apply_easter_egg(const Mdp& mdp, std::uint64_t seed);

/// One benchmark draw: the mutated MDP, the baseline built before mutation and
/// the reference performances on the mutated MDP.
struct RandomMdpInstance {
    Mdp mdp;
    TabularPolicy baseline;
    int easter_egg = -1;
    double rho_baseline = 0.0;
    double rho_optimal = 0.0;
    int attempts = 0;
};

/// Draws instances until the optimal policy strictly beats the baseline.
RandomMdpInstance make_random_mdp_instance(const RandomMdpConfig& config, std::uint64_t seed);

struct WetChickenConfig {
    int width = 5;
    int length = 5;
    double gamma = 0.95;
    double epsilon_greedy = 0.1;

    void validate() const;
};

enum class WetChickenAction : int { Drift = 0, Hold = 1, PaddleBack = 2, Right = 3, Left = 4 };

inline constexpr int kWetChickenActions = 5;
/// (a_x, a_y) per action, in WetChickenAction order.
inline constexpr std::array<std::array<int, 2>, kWetChickenActions> kWetChickenMoves{
    {{0, 0}, {-1, 0}, {-2, 0}, {0, 1}, {0, -1}}};

inline int wet_chicken_state(int x, int y, int width = 5) { return x * width + y; }

/// Exact transition kernel of the discrete river: the turbulence draw is
/// integrated over interval lengths instead of sampled. Reward is the x
/// coordinate of the successor (0 after falling).
Mdp wet_chicken_mdp(const WetChickenConfig& config = {});

/// Head for (2,2) and paddle back there, mixed with the uniform policy.
TabularPolicy wet_chicken_baseline(const WetChickenConfig& config = {});

/// Deterministic core action of the Wet Chicken behaviour policy.
WetChickenAction wet_chicken_core_action(int x, int y);

}  // namespace spibb
