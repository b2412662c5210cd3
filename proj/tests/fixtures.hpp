#pragma once

#include "spibb/mdp.hpp"

#include <random>
#include <vector>

namespace fixture {

using spibb::Mdp;
using spibb::TabularPolicy;

/// s0 --a--> terminal s1; rewards per action.
inline Mdp one_step(std::vector<double> rewards, double gamma = 0.95) {
    const int n_a = static_cast<int>(rewards.size());
    std::vector<double> p(static_cast<std::size_t>(2 * n_a * 2), 0.0);
    for (int a = 0; a < n_a; ++a) {
        p[static_cast<std::size_t>(a * 2 + 1)] = 1.0;
        p[static_cast<std::size_t>((n_a + a) * 2 + 1)] = 1.0;
    }
    rewards.resize(static_cast<std::size_t>(2 * n_a), 0.0);
    return {2, n_a, p, rewards, gamma, {false, true}, 0, 1.0};
}

inline Mdp self_loop(double reward = 1.0, double gamma = 0.95) {
    return {1, 1, {1.0}, {reward}, gamma, {false}, 0, std::abs(reward)};
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, int n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& x : w) sum += (x = e(rng));
    for (auto& x : w) x /= sum;
    return w;
}

/// Dense random MDP; the last state is terminal when `with_terminal`.
inline Mdp random_mdp(int n_s, int n_a, std::uint64_t seed, double gamma = 0.9,
                      bool with_terminal = true) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> r(-1.0, 1.0);
    std::bernoulli_distribution sparse(0.4);
    std::vector<double> p, rew;
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) {
            auto row = random_simplex(rng, n_s);
            for (auto& x : row)
                if (sparse(rng)) x = 0.0;
            double sum = 0.0;
            for (double x : row) sum += x;
            if (sum == 0.0) {
                row.assign(static_cast<std::size_t>(n_s), 0.0);
                row[static_cast<std::size_t>(s)] = sum = 1.0;
            }
            for (auto& x : row) x /= sum;
            p.insert(p.end(), row.begin(), row.end());
            rew.push_back(r(rng));
        }
    }
    std::vector<bool> terminal(static_cast<std::size_t>(n_s), false);
    if (with_terminal) terminal.back() = true;
    return {n_s, n_a, p, rew, gamma, terminal, 0, 1.0};
}

inline TabularPolicy random_policy(int n_s, int n_a, std::mt19937_64& rng) {
    std::vector<double> probs;
    for (int s = 0; s < n_s; ++s) {
        const auto row = random_simplex(rng, n_a);
        probs.insert(probs.end(), row.begin(), row.end());
    }
    return {n_s, n_a, probs};
}

}  // namespace fixture
