#include "spibb/benchmarks.hpp"

#include "seeding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace spibb {

namespace {

using detail::derive_seed;

constexpr int kBisectionSteps = 100;
constexpr int kNoiseRounds = 100;
constexpr double kNoiseWeight = 0.2;
constexpr int kMaxInstanceAttempts = 1000;

std::vector<double> dirichlet(std::mt19937_64& rng, int k) {
    std::gamma_distribution<double> draw(1.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (auto& x : w) {
        x = draw(rng);
        sum += x;
    }
    for (auto& x : w) x /= sum;
    return w;
}

TabularPolicy softmax_policy(const QTable& q, double temperature) {
    std::vector<double> probs(q.values.size());
    for (int s = 0; s < q.n_states; ++s) {
        const auto row = q.row(s);
        const double top = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (int a = 0; a < q.n_actions; ++a) {
            const double w = std::exp((row[a] - top) / temperature);
            probs[static_cast<std::size_t>(s) * q.n_actions + a] = w;
            sum += w;
        }
        for (int a = 0; a < q.n_actions; ++a) probs[static_cast<std::size_t>(s) * q.n_actions + a] /= sum;
    }
    return {q.n_states, q.n_actions, std::move(probs)};
}

}  // namespace

void RandomMdpConfig::validate() const {
    if (n_states < 3) throw std::invalid_argument("RandomMdpConfig: need at least 3 states");
    if (n_actions < 1) throw std::invalid_argument("RandomMdpConfig: need at least 1 action");
    if (successors_per_pair < 1 || successors_per_pair > n_states)
        throw std::invalid_argument("RandomMdpConfig: successors_per_pair must lie in [1, n_states]");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("RandomMdpConfig: gamma must lie in [0, 1)");
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("RandomMdpConfig: eta must lie in [0, 1]");
}

Mdp generate_random_mdp(const RandomMdpConfig& config, std::uint64_t seed) {
    config.validate();
    const int n_s = config.n_states;
    const int n_a = config.n_actions;
    const int goal = n_s - 1;
    std::mt19937_64 rng(seed);

    std::vector<double> transition(static_cast<std::size_t>(n_s) * n_a * n_s, 0.0);
    std::vector<int> pool(static_cast<std::size_t>(n_s));
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) {
            double* row = transition.data() + (static_cast<std::size_t>(s) * n_a + a) * n_s;
            if (s == goal) {
                row[s] = 1.0;
                continue;
            }
            // partial Fisher-Yates: the first k entries are a uniform k-subset
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < config.successors_per_pair; ++i) {
                std::uniform_int_distribution<int> pick(i, n_s - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            const auto weights = dirichlet(rng, config.successors_per_pair);
            for (int i = 0; i < config.successors_per_pair; ++i) row[pool[i]] = weights[i];
        }
    }
    std::vector<bool> terminal(static_cast<std::size_t>(n_s), false);
    terminal[goal] = true;
    std::vector<double> entry(static_cast<std::size_t>(n_s), 0.0);
    entry[goal] = 1.0;
    return Mdp::with_entry_rewards(n_s, n_a, std::move(transition), std::move(entry), config.gamma,
                                   std::move(terminal), 0, 1.0);
}

BaselineResult generate_baseline(const Mdp& mdp, double eta, std::uint64_t seed, double tolerance) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("generate_baseline: eta must lie in [0, 1]");
    const auto optimal = value_iteration(mdp);
    const double v_star = performance(mdp, optimal.policy);
    const double v_uniform = performance(mdp, TabularPolicy::uniform(mdp.n_states(), mdp.n_actions()));
    const double target = eta * v_star + (1.0 - eta) * v_uniform;
    const double tol = tolerance > 0.0 ? tolerance : 0.01 * std::max(v_star - v_uniform, 0.0);

    auto evaluate = [&](const TabularPolicy& p) { return performance(mdp, p); };

    // Bisection on log-temperature: low temperature is near-greedy (high value).
    double lo = std::log(1e-6), hi = std::log(1e3);
    TabularPolicy best = optimal.policy;
    double best_perf = v_star;
    for (int i = 0; i < kBisectionSteps; ++i) {
        const double mid = 0.5 * (lo + hi);
        TabularPolicy candidate = softmax_policy(optimal.q, std::exp(mid));
        const double perf = evaluate(candidate);
        if (std::abs(perf - target) < std::abs(best_perf - target)) {
            best = candidate;
            best_perf = perf;
        }
        if (std::abs(perf - target) <= 0.5 * tol) break;
        if (perf > target)
            lo = mid;
        else
            hi = mid;
    }

    // Noise rounds: perturb one state's row at a time, keep what stays in range.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_state(0, mdp.n_states() - 1);
    for (int round = 0; round < kNoiseRounds; ++round) {
        const int s = pick_state(rng);
        const auto noise = dirichlet(rng, mdp.n_actions());
        std::vector<double> probs = best.data();
        for (int a = 0; a < mdp.n_actions(); ++a) {
            double& p = probs[static_cast<std::size_t>(s) * mdp.n_actions() + a];
            p = (1.0 - kNoiseWeight) * p + kNoiseWeight * noise[a];
        }
        TabularPolicy candidate(mdp.n_states(), mdp.n_actions(), std::move(probs));
        const double perf = evaluate(candidate);
        const bool inside = std::abs(perf - target) <= tol;
        const bool was_inside = std::abs(best_perf - target) <= tol;
        if ((was_inside && inside) ||
            (!was_inside && std::abs(perf - target) < std::abs(best_perf - target))) {
            best = std::move(candidate);
            best_perf = perf;
        }
    }
    return {std::move(best), best_perf, target, tol, std::abs(best_perf - target) <= tol};
}

EasterEgg apply_easter_egg(const Mdp& mdp, std::uint64_t seed) {
    if (mdp.n_states() < 3) throw std::invalid_argument("apply_easter_egg: need at least 3 states");
    std::vector<int> candidates;
    for (int s = 0; s < mdp.n_states(); ++s)
        if (s != mdp.initial_state() && !mdp.is_terminal(s)) candidates.push_back(s);
    if (candidates.empty()) throw std::invalid_argument("apply_easter_egg: no regular state left");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const int egg = candidates[pick(rng)];

    const int n_s = mdp.n_states();
    const int n_a = mdp.n_actions();
    std::vector<bool> terminal = mdp.terminal();
    terminal[static_cast<std::size_t>(egg)] = true;
    if (mdp.has_entry_rewards()) {
        std::vector<double> entry = mdp.entry_reward_data();
        entry[static_cast<std::size_t>(egg)] = 1.0;
        return {Mdp::with_entry_rewards(n_s, n_a, mdp.transition_data(), std::move(entry),
                                        mdp.gamma(), std::move(terminal), mdp.initial_state(),
                                        std::max(mdp.r_max(), 1.0)),
                egg};
    }
    std::vector<double> reward = mdp.reward_data();
    for (int s = 0; s < n_s; ++s) {
        if (mdp.is_terminal(s)) continue;
        for (int a = 0; a < n_a; ++a)
            reward[static_cast<std::size_t>(s) * n_a + a] += mdp.transition(s, a, egg);
    }
    double bound = mdp.r_max();
    for (double r : reward) bound = std::max(bound, std::abs(r));
    return {Mdp(n_s, n_a, mdp.transition_data(), std::move(reward), mdp.gamma(), std::move(terminal),
                mdp.initial_state(), std::max(bound, 1.0)),
            egg};
}

RandomMdpInstance make_random_mdp_instance(const RandomMdpConfig& config, std::uint64_t seed) {
    config.validate();
    for (int attempt = 1; attempt <= kMaxInstanceAttempts; ++attempt) {
        const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(attempt));
        const Mdp original = generate_random_mdp(config, derive_seed(base, 1));
        auto baseline = generate_baseline(original, config.eta, derive_seed(base, 2),
                                          config.perf_tolerance);
        auto egg = apply_easter_egg(original, derive_seed(base, 3));
        const double rho_b = performance(egg.mdp, baseline.policy);
        const double rho_star = performance(egg.mdp, value_iteration(egg.mdp).policy);
        if (!(rho_star > rho_b + 1e-9)) continue;
        return {std::move(egg.mdp), std::move(baseline.policy), egg.state, rho_b, rho_star, attempt};
    }
    throw std::runtime_error("make_random_mdp_instance: no instance with rho* > rho_b");
}

void WetChickenConfig::validate() const {
    if (width != 5 || length != 5)
        throw std::invalid_argument("WetChickenConfig: the river is 5 x 5");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("WetChickenConfig: gamma must lie in [0, 1)");
    if (!(epsilon_greedy >= 0.0 && epsilon_greedy <= 1.0))
        throw std::invalid_argument("WetChickenConfig: epsilon_greedy must lie in [0, 1]");
}

Mdp wet_chicken_mdp(const WetChickenConfig& config) {
    config.validate();
    const int len = config.length;
    const int wid = config.width;
    const int n_s = len * wid;
    const int n_a = kWetChickenActions;
    std::vector<double> transition(static_cast<std::size_t>(n_s) * n_a * n_s, 0.0);

    for (int x = 0; x < len; ++x) {
        for (int y = 0; y < wid; ++y) {
            const int s = wet_chicken_state(x, y, wid);
            const double velocity = y * 3.0 / 5.0;
            const double turbulence = 3.5 - velocity;
            for (int a = 0; a < n_a; ++a) {
                const auto [ax, ay] = kWetChickenMoves[a];
                const double centre = x + ax + velocity;
                const int next_y = std::clamp(y + ay, 0, wid - 1);
                double* row = transition.data() + (static_cast<std::size_t>(s) * n_a + a) * n_s;
                // round(centre + tau * turbulence) = k  <=>  tau in [(k-0.5-c)/b, (k+0.5-c)/b)
                const int k_lo = static_cast<int>(std::floor(centre - turbulence)) - 1;
                const int k_hi = static_cast<int>(std::ceil(centre + turbulence)) + 1;
                for (int k = k_lo; k <= k_hi; ++k) {
                    const double t0 = std::max(-1.0, (k - 0.5 - centre) / turbulence);
                    const double t1 = std::min(1.0, (k + 0.5 - centre) / turbulence);
                    if (t1 <= t0) continue;
                    const double mass = (t1 - t0) / 2.0;
                    if (k > len - 1) {
                        row[wet_chicken_state(0, 0, wid)] += mass;
                    } else {
                        row[wet_chicken_state(std::max(k, 0), next_y, wid)] += mass;
                    }
                }
            }
        }
    }
    // the reward is the x coordinate of the successor, so falling pays 0
    std::vector<double> entry(static_cast<std::size_t>(n_s), 0.0);
    for (int x = 0; x < len; ++x)
        for (int y = 0; y < wid; ++y) entry[static_cast<std::size_t>(wet_chicken_state(x, y, wid))] = x;
    return Mdp::with_entry_rewards(n_s, n_a, std::move(transition), std::move(entry), config.gamma,
                                   std::vector<bool>(static_cast<std::size_t>(n_s), false), 0,
                                   static_cast<double>(len - 1));
}

WetChickenAction wet_chicken_core_action(int x, int y) {
    constexpr int kTarget = 2;
    const int dx = x - kTarget;
    const int dy = y - kTarget;
    if (dx == 0 && dy == 0) return WetChickenAction::PaddleBack;
    if (dx != 0 && std::abs(dx) >= std::abs(dy)) {
        if (dx >= 2) return WetChickenAction::PaddleBack;
        if (dx == 1) return WetChickenAction::Hold;
        return WetChickenAction::Drift;
    }
    return dy < 0 ? WetChickenAction::Right : WetChickenAction::Left;
}

TabularPolicy wet_chicken_baseline(const WetChickenConfig& config) {
    config.validate();
    const int n_s = config.length * config.width;
    const int n_a = kWetChickenActions;
    const double floor = config.epsilon_greedy / n_a;
    std::vector<double> probs(static_cast<std::size_t>(n_s) * n_a, floor);
    for (int x = 0; x < config.length; ++x) {
        for (int y = 0; y < config.width; ++y) {
            const int s = wet_chicken_state(x, y, config.width);
            const int a = static_cast<int>(wet_chicken_core_action(x, y));
            probs[static_cast<std::size_t>(s) * n_a + a] += 1.0 - config.epsilon_greedy;
        }
    }
    return {n_s, n_a, std::move(probs)};
}

}  // namespace spibb
