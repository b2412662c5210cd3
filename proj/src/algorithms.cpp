#include "spibb/algorithms.hpp"

#include "number_format.hpp"
#include "sparse_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace spibb {

namespace {

struct KindName {
    AlgorithmKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 11> kKindNames{{
    {AlgorithmKind::BasicRL, "BasicRL"},
    {AlgorithmKind::RaMDP, "RaMDP"},
    {AlgorithmKind::RMin, "RMin"},
    {AlgorithmKind::DUIPI, "DUIPI"},
    {AlgorithmKind::PiB_SPIBB, "PiB_SPIBB"},
    {AlgorithmKind::PiLeqB_SPIBB, "PiLeqB_SPIBB"},
    {AlgorithmKind::ApproxSoftSPIBB, "ApproxSoftSPIBB"},
    {AlgorithmKind::AdvApproxSoftSPIBB, "AdvApproxSoftSPIBB"},
    {AlgorithmKind::LowerApproxSoftSPIBB, "LowerApproxSoftSPIBB"},
    {AlgorithmKind::Baseline, "Baseline"},
    {AlgorithmKind::Optimal, "Optimal"},
}};

void require_nonnegative(double x, const char* what) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string("AlgorithmSpec: ") + what +
                                    " must be finite and nonnegative");
}

double max_abs_diff(const QTable& a, const QTable& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

QTable evaluate_q(const detail::SparseKernel& kernel, double gamma, const TabularPolicy& policy) {
    const auto v = detail::evaluate_state_values(kernel, gamma, policy, kEvaluationTol, kMaxSweeps);
    return detail::backup(kernel, gamma, v);
}

// Actions of a row sorted by value, ties resolved by action index.
std::vector<int> order_by_value(std::span<const double> values, bool descending) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return descending ? values[a] > values[b] : values[a] < values[b];
    });
    return idx;
}

// Exact per-state transfer for the symmetric and lower budgets:
//   max sum m_dr (q_r - q_d)  s.t.  sum m_dr c_dr <= budget,  sum_r m_dr <= base_d,
// with c_dr = e_d + e_r (symmetric) or e_r (lower). For a multiplier lambda each
// donor sends all of its mass to the receiver maximising gain - lambda cost (or
// keeps it). The optimum mixes the two plans adjacent to the breakpoint where the
// spending of these plans crosses the budget.
struct TransferPair {
    int donor;
    int receiver;
    double gain;
    double cost;
};

void exact_transfer(std::span<const double> q, std::span<const double> base,
                    std::span<const double> e, double budget, bool lower, double* pi) {
    const int n = static_cast<int>(q.size());
    std::vector<TransferPair> pairs;
    for (int d = 0; d < n; ++d) {
        if (!(base[d] > 0.0)) continue;
        for (int r = 0; r < n; ++r) {
            if (!(q[r] > q[d])) continue;
            const double cost = lower ? e[r] : e[d] + e[r];
            if (std::isfinite(cost)) pairs.push_back({d, r, q[r] - q[d], cost});
        }
    }
    if (pairs.empty()) return;

    std::vector<double> breaks;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].cost > 0.0) breaks.push_back(pairs[i].gain / pairs[i].cost);
        for (std::size_t j = i + 1; j < pairs.size() && pairs[j].donor == pairs[i].donor; ++j) {
            const double dc = pairs[i].cost - pairs[j].cost;
            const double lam = (pairs[i].gain - pairs[j].gain) / dc;
            if (dc != 0.0 && lam > 0.0) breaks.push_back(lam);
        }
    }
    std::sort(breaks.begin(), breaks.end(), std::greater<>());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    // Interval k lies between breaks[k] and breaks[k-1]; spending grows with k.
    const std::size_t n_intervals = breaks.size() + 1;
    auto probe = [&](std::size_t k) {
        if (breaks.empty()) return 1.0;
        if (k == 0) return 2.0 * breaks[0] + 1.0;
        if (k == breaks.size()) return 0.5 * breaks.back();
        return 0.5 * (breaks[k - 1] + breaks[k]);
    };
    // Chosen pair index per donor (-1 keeps the mass) and the resulting spending.
    auto plan = [&](double lambda, std::vector<int>& choice) {
        choice.assign(static_cast<std::size_t>(n), -1);
        std::vector<double> best(static_cast<std::size_t>(n), 0.0);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& p = pairs[i];
            const double score = p.gain - lambda * p.cost;
            if (score > best[p.donor]) {
                best[p.donor] = score;
                choice[p.donor] = static_cast<int>(i);
            }
        }
        double spent = 0.0;
        for (int d = 0; d < n; ++d)
            if (choice[d] >= 0) spent += base[d] * pairs[choice[d]].cost;
        return spent;
    };

    std::vector<int> cheap, rich;
    double rich_spent = plan(probe(n_intervals - 1), rich);
    double theta = 1.0;
    if (rich_spent > budget) {
        // Interval 0 spends only on free pairs, so the crossing lies in (lo, hi].
        std::size_t lo = 0, hi = n_intervals - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            std::vector<int> tmp;
            if (plan(probe(mid), tmp) > budget)
                hi = mid;
            else
                lo = mid;
        }
        const double cheap_spent = plan(probe(lo), cheap);
        rich_spent = plan(probe(hi), rich);
        theta = (budget - cheap_spent) / (rich_spent - cheap_spent);
    } else {
        cheap = rich;
    }

    for (int d = 0; d < n; ++d) {
        const double mass = base[d];
        if (cheap[d] >= 0) {
            const double m = (1.0 - theta) * mass;
            pi[d] -= m;
            pi[pairs[cheap[d]].receiver] += m;
        }
        if (rich[d] >= 0) {
            const double m = theta * mass;
            pi[d] -= m;
            pi[pairs[rich[d]].receiver] += m;
        }
    }
    for (int a = 0; a < n; ++a) pi[a] = std::max(pi[a], 0.0);
}

void check_step_shapes(const QTable& q, const TabularPolicy& baseline, int n_states,
                       int n_actions, const char* who) {
    if (q.n_states != baseline.n_states() || q.n_actions != baseline.n_actions() ||
        n_states != q.n_states || n_actions != q.n_actions)
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace

std::string_view to_string(AlgorithmKind kind) {
    for (const auto& k : kKindNames)
        if (k.kind == kind) return k.name;
    return "Unknown";
}

AlgorithmKind parse_algorithm_kind(std::string_view name) {
    for (const auto& k : kKindNames)
        if (k.name == name) return k.kind;
    throw std::invalid_argument("unknown algorithm kind '" + std::string(name) + "'");
}

bool is_spibb_family(AlgorithmKind kind) {
    switch (kind) {
    case AlgorithmKind::PiB_SPIBB:
    case AlgorithmKind::PiLeqB_SPIBB:
    case AlgorithmKind::ApproxSoftSPIBB:
    case AlgorithmKind::AdvApproxSoftSPIBB:
    case AlgorithmKind::LowerApproxSoftSPIBB:
        return true;
    default:
        return false;
    }
}

void AlgorithmSpec::validate() const {
    switch (kind) {
    case AlgorithmKind::RaMDP:
        require_nonnegative(kappa_adj, "kappa_adj");
        break;
    case AlgorithmKind::RMin:
    case AlgorithmKind::PiB_SPIBB:
    case AlgorithmKind::PiLeqB_SPIBB:
        if (n_wedge < 0) throw std::invalid_argument("AlgorithmSpec: n_wedge must be >= 0");
        break;
    case AlgorithmKind::DUIPI:
        require_nonnegative(xi, "xi");
        break;
    case AlgorithmKind::ApproxSoftSPIBB:
    case AlgorithmKind::AdvApproxSoftSPIBB:
    case AlgorithmKind::LowerApproxSoftSPIBB:
        require_nonnegative(epsilon, "epsilon");
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw std::invalid_argument("AlgorithmSpec: delta must be positive");
        break;
    default:
        break;
    }
}

std::string AlgorithmSpec::params() const {
    using detail::format_number;
    switch (kind) {
    case AlgorithmKind::RaMDP:
        return "kappa_adj=" + format_number(kappa_adj);
    case AlgorithmKind::RMin:
    case AlgorithmKind::PiB_SPIBB:
    case AlgorithmKind::PiLeqB_SPIBB:
        return "n_wedge=" + std::to_string(n_wedge);
    case AlgorithmKind::DUIPI:
        return "xi=" + format_number(xi);
    case AlgorithmKind::ApproxSoftSPIBB:
    case AlgorithmKind::AdvApproxSoftSPIBB:
    case AlgorithmKind::LowerApproxSoftSPIBB:
        return "delta=" + format_number(delta) + ";epsilon=" + format_number(epsilon);
    default:
        return "";
    }
}

std::string AlgorithmSpec::label() const {
    const auto p = params();
    std::string out(to_string(kind));
    if (!p.empty()) out += "(" + p + ")";
    return out;
}

TrainInput::TrainInput(Dataset data, TabularPolicy base, double discount, double reward_bound,
                       std::vector<bool> terminal_flags, int initial, const Mdp* truth)
    : dataset(std::move(data)), baseline(std::move(base)), gamma(discount), r_max(reward_bound),
      terminal(std::move(terminal_flags)), initial_state(initial), true_mdp(truth),
      mle(mle_mdp(dataset, gamma, r_max, terminal, initial_state)),
      counts(visit_counts(dataset)), q_baseline(monte_carlo_q(dataset, gamma)) {
    if (baseline.n_states() != dataset.n_states || baseline.n_actions() != dataset.n_actions)
        throw std::invalid_argument("TrainInput: baseline shape does not match the dataset");
    if (terminal.empty()) terminal = mle.terminal();
}

TabularPolicy basic_rl(const TrainInput& input) { return value_iteration(input.mle).policy; }

std::vector<double> ramdp_rewards(const TrainInput& input, double kappa_adj) {
    const int n_s = input.mle.n_states();
    const int n_a = input.mle.n_actions();
    std::vector<double> out(static_cast<std::size_t>(n_s) * n_a, 0.0);
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) {
            const auto n = input.counts(s, a);
            out[static_cast<std::size_t>(s) * n_a + a] =
                n == 0 ? -input.g_max()
                       : input.mle.reward(s, a) - kappa_adj / std::sqrt(static_cast<double>(n));
        }
    }
    return out;
}

TabularPolicy ramdp(const TrainInput& input, double kappa_adj) {
    auto rewards = ramdp_rewards(input, kappa_adj);
    double bound = input.r_max;
    for (double r : rewards) bound = std::max(bound, std::abs(r));
    const Mdp& m = input.mle;
    const Mdp adjusted(m.n_states(), m.n_actions(), m.transition_data(), std::move(rewards),
                       m.gamma(), m.terminal(), m.initial_state(), bound);
    return value_iteration(adjusted).policy;
}

TabularPolicy r_min(const TrainInput& input, int n_wedge) {
    const detail::SparseKernel kernel(input.mle);
    const int n_s = kernel.n_states;
    const int n_a = kernel.n_actions;
    const double gamma = input.gamma;
    const double floor_value = -input.g_max();

    std::vector<double> v(static_cast<std::size_t>(n_s), 0.0);
    std::vector<double> next(static_cast<std::size_t>(n_s), 0.0);
    QTable q(n_s, n_a);
    auto sweep_q = [&](const std::vector<double>& values) {
        for (int s = 0; s < n_s; ++s) {
            for (int a = 0; a < n_a; ++a) {
                if (kernel.terminal[s])
                    q(s, a) = 0.0;
                else if (input.counts(s, a) < n_wedge)
                    q(s, a) = floor_value;
                else
                    q(s, a) = kernel.reward[kernel.pair(s, a)] + gamma * kernel.expect(s, a, values);
            }
        }
    };
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
        sweep_q(v);
        double change = 0.0;
        for (int s = 0; s < n_s; ++s) {
            const auto row = q.row(s);
            next[s] = *std::max_element(row.begin(), row.end());
            change = std::max(change, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (change < kEvaluationTol) {
            sweep_q(v);
            return greedy_policy(q);
        }
    }
    throw std::runtime_error("r_min: value iteration did not converge");
}

TabularPolicy penalized_greedy(const QTable& q, const QTable& sigma, double xi) {
    QTable scored(q.n_states, q.n_actions);
    for (std::size_t i = 0; i < q.values.size(); ++i)
        scored.values[i] = q.values[i] - xi * sigma.values[i];
    return greedy_policy(scored);
}

DuipiResult duipi_solve(const TrainInput& input, double xi) {
    constexpr int kMaxIterations = 1000;
    constexpr double kTol = 1e-6;

    const detail::SparseKernel kernel(input.mle);
    const int n_s = kernel.n_states;
    const int n_a = kernel.n_actions;
    const double gamma = input.gamma;

    // Diagonal variances of the estimates.
    std::vector<double> var_r(static_cast<std::size_t>(n_s) * n_a, 0.0);
    std::vector<double> var_p(kernel.prob.size(), 0.0);
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) {
            const std::size_t p = kernel.pair(s, a);
            const auto n = static_cast<double>(input.counts(s, a));
            var_r[p] = input.r_max * input.r_max / (4.0 * std::max(n, 1.0));
            for (std::size_t k = kernel.row_start[p]; k < kernel.row_start[p + 1]; ++k)
                var_p[k] = kernel.prob[k] * (1.0 - kernel.prob[k]) / (n + 1.0);
        }
    }

    std::vector<double> v(static_cast<std::size_t>(n_s), 0.0);
    std::vector<double> var_v(static_cast<std::size_t>(n_s), 0.0);
    QTable q(n_s, n_a), var_q(n_s, n_a), sigma(n_s, n_a);
    QTable prev_q(n_s, n_a), prev_sigma(n_s, n_a);
    TabularPolicy policy = input.baseline;
    double min_variance = std::numeric_limits<double>::infinity();
    int iteration = 0;
    for (iteration = 1; iteration <= kMaxIterations; ++iteration) {
        for (int s = 0; s < n_s; ++s) {
            for (int a = 0; a < n_a; ++a) {
                if (kernel.terminal[s]) {
                    q(s, a) = 0.0;
                    var_q(s, a) = 0.0;
                    continue;
                }
                const std::size_t p = kernel.pair(s, a);
                double mean = 0.0, var = var_r[p];
                for (std::size_t k = kernel.row_start[p]; k < kernel.row_start[p + 1]; ++k) {
                    const int nx = kernel.next[k];
                    const double w = kernel.prob[k];
                    mean += w * v[nx];
                    var += gamma * gamma * (w * w * var_v[nx] + v[nx] * v[nx] * var_p[k]);
                }
                q(s, a) = kernel.reward[p] + gamma * mean;
                var_q(s, a) = var;
            }
        }
        for (std::size_t i = 0; i < var_q.values.size(); ++i) {
            min_variance = std::min(min_variance, var_q.values[i]);
            sigma.values[i] = std::sqrt(std::max(var_q.values[i], 0.0));
        }

        TabularPolicy next_policy = penalized_greedy(q, sigma, xi);
        for (int s = 0; s < n_s; ++s) {
            double mean = 0.0, var = 0.0;
            for (int a = 0; a < n_a; ++a) {
                const double w = next_policy(s, a);
                mean += w * q(s, a);
                var += w * w * var_q(s, a);
            }
            v[s] = mean;
            var_v[s] = var;
        }
        const bool stable = iteration > 1 && next_policy == policy &&
                            max_abs_diff(q, prev_q) < kTol && max_abs_diff(sigma, prev_sigma) < kTol;
        policy = std::move(next_policy);
        prev_q = q;
        prev_sigma = sigma;
        if (stable) break;
    }
    return {std::move(policy), std::move(q), std::move(sigma), std::min(iteration, kMaxIterations),
            min_variance};
}

TabularPolicy duipi(const TrainInput& input, double xi) { return duipi_solve(input, xi).policy; }

TabularPolicy spibb_step(const QTable& q, const TabularPolicy& baseline, const VisitCounts& counts,
                         int n_wedge, SpibbVariant variant) {
    check_step_shapes(q, baseline, counts.n_states, counts.n_actions, "spibb_step");
    const int n_s = q.n_states;
    const int n_a = q.n_actions;
    std::vector<double> probs(baseline.data());
    for (int s = 0; s < n_s; ++s) {
        double* row = probs.data() + static_cast<std::size_t>(s) * n_a;
        const auto base = baseline.row(s);
        auto bootstrapped = [&](int a) { return counts(s, a) < n_wedge; };

        bool any_free = false;
        for (int a = 0; a < n_a; ++a) any_free = any_free || !bootstrapped(a);
        if (!any_free) continue;  // keep pi_b(.|s)

        if (variant == SpibbVariant::PiB) {
            int best = -1;
            double kept = 0.0;
            for (int a = 0; a < n_a; ++a) {
                if (bootstrapped(a)) {
                    row[a] = base[a];
                    kept += base[a];
                } else {
                    row[a] = 0.0;
                    if (best < 0 || q(s, a) > q(s, best)) best = a;
                }
            }
            row[best] = std::max(0.0, 1.0 - kept);
        } else {
            // Walk actions by decreasing value: bootstrapped ones keep at most
            // their baseline mass, the first free one takes everything left.
            double remaining = 1.0;
            for (int a : order_by_value(q.row(s), true)) {
                if (bootstrapped(a)) {
                    row[a] = std::min(base[a], remaining);
                    remaining -= row[a];
                } else {
                    row[a] = remaining;
                    remaining = 0.0;
                }
            }
        }
    }
    return {n_s, n_a, std::move(probs)};
}

TabularPolicy spibb(const TrainInput& input, int n_wedge, SpibbVariant variant) {
    const detail::SparseKernel kernel(input.mle);
    TabularPolicy policy = input.baseline;
    for (int it = 0; it < kMaxPolicyIterations; ++it) {
        const QTable q = evaluate_q(kernel, input.gamma, policy);
        TabularPolicy next = spibb_step(q, input.baseline, input.counts, n_wedge, variant);
        const bool stable = next.max_abs_diff(policy) < 1e-12;
        policy = std::move(next);
        if (stable) break;
    }
    return policy;
}

TabularPolicy soft_spibb_step(const QTable& q, const TabularPolicy& baseline, const ErrorTable& e,
                              double epsilon, SoftVariant variant, const QTable* q_baseline) {
    check_step_shapes(q, baseline, e.n_states(), e.n_actions(), "soft_spibb_step");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("soft_spibb_step: epsilon must be >= 0");
    if (variant == SoftVariant::Adv &&
        (q_baseline == nullptr || q_baseline->n_states != q.n_states ||
         q_baseline->n_actions != q.n_actions))
        throw std::invalid_argument("soft_spibb_step: Adv variant needs a baseline Q estimate");

    const int n_s = q.n_states;
    const int n_a = q.n_actions;
    std::vector<double> probs(baseline.data());
    if (epsilon == 0.0) return {n_s, n_a, std::move(probs)};

    if (variant != SoftVariant::Adv) {
        for (int s = 0; s < n_s; ++s)
            exact_transfer(q.row(s), baseline.row(s), e.values.row(s), epsilon,
                           variant == SoftVariant::Lower,
                           probs.data() + static_cast<std::size_t>(s) * n_a);
        return {n_s, n_a, std::move(probs)};
    }

    for (int s = 0; s < n_s; ++s) {
        double* pi = probs.data() + static_cast<std::size_t>(s) * n_a;
        const auto values = q.row(s);
        const auto donors = order_by_value(values, false);
        const auto receivers = order_by_value(values, true);
        double budget = epsilon;
        double advantage = 0.0;

        for (int lo : donors) {
            if (budget <= 0.0) break;
            for (int hi : receivers) {
                if (!(values[hi] > values[lo])) break;
                if (pi[lo] <= 0.0 || budget <= 0.0) break;

                const double rate = variant == SoftVariant::Lower ? e(s, hi) : e(s, lo) + e(s, hi);
                if (std::isinf(rate)) continue;

                double mass = pi[lo];
                bool budget_bound = false;
                if (rate > 0.0 && mass * rate >= budget) {
                    mass = budget / rate;
                    budget_bound = true;
                }
                double gain = 0.0;
                if (variant == SoftVariant::Adv) {
                    gain = (*q_baseline)(s, hi) - (*q_baseline)(s, lo);
                    if (gain < 0.0) {
                        const double cap = advantage / -gain;
                        if (cap < mass) {
                            mass = cap;
                            budget_bound = false;
                        }
                    }
                }
                if (!(mass > 0.0)) continue;

                if (mass >= pi[lo]) {
                    mass = pi[lo];
                    pi[lo] = 0.0;
                } else {
                    pi[lo] -= mass;
                }
                pi[hi] += mass;
                budget = budget_bound ? 0.0 : std::max(0.0, budget - mass * rate);
                if (variant == SoftVariant::Adv) advantage = std::max(0.0, advantage + mass * gain);
            }
        }
    }
    return {n_s, n_a, std::move(probs)};
}

TabularPolicy soft_spibb(const TrainInput& input, double epsilon, double delta,
                         SoftVariant variant) {
    const ErrorTable e = error_function_q(input.counts, delta);
    const detail::SparseKernel kernel(input.mle);
    TabularPolicy policy = input.baseline;
    QTable previous;
    for (int it = 0; it < kMaxPolicyIterations; ++it) {
        QTable q = evaluate_q(kernel, input.gamma, policy);
        if (it > 0 && max_abs_diff(q, previous) < kPolicyIterationTol) break;
        policy = soft_spibb_step(q, input.baseline, e, epsilon, variant, &input.q_baseline.q);
        previous = std::move(q);
    }
    return policy;
}

ConstraintCheck verify_constrained(const TabularPolicy& policy, const TabularPolicy& baseline,
                                   const ErrorTable& e, double epsilon, ConstraintKind kind,
                                   double tol) {
    if (policy.n_states() != baseline.n_states() || policy.n_actions() != baseline.n_actions() ||
        policy.n_states() != e.n_states() || policy.n_actions() != e.n_actions())
        throw std::invalid_argument("verify_constrained: shape mismatch");
    ConstraintCheck out;
    out.max_slack = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < policy.n_states(); ++s) {
        double weighted = 0.0;
        for (int a = 0; a < policy.n_actions(); ++a) {
            const double diff = policy(s, a) - baseline(s, a);
            const double charged = kind == ConstraintKind::Symmetric ? std::abs(diff)
                                                                     : std::max(0.0, diff);
            if (std::isinf(e(s, a))) {
                if (charged > 0.0) weighted = std::numeric_limits<double>::infinity();
                continue;
            }
            weighted += e(s, a) * charged;
        }
        out.max_slack = std::max(out.max_slack, weighted - epsilon);
    }
    out.ok = out.max_slack <= tol;
    return out;
}

double advantage_margin(const TabularPolicy& policy, const TabularPolicy& baseline,
                        const QTable& q) {
    double margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < policy.n_states(); ++s) {
        double acc = 0.0;
        for (int a = 0; a < policy.n_actions(); ++a) acc += q(s, a) * (policy(s, a) - baseline(s, a));
        margin = std::min(margin, acc);
    }
    return margin;
}

TabularPolicy train(const AlgorithmSpec& spec, const TrainInput& input) {
    spec.validate();
    switch (spec.kind) {
    case AlgorithmKind::BasicRL:
        return basic_rl(input);
    case AlgorithmKind::RaMDP:
        return ramdp(input, spec.kappa_adj);
    case AlgorithmKind::RMin:
        return r_min(input, spec.n_wedge);
    case AlgorithmKind::DUIPI:
        return duipi(input, spec.xi);
    case AlgorithmKind::PiB_SPIBB:
        return spibb(input, spec.n_wedge, SpibbVariant::PiB);
    case AlgorithmKind::PiLeqB_SPIBB:
        return spibb(input, spec.n_wedge, SpibbVariant::PiLeqB);
    case AlgorithmKind::ApproxSoftSPIBB:
        return soft_spibb(input, spec.epsilon, spec.delta, SoftVariant::Approx);
    case AlgorithmKind::AdvApproxSoftSPIBB:
        return soft_spibb(input, spec.epsilon, spec.delta, SoftVariant::Adv);
    case AlgorithmKind::LowerApproxSoftSPIBB:
        return soft_spibb(input, spec.epsilon, spec.delta, SoftVariant::Lower);
    case AlgorithmKind::Baseline:
        return input.baseline;
    case AlgorithmKind::Optimal:
        if (input.true_mdp == nullptr)
            throw std::invalid_argument("train: Optimal reference needs the true MDP");
        return value_iteration(*input.true_mdp).policy;
    }
    throw std::invalid_argument("train: unknown algorithm kind");
}

}  // namespace spibb
