#include "spibb/uncertainty.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spibb {

std::int64_t VisitCounts::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

VisitCounts visit_counts(const Dataset& dataset, const std::vector<bool>& terminal,
                         bool count_terminal_arrivals) {
    VisitCounts out(dataset.n_states, dataset.n_actions);
    for (const auto& traj : dataset.trajectories) {
        for (const auto& st : traj.steps) {
            ++out(st.state, st.action);
            if (count_terminal_arrivals && !terminal.empty() &&
                terminal[static_cast<std::size_t>(st.next_state)]) {
                for (int a = 0; a < dataset.n_actions; ++a) ++out(st.next_state, a);
            }
        }
    }
    return out;
}

namespace {

ErrorTable hoeffding_table(const VisitCounts& counts, double delta, double log_numerator,
                           ErrorKind kind) {
    if (!(delta > 0.0)) throw std::invalid_argument("error function: delta must be positive");
    const double log_term = std::log(log_numerator / delta);
    ErrorTable out{ActionTable(counts.n_states, counts.n_actions), kind, delta};
    for (std::size_t i = 0; i < counts.counts.size(); ++i) {
        const auto n = counts.counts[i];
        out.values.values[i] =
            n == 0 ? kInfiniteError : std::sqrt(2.0 / static_cast<double>(n) * log_term);
    }
    return out;
}

}  // namespace

ErrorTable error_function_q(const VisitCounts& counts, double delta) {
    const double sa = static_cast<double>(counts.n_states) * counts.n_actions;
    return hoeffding_table(counts, delta, 2.0 * sa, ErrorKind::QError);
}

ErrorTable error_function_p(const VisitCounts& counts, double delta) {
    const double sa = static_cast<double>(counts.n_states) * counts.n_actions;
    return hoeffding_table(counts, delta, 2.0 * sa * std::exp2(counts.n_actions),
                           ErrorKind::PError);
}

double theorem1_bound(double epsilon, double gamma, double g_max) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("theorem1_bound: epsilon must be >= 0");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("theorem1_bound: gamma must lie in [0, 1)");
    if (!(g_max >= 0.0)) throw std::invalid_argument("theorem1_bound: g_max must be >= 0");
    return epsilon * g_max / (1.0 - gamma);
}

KappaReport assumption1_min_kappa(const Mdp& mdp, const TabularPolicy& baseline,
                                  const ErrorTable& e_p) {
    const int n_s = mdp.n_states();
    const int n_a = mdp.n_actions();
    if (baseline.n_states() != n_s || baseline.n_actions() != n_a || e_p.n_states() != n_s ||
        e_p.n_actions() != n_a)
        throw std::invalid_argument("assumption1_min_kappa: shape mismatch");

    // Expected next-pair error under pi_b for every successor state.
    std::vector<double> next_error(static_cast<std::size_t>(n_s), 0.0);
    for (int s = 0; s < n_s; ++s) {
        double acc = 0.0;
        for (int a = 0; a < n_a; ++a) {
            const double w = baseline(s, a);
            if (w > 0.0) acc += w * e_p(s, a);
        }
        next_error[s] = acc;
    }

    KappaReport report;
    report.ratios = ActionTable(n_s, n_a, std::numeric_limits<double>::quiet_NaN());
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) {
            const double own = e_p(s, a);
            if (std::isinf(own)) {
                report.skipped.emplace_back(s, a);
                continue;
            }
            double lhs = 0.0;
            if (mdp.is_terminal(s)) {
                lhs = next_error[s];
            } else {
                const auto row = mdp.transition_row(s, a);
                for (int n = 0; n < n_s; ++n)
                    if (row[n] > 0.0) lhs += row[n] * next_error[n];
            }
            double ratio;
            if (own > 0.0)
                ratio = lhs / own;
            else
                ratio = lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            report.ratios(s, a) = ratio;
            if (report.max_state < 0 || ratio > report.max_ratio) {
                report.max_ratio = ratio;
                report.max_state = s;
                report.max_action = a;
            }
        }
    }
    return report;
}

Counterexample counterexample_mdp(int n, double gamma) {
    if (n < 2) throw std::invalid_argument("counterexample_mdp: n must be >= 2");
    const int n_s = n + 1;
    std::vector<double> transition(static_cast<std::size_t>(n_s) * n_s, 0.0);
    for (int i = 1; i <= n; ++i) {
        transition[static_cast<std::size_t>(i)] = 1.0 / n;
        transition[static_cast<std::size_t>(i) * n_s + i] = 1.0;
    }
    std::vector<bool> terminal(static_cast<std::size_t>(n_s), true);
    terminal[0] = false;
    Mdp mdp(n_s, 1, std::move(transition), std::vector<double>(static_cast<std::size_t>(n_s), 0.0),
            gamma, std::move(terminal), 0, 0.0);

    VisitCounts counts(n_s, 1);
    counts(0, 0) = n;
    for (int i = 1; i <= n; ++i) counts(i, 0) = 1;
    return {std::move(mdp), TabularPolicy::uniform(n_s, 1), std::move(counts)};
}

}  // namespace spibb
