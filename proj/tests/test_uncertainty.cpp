#include "fixtures.hpp"

#include "spibb/uncertainty.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace spibb;

namespace {

VisitCounts counts_of(int n_s, int n_a, std::int64_t n) {
    VisitCounts c(n_s, n_a);
    for (auto& x : c.counts) x = n;
    return c;
}

}  // namespace

TEST_CASE("visit_counts") {
    Dataset d{4, 2, {}};
    CHECK(visit_counts(d).total() == 0);
    d.trajectories.push_back({{{0, 0, 0.0, 1}, {1, 1, 0.0, 2}, {2, 0, 0.0, 3}}});
    auto c = visit_counts(d);
    CHECK(c(0, 0) == 1);
    CHECK(c(1, 1) == 1);
    CHECK(c(2, 0) == 1);
    CHECK(c.total() == 3);
    for (int i = 0; i < 4; ++i) d.trajectories.push_back({{{0, 0, 0.0, 1}}});
    CHECK(visit_counts(d)(0, 0) == 5);
    // arrivals into a terminal state count for each of its absorbing pairs
    const auto t = visit_counts(d, {false, false, false, true}, true);
    CHECK(t(3, 0) == 1);
    CHECK(t(3, 1) == 1);
}

TEST_CASE("error_function_q") {
    const auto c = counts_of(50, 4, 8);
    CHECK(std::abs(error_function_q(c, 1.0)(0, 0) - 1.2238734153404083) < 1e-12);
    CHECK(std::abs(error_function_q(c, 1.0)(0, 0) - std::sqrt(0.25 * std::log(400.0))) < 1e-15);
    CHECK(error_function_q(c, 2.0 * 50 * 4)(3, 2) == 0.0);
    VisitCounts z(2, 2);
    z(0, 0) = 3;
    const auto e = error_function_q(z, 0.5);
    CHECK(std::isinf(e(1, 1)));
    CHECK(std::isfinite(e(0, 0)));
    CHECK(e.kind == ErrorKind::QError);
    CHECK_THROWS_AS(error_function_q(z, 0.0), std::invalid_argument);
}

TEST_CASE("error_function_p") {
    const auto c = counts_of(50, 4, 8);
    CHECK(std::abs(error_function_p(c, 1.0)(0, 0) - 1.4802071873007984) < 1e-12);
    CHECK(error_function_p(c, 2.0 * 50 * 4 * 16)(1, 1) == 0.0);
    CHECK_THROWS_AS(error_function_p(c, -1.0), std::invalid_argument);
}

TEST_CASE("error tables are antitone in counts and delta; e_P >= e_Q") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> n(0, 40);
    VisitCounts c(6, 3);
    for (auto& x : c.counts) x = n(rng);
    for (double delta : {0.05, 0.5, 1.0}) {
        const auto q = error_function_q(c, delta);
        const auto p = error_function_p(c, delta);
        const auto q_loose = error_function_q(c, 2 * delta);
        for (std::size_t i = 0; i < c.counts.size(); ++i) {
            CHECK(p.values.values[i] >= q.values.values[i]);
            CHECK(q_loose.values.values[i] <= q.values.values[i]);
            CHECK(std::isinf(q.values.values[i]) == (c.counts[i] == 0));
        }
        for (std::int64_t k = 1; k < 30; ++k) {
            const auto a = error_function_q(counts_of(6, 3, k), delta)(0, 0);
            const auto b = error_function_q(counts_of(6, 3, k + 1), delta)(0, 0);
            CHECK(b < a);
        }
    }
}

TEST_CASE("theorem1_bound") {
    CHECK(theorem1_bound(0.0, 0.95, 1.0) == 0.0);
    CHECK(theorem1_bound(0.1, 0.95, 1.0) == doctest::Approx(2.0));
    CHECK(theorem1_bound(1.0, 0.95, 4.0) == doctest::Approx(80.0));
    CHECK_THROWS_AS(theorem1_bound(0.1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("assumption1_min_kappa") {
    SUBCASE("self-loop with uniform counts") {
        const Mdp m = fixture::self_loop();
        const auto rep = assumption1_min_kappa(m, TabularPolicy::uniform(1, 1),
                                               error_function_p(counts_of(1, 1, 7), 0.1));
        CHECK(rep.ratios(0, 0) == doctest::Approx(1.0));
        CHECK(rep.max_ratio == doctest::Approx(1.0));
        CHECK(rep.feasible(0.95));
    }
    SUBCASE("counterexample n = 2") {
        const auto ce = counterexample_mdp(2);
        const auto rep = assumption1_min_kappa(ce.mdp, ce.baseline, error_function_p(ce.counts, 0.1));
        CHECK(std::abs(rep.ratios(0, 0) - std::sqrt(2.0)) < 1e-12);
        CHECK_FALSE(rep.feasible(0.95));
        CHECK_FALSE(rep.feasible(0.71));
        CHECK(rep.feasible(0.70));
    }
    SUBCASE("terminal successors use the absorbing pair's error") {
        // s0 -> terminal s1; counts N(0)=4, N(1)=1 give e(1)/e(0) = 2
        const Mdp m = fixture::one_step({0.5});
        VisitCounts c(2, 1);
        c(0, 0) = 4;
        c(1, 0) = 1;
        const auto rep = assumption1_min_kappa(m, TabularPolicy::uniform(2, 1), error_function_p(c, 0.1));
        CHECK(rep.ratios(0, 0) == doctest::Approx(2.0));
    }
    SUBCASE("unvisited pairs are skipped; zero own error gives infinity") {
        const Mdp m = fixture::one_step({0.5, 0.5});
        VisitCounts c(2, 2);
        c(0, 0) = 3;
        c(1, 0) = c(1, 1) = 1;
        const auto rep = assumption1_min_kappa(m, TabularPolicy::uniform(2, 2), error_function_p(c, 0.1));
        CHECK(std::isnan(rep.ratios(0, 1)));
        CHECK(rep.skipped.size() == 1);

        VisitCounts big(2, 2);
        for (auto& x : big.counts) x = 2;
        const double zero_delta = 2.0 * 2 * 2 * 4;  // log term 0 at every pair
        const auto zero = assumption1_min_kappa(m, TabularPolicy::uniform(2, 2),
                                                error_function_p(big, zero_delta));
        CHECK(zero.max_ratio == 0.0);
    }
}

TEST_CASE("counterexample_mdp") {
    const auto two = counterexample_mdp(2);
    CHECK(two.mdp.n_states() == 3);
    CHECK(two.mdp.transition(0, 0, 1) == 0.5);
    CHECK(two.mdp.transition(0, 0, 2) == 0.5);
    const auto four = counterexample_mdp(4);
    for (int i = 1; i <= 4; ++i) {
        CHECK(four.mdp.transition(0, 0, i) == 0.25);
        CHECK(four.mdp.is_terminal(i));
    }
    CHECK(four.counts(0, 0) == 4);
    CHECK_THROWS_AS(counterexample_mdp(1), std::invalid_argument);
    // smallest n with sqrt(n) > 1/gamma at gamma = 0.95
    int n = 1;
    while (!(std::sqrt(static_cast<double>(n)) > 1.0 / 0.95)) ++n;
    CHECK(n == 2);
}

TEST_CASE("counterexample ratio is at least sqrt(n) for unbalanced counts") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> draw(1, 20);
    for (int n = 2; n <= 8; ++n) {
        auto ce = counterexample_mdp(n);
        std::int64_t total = 0;
        for (int i = 1; i <= n; ++i) total += (ce.counts(i, 0) = draw(rng));
        ce.counts(0, 0) = total;
        const auto rep = assumption1_min_kappa(ce.mdp, ce.baseline, error_function_p(ce.counts, 0.1));
        CHECK(rep.ratios(0, 0) >= std::sqrt(static_cast<double>(n)) - 1e-12);
        // Jensen step: mean of 1/sqrt(N_i) >= sqrt(n)/sqrt(N)
        double lhs = 0.0;
        for (int i = 1; i <= n; ++i) lhs += 1.0 / std::sqrt(static_cast<double>(ce.counts(i, 0)));
        CHECK(lhs / n >= std::sqrt(static_cast<double>(n) / static_cast<double>(total)) - 1e-12);
    }
}
