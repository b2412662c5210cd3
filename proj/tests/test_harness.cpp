#include "spibb/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <stdexcept>

using namespace spibb;

namespace {

AlgorithmSpec soft(AlgorithmKind kind, double epsilon, double delta = 1.0) {
    AlgorithmSpec s{kind};
    s.epsilon = epsilon;
    s.delta = delta;
    return s;
}

ExperimentConfig small_random(int trials, std::vector<AlgorithmSpec> algorithms) {
    ExperimentConfig c;
    c.benchmark = Benchmark::RandomMdps;
    c.random_mdp.n_states = 15;
    c.data_sizes = {5, 20};
    c.n_trials = trials;
    c.base_seed = 42;
    c.algorithms = std::move(algorithms);
    return c;
}

TrialResult record(const std::string& params_kind, int size, double rho_bar, int trial = 0) {
    TrialResult r;
    r.trial = trial;
    r.algorithm = AlgorithmSpec{parse_algorithm_kind(params_kind)};
    r.data_size = size;
    r.rho_bar = rho_bar;
    return r;
}

SummaryRow row(const std::string& label, int size, double mean, double cv) {
    return {label, size, mean, cv, 10, 0};
}

}  // namespace

TEST_CASE("normalize") {
    CHECK(normalize(0.3, 0.3, 0.8) == 0.0);
    CHECK(normalize(0.8, 0.3, 0.8) == 1.0);
    CHECK(normalize(0.55, 0.3, 0.8) == doctest::Approx(0.5));
    CHECK(normalize(0.1, 0.3, 0.8) == doctest::Approx(-0.4));
    CHECK_THROWS_AS(normalize(0.5, 0.8, 0.8), std::domain_error);
    CHECK_THROWS_AS(normalize(0.5, 0.9, 0.8), std::domain_error);
}

TEST_CASE("cvar") {
    std::vector<double> v(200);
    std::iota(v.begin(), v.end(), 0.0);
    CHECK(cvar(v, 0.01) == 0.5);
    CHECK(cvar(v, 1.0) == doctest::Approx(99.5));
    CHECK(cvar({3.0, 3.0, 3.0}, 0.01) == 3.0);
    CHECK(cvar({5.0, -1.0, 2.0}, 0.01) == -1.0);  // ceil(0.03) = 1 value
    std::vector<double> hundred(100);
    std::iota(hundred.begin(), hundred.end(), 0.0);
    CHECK(cvar(hundred, 0.01) == 0.0);
    CHECK(cvar(hundred, 0.05) == doctest::Approx(2.0));
    CHECK_THROWS_AS(cvar({}, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(cvar({1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cvar({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("summarize groups by algorithm and size") {
    SUBCASE("one group") {
        const auto s = summarize({record("BasicRL", 10, 1.0), record("BasicRL", 10, 3.0)});
        REQUIRE(s.size() == 1);
        CHECK(s[0].algorithm == "BasicRL");
        CHECK(s[0].mean == 2.0);
        CHECK(s[0].cvar_1pct == 1.0);
        CHECK(s[0].n == 2);
    }
    SUBCASE("two sizes and two algorithms in first-seen order") {
        const auto s = summarize({record("RaMDP", 20, 0.5), record("BasicRL", 10, 0.1),
                                  record("RaMDP", 10, 0.2), record("BasicRL", 10, 0.3),
                                  record("RaMDP", 20, -0.5)});
        REQUIRE(s.size() == 3);
        CHECK(s[0].algorithm == "RaMDP(kappa_adj=0)");
        CHECK(s[0].data_size == 20);
        CHECK(s[0].mean == 0.0);
        CHECK(s[0].cvar_1pct == -0.5);
        CHECK(s[1].algorithm == "BasicRL");
        CHECK(s[1].n == 2);
        CHECK(s[2].data_size == 10);
        CHECK(s[2].n == 1);
    }
    SUBCASE("failed records are counted, not averaged") {
        auto bad = record("BasicRL", 10, std::numeric_limits<double>::quiet_NaN());
        bad.error = "diverged";
        const auto s = summarize({record("BasicRL", 10, 0.4), bad});
        REQUIRE(s.size() == 1);
        CHECK(s[0].n == 1);
        CHECK(s[0].n_failed == 1);
        CHECK(s[0].mean == 0.4);
        const auto only_bad = summarize({bad});
        CHECK(std::isnan(only_bad[0].mean));
    }
}

TEST_CASE("reference hyper-parameter settings") {
    const auto approx = table1_spec(Benchmark::RandomMdps, AlgorithmKind::ApproxSoftSPIBB);
    CHECK(approx.delta == 1.0);
    CHECK(approx.epsilon == 2.0);
    CHECK(table1_spec(Benchmark::WetChicken, AlgorithmKind::ApproxSoftSPIBB).epsilon == 1.0);
    CHECK(table1_spec(Benchmark::RandomMdps, AlgorithmKind::AdvApproxSoftSPIBB).epsilon == 2.0);
    CHECK(table1_spec(Benchmark::WetChicken, AlgorithmKind::AdvApproxSoftSPIBB).epsilon == 1.0);
    CHECK(table1_spec(Benchmark::RandomMdps, AlgorithmKind::LowerApproxSoftSPIBB).epsilon == 1.0);
    CHECK(table1_spec(Benchmark::WetChicken, AlgorithmKind::LowerApproxSoftSPIBB).epsilon == 0.5);
    CHECK(table1_spec(Benchmark::RandomMdps, AlgorithmKind::RaMDP).kappa_adj == 0.05);
    CHECK(table1_spec(Benchmark::WetChicken, AlgorithmKind::RaMDP).kappa_adj == 2.0);
    CHECK(table1_spec(Benchmark::RandomMdps, AlgorithmKind::RMin).n_wedge == 3);
    CHECK(table1_spec(Benchmark::WetChicken, AlgorithmKind::RMin).n_wedge == 3);
    CHECK(table1_spec(Benchmark::RandomMdps, AlgorithmKind::DUIPI).xi == 0.1);
    CHECK(table1_spec(Benchmark::WetChicken, AlgorithmKind::DUIPI).xi == 0.5);
    CHECK(table1_spec(Benchmark::RandomMdps, AlgorithmKind::PiB_SPIBB).n_wedge == 10);
    CHECK(table1_spec(Benchmark::WetChicken, AlgorithmKind::PiLeqB_SPIBB).n_wedge == 7);
    CHECK(table1_algorithms(Benchmark::RandomMdps).size() == 9);
    for (auto b : {Benchmark::RandomMdps, Benchmark::WetChicken}) {
        for (const auto& spec : table1_algorithms(b)) {
            const auto grid = default_grid(b, spec.kind);
            CHECK(std::find(grid.begin(), grid.end(), spec) != grid.end());
        }
    }
}

TEST_CASE("select_best") {
    const AlgorithmSpec only{AlgorithmKind::RaMDP, 1.0};
    SUBCASE("a grid of one point returns it") {
        const auto r = select_best({only}, {row(only.label(), 10, 0.1, -0.3)}, 10);
        CHECK(r.best.at(AlgorithmKind::RaMDP).best == only);
        CHECK(r.best.at(AlgorithmKind::RaMDP).cvar_smallest == -0.3);
    }
    SUBCASE("dominated points lose; ties go to the mean, then to the first listed") {
        const AlgorithmSpec a{AlgorithmKind::RaMDP, 1.0}, b{AlgorithmKind::RaMDP, 2.0},
            c{AlgorithmKind::RaMDP, 3.0};
        const std::vector<SummaryRow> table{
            row(a.label(), 10, 0.5, -0.9), row(a.label(), 50, 0.9, 0.2),  // best mean, worst tail
            row(b.label(), 10, 0.1, -0.1), row(b.label(), 50, 0.3, 0.0),
            row(c.label(), 10, 0.2, -0.1), row(c.label(), 50, 0.4, 0.0)};
        const auto r = select_best({a, b, c}, table, 10);
        CHECK(r.best.at(AlgorithmKind::RaMDP).best == c);
        CHECK(r.best.at(AlgorithmKind::RaMDP).mean_all == doctest::Approx(0.3));
        const auto twins = select_best({b, c}, {row(b.label(), 10, 0.1, -0.1),
                                                row(c.label(), 10, 0.1, -0.1)}, 10);
        CHECK(twins.best.at(AlgorithmKind::RaMDP).best == b);
    }
    SUBCASE("kinds are chosen independently") {
        const AlgorithmSpec r1{AlgorithmKind::RaMDP, 1.0};
        AlgorithmSpec d1{AlgorithmKind::DUIPI};
        d1.xi = 0.5;
        const auto r = select_best({r1, d1}, {row(r1.label(), 10, 0, -5), row(d1.label(), 10, 0, 1)}, 10);
        CHECK(r.best.size() == 2);
        CHECK(r.best.at(AlgorithmKind::RaMDP).best == r1);
    }
}

TEST_CASE("grid_search runs every point") {
    auto c = small_random(3, {});
    c.data_sizes = {5};
    const std::map<AlgorithmKind, std::vector<AlgorithmSpec>> grids{
        {AlgorithmKind::PiB_SPIBB, default_grid(Benchmark::RandomMdps, AlgorithmKind::PiB_SPIBB)}};
    const auto r = grid_search(c, grids);
    CHECK(r.table.size() == 7);
    CHECK(r.best.count(AlgorithmKind::PiB_SPIBB) == 1);
    const std::map<AlgorithmKind, std::vector<AlgorithmSpec>> wrong{
        {AlgorithmKind::RaMDP, {AlgorithmSpec{AlgorithmKind::DUIPI}}}};
    CHECK_THROWS_AS(grid_search(c, wrong), std::invalid_argument);
    CHECK_THROWS_AS(grid_search(c, {{AlgorithmKind::RaMDP, {}}}), std::invalid_argument);
}

TEST_CASE("run_trial endpoints and determinism") {
    const auto c = small_random(1, {soft(AlgorithmKind::ApproxSoftSPIBB, 0.0),
                                    AlgorithmSpec{AlgorithmKind::Baseline},
                                    AlgorithmSpec{AlgorithmKind::Optimal},
                                    table1_spec(Benchmark::RandomMdps, AlgorithmKind::DUIPI)});
    const auto a = run_trial(c, 7);
    REQUIRE(a.size() == 8);
    for (const auto& r : a) {
        CHECK(r.ok());
        CHECK(r.trial == 7);
        CHECK(r.seed == trial_seed(42, 7));
        CHECK(r.rho_star > r.rho_b);
        CHECK(r.rho_bar <= 1.0 + 1e-9);
    }
    CHECK(a[0].data_size == 5);
    CHECK(a[4].data_size == 20);
    CHECK(a[0].rho_bar == 0.0);
    CHECK(a[1].rho_bar == 0.0);
    CHECK(a[2].rho_bar == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(run_trial(c, 7) == a);
    CHECK_FALSE(run_trial(c, 8) == a);
}

TEST_CASE("run_experiment does not depend on the worker count") {
    const auto c = small_random(6, table1_algorithms(Benchmark::RandomMdps));
    const auto one = run_experiment(c, 1);
    CHECK(one.size() == 6 * 2 * 9);
    CHECK(run_experiment(c, 3) == one);
    CHECK(results_to_csv(run_experiment(c, 4)) == results_to_csv(one));
    for (int t = 0; t < 6; ++t) {
        const auto single = run_trial(c, t);
        CHECK(std::equal(single.begin(), single.end(), one.begin() + t * 18));
    }
    for (const auto& s : summarize(one)) CHECK(s.cvar_1pct <= s.mean + 1e-12);
}

TEST_CASE("Wet Chicken trials") {
    ExperimentConfig c;
    c.benchmark = Benchmark::WetChicken;
    c.data_sizes = {50, 200};
    c.n_trials = 2;
    c.algorithms = {AlgorithmSpec{AlgorithmKind::Baseline}, AlgorithmSpec{AlgorithmKind::BasicRL}};
    const auto r = run_experiment(c);
    REQUIRE(r.size() == 8);
    CHECK(r[0].rho_bar == 0.0);
    CHECK(r[0].rho_b == r[4].rho_b);
    CHECK(r[0].instance == 0);
    for (const auto& x : r) CHECK(x.rho_star > x.rho_b);
}

TEST_CASE("SPIBB-family fallback at the smallest size") {
    auto c = small_random(150, {table1_spec(Benchmark::RandomMdps, AlgorithmKind::PiB_SPIBB),
                                table1_spec(Benchmark::RandomMdps, AlgorithmKind::PiLeqB_SPIBB),
                                table1_spec(Benchmark::RandomMdps, AlgorithmKind::AdvApproxSoftSPIBB)});
    c.random_mdp = {};
    c.data_sizes = {10};
    const auto results = run_experiment(c);
    const auto s = summarize(results);
    CHECK(s[0].cvar_1pct >= -0.2);
    CHECK(s[1].cvar_1pct >= -0.2);
    const double eps = c.algorithms[2].epsilon;
    for (const auto& r : results) {
        if (r.algorithm.kind != AlgorithmKind::AdvApproxSoftSPIBB) continue;
        const double g_max = 1.0 / (1.0 - 0.95);
        CHECK(r.rho - r.rho_b >= -theorem1_bound(eps, 0.95, g_max));
    }
}

TEST_CASE("validation") {
    auto c = small_random(1, {AlgorithmSpec{}});
    c.data_sizes = {10, 10};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.data_sizes = {};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_random(0, {AlgorithmSpec{}});
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    CHECK(parse_benchmark("wet_chicken") == Benchmark::WetChicken);
    CHECK(to_string(Benchmark::RandomMdps) == "random_mdps");
    CHECK_THROWS_AS(parse_benchmark("cartpole"), std::invalid_argument);
}

TEST_CASE("CSV round trips") {
    SUBCASE("results") {
        const auto c = small_random(2, {soft(AlgorithmKind::LowerApproxSoftSPIBB, 1.0, 0.5),
                                        AlgorithmSpec{AlgorithmKind::RMin, 0.0, 3}});
        const auto results = run_experiment(c);
        const auto text = results_to_csv(results);
        CHECK(text.rfind("trial,seed,benchmark,algorithm,params,size,rho,rho_b,rho_star,rho_bar,seconds", 0) == 0);
        CHECK(results_from_csv(text) == results);
        CHECK(results_to_csv(results_from_csv(text)) == text);
    }
    SUBCASE("failed record with NaN") {
        auto bad = record("DUIPI", 10, std::numeric_limits<double>::quiet_NaN(), 3);
        bad.rho = bad.rho_bar;
        bad.error = "no convergence, ever";
        const auto back = results_from_csv(results_to_csv({bad}));
        REQUIRE(back.size() == 1);
        CHECK(std::isnan(back[0].rho_bar));
        CHECK_FALSE(back[0].ok());
        CHECK(back[0].trial == 3);
    }
    SUBCASE("summary") {
        const std::vector<SummaryRow> s{row("BasicRL", 10, 0.1, -0.25), row("RaMDP(kappa_adj=2)", 20, 1.0 / 3.0, -2.0)};
        const auto text = summary_to_csv(s);
        CHECK(text.rfind("algorithm,size,mean,cvar_1pct,n", 0) == 0);
        CHECK(summary_from_csv(text) == s);
    }
    CHECK_THROWS(results_from_csv("nonsense\n1,2\n"));
}

TEST_CASE("export_results") {
    const auto dir = std::filesystem::temp_directory_path() / "spibb_test_export";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto c = small_random(1, {AlgorithmSpec{}});
    const auto results = run_experiment(c);
    const auto summary = summarize(results);

    const auto [rp, sp] = export_results(results, summary, dir);
    CHECK(rp.filename() == "results.csv");
    CHECK(sp.filename() == "summary.csv");
    std::ifstream in(rp);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text == results_to_csv(results));

    auto with_nan = summary;
    with_nan[0].mean = std::numeric_limits<double>::quiet_NaN();
    const auto [rj, sj] = export_results(results, with_nan, dir, ExportFormat::Json);
    CHECK(rj.filename() == "results.json");
    std::ifstream js(sj);
    const auto parsed = nlohmann::json::parse(js);
    CHECK(parsed.at(0).at("mean").is_null());

    const auto missing = export_results(results, summary, dir / "missing" / "deeper");
    CHECK(std::filesystem::exists(missing.first));
    std::ofstream(dir / "blocker") << "x";
    CHECK_THROWS_AS(export_results(results, summary, dir / "blocker" / "sub"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("assumption1_sweep") {
    RandomMdpConfig base;
    base.n_states = 10;
    const auto sweep = assumption1_sweep({0.1, 0.95}, 3, 50, 0.1, 9, base);
    REQUIRE(sweep.feasible.size() == 2);
    CHECK(sweep.best_max_ratio[0] > 0.0);
    // a larger gamma never makes the condition easier
    CHECK((!sweep.feasible[1] || sweep.feasible[0]));
    CHECK(assumption1_sweep({0.1, 0.95}, 3, 50, 0.1, 9, base).best_max_ratio == sweep.best_max_ratio);
}
