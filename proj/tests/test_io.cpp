#include "fixtures.hpp"

#include "spibb/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace spibb;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "spibb_test_io";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("model round trip") {
    SUBCASE("plain reward table with a baseline") {
        const Mdp m = fixture::random_mdp(5, 3, 4);
        std::mt19937_64 rng(1);
        const auto pi = fixture::random_policy(5, 3, rng);
        const auto back = model_from_json(model_to_json(m, &pi));
        CHECK(back.mdp.transition_data() == m.transition_data());
        CHECK(back.mdp.reward_data() == m.reward_data());
        CHECK(back.mdp.terminal() == m.terminal());
        CHECK(back.mdp.gamma() == m.gamma());
        CHECK_FALSE(back.mdp.has_entry_rewards());
        REQUIRE(back.baseline.has_value());
        CHECK(*back.baseline == pi);
    }
    SUBCASE("entry rewards survive a file round trip") {
        const Mdp m = wet_chicken_mdp();
        const auto path = scratch("wet.json");
        save_model(path, m);
        const auto back = load_model(path);
        CHECK(back.mdp.has_entry_rewards());
        CHECK(back.mdp.entry_reward_data() == m.entry_reward_data());
        CHECK(back.mdp.transition_data() == m.transition_data());
        CHECK_FALSE(back.baseline.has_value());
        CHECK(back.mdp.r_max() == 4.0);
    }
    SUBCASE("entry rewards alone define the reward table") {
        json j = model_to_json(wet_chicken_mdp());
        j.erase("reward");
        const auto back = model_from_json(j);
        CHECK(back.mdp.reward(0, 2) == doctest::Approx(1.0 / 7.0));
    }
}

TEST_CASE("model errors") {
    const json good = model_to_json(fixture::one_step({0.5, 1.0}));
    auto broken = [&](auto&& edit) {
        json j = good;
        edit(j);
        return j;
    };
    CHECK_NOTHROW(model_from_json(good));
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j["colour"] = 1; })), ConfigError);
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j.erase("transition"); })), ConfigError);
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j["gamma"] = "high"; })), ConfigError);
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j["gamma"] = 1.0; })), ConfigError);
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j["transition"][0][0][1] = 0.7; })), ConfigError);
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j["terminal"] = {7}; })), ConfigError);
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j["baseline"] = {{1.0, 0.0}}; })), ConfigError);
    CHECK_THROWS_AS(model_from_json(broken([](json& j) { j["baseline"] = {{0.9, 0.0}, {0.5, 0.5}}; })),
                    ConfigError);
    json wet = model_to_json(wet_chicken_mdp());
    wet["reward"][0][2] = 3.0;
    CHECK_THROWS_AS(model_from_json(wet), ConfigError);
    CHECK_THROWS_AS(load_model(scratch("does_not_exist.json")), ConfigError);
    std::ofstream(scratch("bad.json")) << "{ not json";
    CHECK_THROWS_AS(load_model(scratch("bad.json")), ConfigError);
}

TEST_CASE("dataset JSON lines") {
    const Mdp m = fixture::random_mdp(6, 2, 8);
    const auto d = sample_dataset(m, TabularPolicy::uniform(6, 2), 5, 20, 3);
    const auto text = dataset_to_jsonl(d);
    CHECK(text.rfind("{\"n_actions\":2,\"n_states\":6}\n", 0) == 0);
    CHECK(dataset_from_jsonl(text) == d);

    const auto path = scratch("data.jsonl");
    std::ofstream(path) << text;
    CHECK(load_dataset(path) == d);

    const auto parsed = dataset_from_jsonl("{\"n_states\":2,\"n_actions\":1,\"gamma\":0.9}\n\n[[0,0,1.5,1]]\n[]\n");
    CHECK(parsed.trajectories.size() == 2);
    CHECK(parsed.trajectories[0].steps[0] == Step{0, 0, 1.5, 1});

    CHECK_THROWS_AS(dataset_from_jsonl(""), ConfigError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"n_states\":2}\n"), ConfigError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"n_states\":2,\"n_actions\":1,\"x\":1}\n"), ConfigError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"n_states\":2,\"n_actions\":1}\n[[0,0,1]]\n"), ConfigError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"n_states\":2,\"n_actions\":1}\n[[0,1,0,1]]\n"), ConfigError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"n_states\":2,\"n_actions\":1}\n[[0,0,\"r\",1]]\n"), ConfigError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"n_states\":2,\"n_actions\":1}\n[[0,0,0,1]\n"), ConfigError);
}

TEST_CASE("algorithm specs") {
    CHECK(algorithm_from_json("ApproxSoftSPIBB", Benchmark::RandomMdps) ==
          table1_spec(Benchmark::RandomMdps, AlgorithmKind::ApproxSoftSPIBB));
    const auto custom = algorithm_from_json(json{{"kind", "RaMDP"}, {"kappa_adj", 0.3}}, Benchmark::WetChicken);
    CHECK(custom.kappa_adj == 0.3);
    const auto partial = algorithm_from_json(json{{"kind", "LowerApproxSoftSPIBB"}, {"delta", 0.5}},
                                             Benchmark::WetChicken);
    CHECK(partial.epsilon == 0.5);
    CHECK(partial.delta == 0.5);
    for (const auto& spec : table1_algorithms(Benchmark::WetChicken))
        CHECK(algorithm_from_json(algorithm_to_json(spec), Benchmark::RandomMdps) == spec);
    CHECK_THROWS_AS(algorithm_from_json("Nope", Benchmark::RandomMdps), ConfigError);
    CHECK_THROWS_AS(algorithm_from_json(json{{"kind", "DUIPI"}, {"xi", -1.0}}, Benchmark::RandomMdps),
                    ConfigError);
    CHECK_THROWS_AS(algorithm_from_json(json{{"kind", "DUIPI"}, {"zeta", 1.0}}, Benchmark::RandomMdps),
                    ConfigError);
    CHECK_THROWS_AS(algorithm_from_json(json{{"xi", 1.0}}, Benchmark::RandomMdps), ConfigError);
}

TEST_CASE("experiment config") {
    SUBCASE("defaults") {
        const auto f = experiment_from_json(json{{"data_sizes", {10, 20}}});
        CHECK(f.config.benchmark == Benchmark::RandomMdps);
        CHECK(f.config.algorithms == table1_algorithms(Benchmark::RandomMdps));
        CHECK(f.config.random_mdp.eta == 0.9);
        CHECK(f.config.random_mdp.gamma == 0.95);
        CHECK(f.config.wet_chicken.epsilon_greedy == 0.1);
        CHECK(f.config.n_trials == 1);
        CHECK(f.config.output == "results");
        CHECK(f.format == ExportFormat::Csv);
        CHECK(f.grids.empty());
    }
    SUBCASE("everything set") {
        const json j = json::parse(R"({
            "benchmark": "wet_chicken", "data_sizes": [50, 100], "n_trials": 4, "base_seed": 9,
            "epsilon_greedy": 0.2, "gamma": 0.9, "output": "out", "format": "json",
            "record_timing": true,
            "algorithms": ["BasicRL", {"kind": "PiB_SPIBB", "n_wedge": 4}],
            "grids": {"RaMDP": [{"kappa_adj": 1}, {"kappa_adj": 2}]}
        })");
        const auto f = experiment_from_json(j);
        CHECK(f.config.benchmark == Benchmark::WetChicken);
        CHECK(f.config.n_trials == 4);
        CHECK(f.config.base_seed == 9);
        CHECK(f.config.wet_chicken.epsilon_greedy == 0.2);
        CHECK(f.config.wet_chicken.gamma == 0.9);
        CHECK(f.config.record_timing);
        CHECK(f.format == ExportFormat::Json);
        REQUIRE(f.config.algorithms.size() == 2);
        CHECK(f.config.algorithms[1].n_wedge == 4);
        REQUIRE(f.grids.at(AlgorithmKind::RaMDP).size() == 2);
        CHECK(f.grids.at(AlgorithmKind::RaMDP)[1].kappa_adj == 2.0);
    }
    SUBCASE("default grids") {
        const auto f = experiment_from_json(json{{"data_sizes", {10}}, {"grids", "default"}});
        CHECK(f.grids.size() == 9);
    }
    SUBCASE("errors") {
        auto bad = [](json j) { return experiment_from_json(j); };
        CHECK_THROWS_AS(bad(json::object()), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"trials", 3}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {20, 10}}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", "many"}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"n_trials", 0}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"benchmark", "mountain_car"}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"eta", 2.0}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"format", "xml"}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"algorithms", "some"}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"grids", {{"RaMDP", json::array()}}}}), ConfigError);
        CHECK_THROWS_AS(bad(json{{"data_sizes", {10}}, {"grids", {{"RaMDP", {1, 2}}}}}), ConfigError);
    }
    SUBCASE("files") {
        const auto path = scratch("cfg.json");
        std::ofstream(path) << R"({"data_sizes": [5], "n_trials": 2})";
        CHECK(load_experiment(path).config.n_trials == 2);
        std::ofstream(path) << "[1, 2";
        CHECK_THROWS_AS(load_experiment(path), ConfigError);
    }
}
