#include "spibb/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace spibb {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) fail(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) fail(where + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) fail(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(where + ": key '" + key + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

template <class F>
auto wrap(F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json model_to_json(const Mdp& mdp, const TabularPolicy* baseline) {
    const int n = mdp.n_states(), m = mdp.n_actions();
    json transition = json::array();
    json reward = json::array();
    for (int s = 0; s < n; ++s) {
        json rows = json::array();
        json r = json::array();
        for (int a = 0; a < m; ++a) {
            const auto row = mdp.transition_row(s, a);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
            r.push_back(mdp.reward(s, a));
        }
        transition.push_back(std::move(rows));
        reward.push_back(std::move(r));
    }
    std::vector<int> terminal;
    for (int s = 0; s < n; ++s)
        if (mdp.is_terminal(s)) terminal.push_back(s);
    json j{{"n_states", n},          {"n_actions", m},        {"gamma", mdp.gamma()},
           {"r_max", mdp.r_max()},   {"initial_state", mdp.initial_state()},
           {"terminal", terminal},   {"transition", transition},
           {"reward", reward}};
    if (mdp.has_entry_rewards()) j["entry_reward"] = mdp.entry_reward_data();
    if (baseline != nullptr) {
        json rows = json::array();
        for (int s = 0; s < n; ++s) {
            const auto row = baseline->row(s);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        j["baseline"] = std::move(rows);
    }
    return j;
}

ModelFile model_from_json(const json& j) {
    const std::string where = "model";
    require_keys(j, {"n_states", "n_actions", "gamma", "r_max", "initial_state", "terminal",
                     "transition", "reward", "entry_reward", "baseline"},
                 where);
    const int n = get<int>(j, "n_states", where);
    const int m = get<int>(j, "n_actions", where);
    if (n < 1 || m < 1) fail(where + ": n_states and n_actions must be positive");
    const auto transition =
        get<std::vector<std::vector<std::vector<double>>>>(j, "transition", where);
    const bool has_entry = j.contains("entry_reward");
    const auto reward = has_entry && !j.contains("reward")
                            ? std::vector<std::vector<double>>(static_cast<std::size_t>(n),
                                                               std::vector<double>(static_cast<std::size_t>(m), 0.0))
                            : get<std::vector<std::vector<double>>>(j, "reward", where);
    if (transition.size() != static_cast<std::size_t>(n) ||
        reward.size() != static_cast<std::size_t>(n))
        fail(where + ": transition and reward need n_states rows");
    std::vector<double> p, r;
    for (int s = 0; s < n; ++s) {
        if (transition[s].size() != static_cast<std::size_t>(m) ||
            reward[s].size() != static_cast<std::size_t>(m))
            fail(where + ": each state needs n_actions entries");
        for (int a = 0; a < m; ++a) {
            if (transition[s][a].size() != static_cast<std::size_t>(n))
                fail(where + ": each transition row needs n_states entries");
            p.insert(p.end(), transition[s][a].begin(), transition[s][a].end());
            r.push_back(reward[s][a]);
        }
    }
    std::vector<double> entry;
    if (has_entry) {
        entry = get<std::vector<double>>(j, "entry_reward", where);
        if (entry.size() != static_cast<std::size_t>(n)) fail(where + ": entry_reward needs n_states entries");
        r.clear();
        for (double x : entry) r.push_back(x);
    }
    std::vector<bool> terminal(static_cast<std::size_t>(n), false);
    for (int s : get_or<std::vector<int>>(j, "terminal", {}, where)) {
        if (s < 0 || s >= n) fail(where + ": terminal state out of range");
        terminal[static_cast<std::size_t>(s)] = true;
    }
    double r_max = 0.0;
    for (double x : r) r_max = std::max(r_max, std::abs(x));
    r_max = get_or<double>(j, "r_max", r_max, where);

    return wrap([&] {
        const double gamma = get<double>(j, "gamma", where);
        const int initial = get_or<int>(j, "initial_state", 0, where);
        ModelFile out{has_entry ? Mdp::with_entry_rewards(n, m, std::move(p), std::move(entry), gamma,
                                                          std::move(terminal), initial, r_max)
                                : Mdp(n, m, std::move(p), std::move(r), gamma, std::move(terminal),
                                      initial, r_max),
                      std::nullopt};
        if (has_entry && j.contains("reward")) {
            for (int s = 0; s < n; ++s)
                for (int a = 0; a < m; ++a)
                    if (!out.mdp.is_terminal(s) &&
                        std::abs(out.mdp.reward(s, a) - reward[s][a]) > 1e-9)
                        fail(where + ": reward disagrees with entry_reward");
        }
        if (j.contains("baseline")) {
            const auto rows = get<std::vector<std::vector<double>>>(j, "baseline", where);
            if (rows.size() != static_cast<std::size_t>(n)) fail(where + ": baseline shape");
            std::vector<double> probs;
            for (const auto& row : rows) {
                if (row.size() != static_cast<std::size_t>(m)) fail(where + ": baseline shape");
                probs.insert(probs.end(), row.begin(), row.end());
            }
            out.baseline.emplace(n, m, std::move(probs));
        }
        return out;
    });
}

ModelFile load_model(const std::filesystem::path& path) {
    try {
        return model_from_json(json::parse(read_text(path)));
    } catch (const json::parse_error& e) {
        fail(path.string() + ": " + e.what());
    }
}

void save_model(const std::filesystem::path& path, const Mdp& mdp, const TabularPolicy* baseline) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << model_to_json(mdp, baseline).dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string dataset_to_jsonl(const Dataset& dataset) {
    std::string out =
        json{{"n_states", dataset.n_states}, {"n_actions", dataset.n_actions}}.dump() + '\n';
    for (const auto& t : dataset.trajectories) {
        json steps = json::array();
        for (const auto& st : t.steps)
            steps.push_back(json::array({st.state, st.action, st.reward, st.next_state}));
        out += steps.dump() + '\n';
    }
    return out;
}

Dataset dataset_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Dataset data;
    bool header = false;
    try {
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const json j = json::parse(line);
            if (!header) {
                require_keys(j, {"n_states", "n_actions", "gamma"}, "dataset header");
                data.n_states = get<int>(j, "n_states", "dataset header");
                data.n_actions = get<int>(j, "n_actions", "dataset header");
                if (data.n_states < 1 || data.n_actions < 1)
                    fail("dataset header: sizes must be positive");
                header = true;
                continue;
            }
            Trajectory t;
            for (const auto& step : j) {
                if (!step.is_array() || step.size() != 4) fail("dataset: steps are [s, a, r, s']");
                Step st{step[0].get<int>(), step[1].get<int>(), step[2].get<double>(),
                        step[3].get<int>()};
                if (st.state < 0 || st.state >= data.n_states || st.next_state < 0 ||
                    st.next_state >= data.n_states || st.action < 0 ||
                    st.action >= data.n_actions)
                    fail("dataset: index out of range");
                t.steps.push_back(st);
            }
            data.trajectories.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        fail(std::string("dataset: ") + e.what());
    }
    if (!header) fail("dataset: missing header line");
    return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
    return dataset_from_jsonl(read_text(path));
}

json algorithm_to_json(const AlgorithmSpec& spec) {
    json j{{"kind", to_string(spec.kind)}};
    switch (spec.kind) {
    case AlgorithmKind::RaMDP:
        j["kappa_adj"] = spec.kappa_adj;
        break;
    case AlgorithmKind::RMin:
    case AlgorithmKind::PiB_SPIBB:
    case AlgorithmKind::PiLeqB_SPIBB:
        j["n_wedge"] = spec.n_wedge;
        break;
    case AlgorithmKind::DUIPI:
        j["xi"] = spec.xi;
        break;
    case AlgorithmKind::ApproxSoftSPIBB:
    case AlgorithmKind::AdvApproxSoftSPIBB:
    case AlgorithmKind::LowerApproxSoftSPIBB:
        j["epsilon"] = spec.epsilon;
        j["delta"] = spec.delta;
        break;
    default:
        break;
    }
    return j;
}

AlgorithmSpec algorithm_from_json(const json& j, Benchmark benchmark) {
    if (j.is_string())
        return table1_spec(benchmark, wrap([&] { return parse_algorithm_kind(j.get<std::string>()); }));
    const std::string where = "algorithm";
    require_keys(j, {"kind", "kappa_adj", "n_wedge", "xi", "epsilon", "delta"}, where);
    const auto kind = wrap([&] { return parse_algorithm_kind(get<std::string>(j, "kind", where)); });
    AlgorithmSpec spec = table1_spec(benchmark, kind);
    spec.kappa_adj = get_or(j, "kappa_adj", spec.kappa_adj, where);
    spec.n_wedge = get_or(j, "n_wedge", spec.n_wedge, where);
    spec.xi = get_or(j, "xi", spec.xi, where);
    spec.epsilon = get_or(j, "epsilon", spec.epsilon, where);
    spec.delta = get_or(j, "delta", spec.delta, where);
    wrap([&] {
        spec.validate();
        return 0;
    });
    return spec;
}

ExperimentFile experiment_from_json(const json& j) {
    const std::string where = "config";
    require_keys(j, {"benchmark", "data_sizes", "algorithms", "n_trials", "base_seed", "eta",
                     "epsilon_greedy", "gamma", "n_states", "n_actions", "max_trajectory_length",
                     "output", "record_timing", "grids", "format"},
                 where);
    ExperimentFile file;
    ExperimentConfig& c = file.config;
    c.benchmark = wrap([&] {
        return parse_benchmark(get_or<std::string>(j, "benchmark", "random_mdps", where));
    });
    c.data_sizes = get<std::vector<int>>(j, "data_sizes", where);
    c.n_trials = get_or(j, "n_trials", c.n_trials, where);
    c.base_seed = get_or<std::uint64_t>(j, "base_seed", c.base_seed, where);
    c.random_mdp.eta = get_or(j, "eta", c.random_mdp.eta, where);
    c.wet_chicken.epsilon_greedy = get_or(j, "epsilon_greedy", c.wet_chicken.epsilon_greedy, where);
    const double gamma = get_or(j, "gamma", c.random_mdp.gamma, where);
    c.random_mdp.gamma = gamma;
    c.wet_chicken.gamma = gamma;
    c.random_mdp.n_states = get_or(j, "n_states", c.random_mdp.n_states, where);
    c.random_mdp.n_actions = get_or(j, "n_actions", c.random_mdp.n_actions, where);
    c.max_trajectory_length = get_or(j, "max_trajectory_length", c.max_trajectory_length, where);
    c.output = get_or<std::string>(j, "output", c.output.string(), where);
    c.record_timing = get_or(j, "record_timing", c.record_timing, where);

    const std::string format = get_or<std::string>(j, "format", "csv", where);
    if (format == "csv")
        file.format = ExportFormat::Csv;
    else if (format == "json")
        file.format = ExportFormat::Json;
    else
        fail(where + ": format must be 'csv' or 'json'");

    if (!j.contains("algorithms") ||
        (j.at("algorithms").is_string() && j.at("algorithms").get<std::string>() == "all")) {
        c.algorithms = table1_algorithms(c.benchmark);
    } else {
        const auto& list = j.at("algorithms");
        if (!list.is_array()) fail(where + ": algorithms must be a list or \"all\"");
        for (const auto& item : list) c.algorithms.push_back(algorithm_from_json(item, c.benchmark));
    }

    if (j.contains("grids")) {
        const auto& grids = j.at("grids");
        if (grids.is_string() && grids.get<std::string>() == "default") {
            for (const auto& spec : table1_algorithms(c.benchmark))
                file.grids[spec.kind] = default_grid(c.benchmark, spec.kind);
        } else if (grids.is_object()) {
            for (const auto& [name, points] : grids.items()) {
                const auto kind = wrap([&] { return parse_algorithm_kind(name); });
                if (!points.is_array() || points.empty())
                    fail(where + ": grid '" + name + "' must be a non-empty list");
                for (json point : points) {
                    if (!point.is_object()) fail(where + ": grid points must be objects");
                    point["kind"] = name;
                    file.grids[kind].push_back(algorithm_from_json(point, c.benchmark));
                }
            }
        } else {
            fail(where + ": grids must be an object or \"default\"");
        }
    }

    wrap([&] {
        c.validate();
        return 0;
    });
    return file;
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
    try {
        return experiment_from_json(json::parse(read_text(path)));
    } catch (const json::parse_error& e) {
        fail(path.string() + ": " + e.what());
    }
}

}  // namespace spibb
