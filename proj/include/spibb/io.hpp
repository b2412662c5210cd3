#pragma once

#include "spibb/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace spibb {

/// Raised for malformed configuration, model or dataset files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelFile {
    Mdp mdp;
    std::optional<TabularPolicy> baseline;
};

nlohmann::json model_to_json(const Mdp& mdp, const TabularPolicy* baseline = nullptr);
ModelFile model_from_json(const nlohmann::json& j);
ModelFile load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const Mdp& mdp,
                const TabularPolicy* baseline = nullptr);

/// JSON lines: a header object followed by one [[s, a, r, s'], ...] array per trajectory.
std::string dataset_to_jsonl(const Dataset& dataset);
Dataset dataset_from_jsonl(const std::string& text);
Dataset load_dataset(const std::filesystem::path& path);

/// Missing hyper-parameters take the reference value for `benchmark`.
AlgorithmSpec algorithm_from_json(const nlohmann::json& j, Benchmark benchmark);
nlohmann::json algorithm_to_json(const AlgorithmSpec& spec);

struct ExperimentFile {
    ExperimentConfig config;
    std::map<AlgorithmKind, std::vector<AlgorithmSpec>> grids;
    ExportFormat format = ExportFormat::Csv;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentFile experiment_from_json(const nlohmann::json& j);
ExperimentFile load_experiment(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace spibb
