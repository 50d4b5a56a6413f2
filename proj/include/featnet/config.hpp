#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "featnet/algorithms.hpp"
#include "featnet/data.hpp"
#include "featnet/harness.hpp"
#include "json.hpp"

namespace featnet {

// Schema or value problem in an experiment config; the message names the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

struct DatasetConfig {
    std::string source = "synthetic";  // synthetic | csv | idx
    std::string path;
    std::string labels_path;           // idx only
    std::size_t N = 200;
    std::size_t M = 32;
    std::uint64_t seed = 1;
    double feature_scale = 1.0;
    double flip_prob = 0.0;
    double noise = 0.0;
    int label_column = -1;
    bool header = false;
    std::vector<int> digits;
    std::size_t limit = 0;
    bool scale01 = false;
    bool append_bias = false;
};

struct TopologyConfig {
    std::string kind = "ring";  // ring | path | complete | rgg | file
    std::size_t K = 4;
    double radius = 0.0;
    std::uint64_t seed = 1;
    std::string path;
};

struct ModelConfig {
    std::string loss = "logistic";
    double reg_coeff = 1e-2;
    std::size_t classes = 2;
};

struct AlgorithmConfig {
    Algorithm name = Algorithm::vrd2;
    std::optional<double> step_size;  // empty: derived from the guidance bound
    double step_factor = 8.0;
    std::size_t J = 1;
    std::size_t B = 1;
    std::size_t iters = 10000;
    std::uint64_t seed = 1;
    Sampling sampling = Sampling::uniform;
};

struct MetricsConfig {
    std::size_t every = 1;
    std::size_t grad_sum_checkpoints = 10;
    double reference_tol = 1e-10;
    std::size_t reference_max_iters = 200000;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    std::vector<std::size_t> partition_sizes;  // empty: even split
    TopologyConfig topology;
    ModelConfig model;
    AlgorithmConfig algorithm;
    MetricsConfig metrics;
    bool parallel = false;
    std::optional<FaultInjection> fault;
    nlohmann::json resolved;  // defaults merged with the file and overrides
};

// Default document; every accepted key appears here.
nlohmann::json default_config_json();
// Applies "a.b.c=value" where value is a JSON literal or a bare string.
void apply_override(nlohmann::json& doc, const std::string& assignment);
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

struct Experiment {
    ExperimentConfig config;
    Dataset data;
    Problem problem;
    ReferenceSolution reference;
    Algorithm algorithm;
    RunOptions options;
};

Dataset build_dataset(const DatasetConfig& c, const ModelConfig& m);
Topology build_topology(const TopologyConfig& c);
Experiment prepare_experiment(const ExperimentConfig& config);
// Runs the configured algorithm; the returned trace carries the config echo.
RunTrace run_experiment(const Experiment& e);

}  // namespace featnet
