#include "featnet/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace featnet {

using nlohmann::json;

json default_config_json() {
    return json{
        {"schema_version", kConfigSchemaVersion},
        {"dataset",
         {{"source", "synthetic"},
          {"path", ""},
          {"labels_path", ""},
          {"N", 200},
          {"M", 32},
          {"seed", 1},
          {"feature_scale", 1.0},
          {"flip_prob", 0.0},
          {"noise", 0.0},
          {"label_column", -1},
          {"header", false},
          {"digits", json::array()},
          {"limit", 0},
          {"scale01", false},
          {"append_bias", false}}},
        {"partition", {{"sizes", json::array()}}},
        {"topology", {{"kind", "ring"}, {"K", 4}, {"radius", 0.0}, {"seed", 1}, {"path", ""}}},
        {"model", {{"loss", "logistic"}, {"reg_coeff", 1e-2}, {"classes", 2}}},
        {"algorithm",
         {{"name", "vrd2"},
          {"step_size", "auto"},
          {"step_factor", 8.0},
          {"J", 1},
          {"B", 1},
          {"iters", 10000},
          {"seed", 1},
          {"sampling", "uniform"}}},
        {"metrics",
         {{"every", 1}, {"grad_sum_checkpoints", 10}, {"reference_tol", 1e-10}, {"reference_max_iters", 200000}}},
        {"execution", {{"parallel", false}}},
        {"debug", {{"corrupt_u_at", nullptr}, {"corrupt_amount", 1.0}}},
    };
}

namespace {

// Copies `src` into `dst`, refusing keys the defaults do not know.
void merge_known(json& dst, const json& src, const std::string& where) {
    if (!src.is_object()) throw ConfigError(where.empty() ? "config must be a JSON object" : where + ": expected an object");
    for (auto it = src.begin(); it != src.end(); ++it) {
        const std::string path = where.empty() ? it.key() : where + "." + it.key();
        if (!dst.contains(it.key())) throw ConfigError(path + ": unknown key");
        auto& slot = dst[it.key()];
        if (slot.is_object()) merge_known(slot, it.value(), path);
        else slot = it.value();
    }
}

const json& at(const json& doc, const std::string& section, const std::string& key) {
    return doc.at(section).at(key);
}

std::string field(const std::string& section, const std::string& key) { return section + "." + key; }

double get_number(const json& doc, const std::string& s, const std::string& k) {
    const auto& v = at(doc, s, k);
    if (!v.is_number()) throw ConfigError(field(s, k) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(s, k) + ": must be finite");
    return d;
}

std::uint64_t get_count(const json& doc, const std::string& s, const std::string& k, std::uint64_t min = 0) {
    const auto& v = at(doc, s, k);
    if (!v.is_number_integer()) throw ConfigError(field(s, k) + ": expected an integer");
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u < min) throw ConfigError(field(s, k) + ": must be >= " + std::to_string(min));
        return u;
    }
    const auto i = v.get<std::int64_t>();
    if (i < static_cast<std::int64_t>(min)) throw ConfigError(field(s, k) + ": must be >= " + std::to_string(min));
    return static_cast<std::uint64_t>(i);
}

std::string get_string(const json& doc, const std::string& s, const std::string& k) {
    const auto& v = at(doc, s, k);
    if (!v.is_string()) throw ConfigError(field(s, k) + ": expected a string");
    return v.get<std::string>();
}

bool get_bool(const json& doc, const std::string& s, const std::string& k) {
    const auto& v = at(doc, s, k);
    if (!v.is_boolean()) throw ConfigError(field(s, k) + ": expected true or false");
    return v.get<bool>();
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override \"" + assignment + "\": expected key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;  // bare strings need no quotes
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(part)) throw ConfigError(key + ": unknown key");
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (node->is_object()) throw ConfigError(key + ": cannot replace a whole section");
    *node = value;
}

ExperimentConfig parse_config(const json& input, const std::vector<std::string>& overrides) {
    json doc = default_config_json();
    merge_known(doc, input, "");
    for (const auto& o : overrides) apply_override(doc, o);

    if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kConfigSchemaVersion) {
        throw ConfigError("schema_version: expected " + std::to_string(kConfigSchemaVersion));
    }

    ExperimentConfig c;
    auto& d = c.dataset;
    d.source = get_string(doc, "dataset", "source");
    if (d.source != "synthetic" && d.source != "csv" && d.source != "idx") {
        throw ConfigError("dataset.source: expected synthetic, csv or idx");
    }
    d.path = get_string(doc, "dataset", "path");
    d.labels_path = get_string(doc, "dataset", "labels_path");
    d.N = get_count(doc, "dataset", "N", 1);
    d.M = get_count(doc, "dataset", "M", 1);
    d.seed = get_count(doc, "dataset", "seed");
    d.feature_scale = get_number(doc, "dataset", "feature_scale");
    if (d.feature_scale <= 0.0) throw ConfigError("dataset.feature_scale: must be positive");
    d.flip_prob = get_number(doc, "dataset", "flip_prob");
    if (d.flip_prob < 0.0 || d.flip_prob > 1.0) throw ConfigError("dataset.flip_prob: must lie in [0, 1]");
    d.noise = get_number(doc, "dataset", "noise");
    if (d.noise < 0.0) throw ConfigError("dataset.noise: must be nonnegative");
    if (!at(doc, "dataset", "label_column").is_number_integer()) {
        throw ConfigError("dataset.label_column: expected an integer");
    }
    d.label_column = at(doc, "dataset", "label_column").get<int>();
    d.header = get_bool(doc, "dataset", "header");
    const auto& digits = at(doc, "dataset", "digits");
    if (!digits.is_array()) throw ConfigError("dataset.digits: expected an array");
    for (const auto& v : digits) {
        if (!v.is_number_integer()) throw ConfigError("dataset.digits: expected integers");
        d.digits.push_back(v.get<int>());
    }
    d.limit = get_count(doc, "dataset", "limit");
    d.scale01 = get_bool(doc, "dataset", "scale01");
    d.append_bias = get_bool(doc, "dataset", "append_bias");
    if (d.source != "synthetic" && d.path.empty()) throw ConfigError("dataset.path: required for " + d.source);
    if (d.source == "idx" && d.labels_path.empty()) throw ConfigError("dataset.labels_path: required for idx");

    const auto& sizes = doc["partition"]["sizes"];
    if (!sizes.is_array()) throw ConfigError("partition.sizes: expected an array");
    for (const auto& v : sizes) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
            throw ConfigError("partition.sizes: expected positive integers");
        }
        c.partition_sizes.push_back(v.get<std::size_t>());
    }

    auto& t = c.topology;
    t.kind = get_string(doc, "topology", "kind");
    if (t.kind != "ring" && t.kind != "path" && t.kind != "complete" && t.kind != "rgg" && t.kind != "file") {
        throw ConfigError("topology.kind: expected ring, path, complete, rgg or file");
    }
    t.K = get_count(doc, "topology", "K", 1);
    t.radius = get_number(doc, "topology", "radius");
    t.seed = get_count(doc, "topology", "seed");
    t.path = get_string(doc, "topology", "path");
    if (t.kind == "rgg" && !(t.radius > 0.0)) throw ConfigError("topology.radius: must be positive for rgg");
    if (t.kind == "file" && t.path.empty()) throw ConfigError("topology.path: required for kind file");

    auto& m = c.model;
    m.loss = get_string(doc, "model", "loss");
    if (m.loss != "logistic" && m.loss != "softmax" && m.loss != "ridge") {
        throw ConfigError("model.loss: expected logistic, softmax or ridge");
    }
    m.reg_coeff = get_number(doc, "model", "reg_coeff");
    if (m.reg_coeff < 0.0) throw ConfigError("model.reg_coeff: must be nonnegative");
    m.classes = get_count(doc, "model", "classes", 2);

    auto& a = c.algorithm;
    try {
        a.name = algorithm_from_string(get_string(doc, "algorithm", "name"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("algorithm.name: ") + e.what());
    }
    const auto& step = at(doc, "algorithm", "step_size");
    if (step.is_string()) {
        if (step.get<std::string>() != "auto") throw ConfigError("algorithm.step_size: expected a number or \"auto\"");
    } else {
        const double mu = get_number(doc, "algorithm", "step_size");
        if (!(mu > 0.0)) throw ConfigError("algorithm.step_size: must be positive");
        a.step_size = mu;
    }
    a.step_factor = get_number(doc, "algorithm", "step_factor");
    if (!(a.step_factor > 0.0)) throw ConfigError("algorithm.step_factor: must be positive");
    a.J = get_count(doc, "algorithm", "J", 1);
    a.B = get_count(doc, "algorithm", "B", 1);
    a.iters = get_count(doc, "algorithm", "iters");
    a.seed = get_count(doc, "algorithm", "seed");
    const auto sampling = get_string(doc, "algorithm", "sampling");
    if (sampling == "uniform") a.sampling = Sampling::uniform;
    else if (sampling == "cyclic") a.sampling = Sampling::cyclic;
    else throw ConfigError("algorithm.sampling: expected uniform or cyclic");
    if (a.name != Algorithm::pvrd2 && (a.J != 1 || a.B != 1)) {
        throw ConfigError("algorithm.J/B: only pvrd2 takes a pipeline depth or batch size");
    }

    auto& mt = c.metrics;
    mt.every = get_count(doc, "metrics", "every", 1);
    mt.grad_sum_checkpoints = get_count(doc, "metrics", "grad_sum_checkpoints");
    mt.reference_tol = get_number(doc, "metrics", "reference_tol");
    if (!(mt.reference_tol > 0.0)) throw ConfigError("metrics.reference_tol: must be positive");
    mt.reference_max_iters = get_count(doc, "metrics", "reference_max_iters", 1);

    c.parallel = get_bool(doc, "execution", "parallel");

    const auto& corrupt = at(doc, "debug", "corrupt_u_at");
    if (!corrupt.is_null()) {
        FaultInjection f;
        f.iteration = get_count(doc, "debug", "corrupt_u_at", 1);
        f.amount = get_number(doc, "debug", "corrupt_amount");
        c.fault = f;
    }
    c.resolved = std::move(doc);
    return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc, overrides);
}

Dataset build_dataset(const DatasetConfig& c, const ModelConfig& m) {
    Dataset data;
    if (c.source == "synthetic") {
        SyntheticSpec spec;
        spec.N = c.N;
        spec.M = c.M;
        spec.seed = c.seed;
        spec.model = m.loss;
        spec.classes = m.classes;
        spec.feature_scale = c.feature_scale;
        spec.flip_prob = c.flip_prob;
        spec.noise = c.noise;
        data = make_synthetic(spec).data;
        if (c.append_bias) append_bias_feature(data);
        return data;
    }
    LoadOptions opt;
    opt.label_column = c.label_column;
    opt.header = c.header;
    opt.idx_labels_path = c.labels_path;
    opt.digits = c.digits;
    opt.limit = c.limit;
    opt.scale01 = c.scale01;
    opt.append_bias = c.append_bias;
    return load_dataset(c.path, c.source, opt);
}

Topology build_topology(const TopologyConfig& c) {
    if (c.kind == "file") return read_topology(c.path);
    Graph g = [&] {
        if (c.kind == "ring") return make_ring(c.K);
        if (c.kind == "path") return make_path(c.K);
        if (c.kind == "complete") return make_complete(c.K);
        return build_random_geometric_graph(c.K, c.radius, c.seed);
    }();
    auto A = build_metropolis_weights(g);
    return Topology{std::move(g), std::move(A)};
}

Experiment prepare_experiment(const ExperimentConfig& config) {
    Dataset data = build_dataset(config.dataset, config.model);
    Topology topo = build_topology(config.topology);
    const std::size_t K = topo.matrix.size();
    const Partition part = config.partition_sizes.empty() ? partition_features(data.M, K)
                                                          : partition_from_sizes(data.M, config.partition_sizes);
    std::shared_ptr<const LossModel> loss = make_loss(config.model.loss, config.model.classes);
    Problem problem = make_problem(data, part, std::move(topo.matrix), loss, l2_regularizer(config.model.reg_coeff));

    ReferenceOptions ro;
    ro.tol = config.metrics.reference_tol;
    ro.max_iterations = config.metrics.reference_max_iters;
    ReferenceSolution ref = compute_reference(problem, ro);

    RunOptions opt;
    if (config.algorithm.step_size) {
        opt.step_size = *config.algorithm.step_size;
    } else {
        const Objective obj(problem.shards, *problem.loss, problem.reg);
        const auto constants = obj.constants();
        if (!(constants.nu > 0.0)) {
            throw ConfigError("algorithm.step_size: \"auto\" needs model.reg_coeff > 0");
        }
        opt.step_size = default_step_size(constants, problem.N(), config.algorithm.step_factor);
    }
    opt.iterations = config.algorithm.iters;
    opt.seed = config.algorithm.seed;
    opt.J = config.algorithm.J;
    opt.B = config.algorithm.B;
    opt.sampling = config.algorithm.sampling;
    opt.record_every = config.metrics.every;
    opt.grad_sum_checkpoints = config.metrics.grad_sum_checkpoints;
    opt.exec = config.parallel ? kernels::Exec::parallel : kernels::Exec::serial;
    opt.fault = config.fault;

    Experiment e{config, std::move(data), std::move(problem), std::move(ref), config.algorithm.name, opt};
    return e;
}

RunTrace run_experiment(const Experiment& e) {
    RunOptions opt = e.options;
    opt.reference = &e.reference;
    RunTrace trace;
    if (e.algorithm == Algorithm::model_distributed) {
        // Stand-in for a model-exchanging method: the centralized SAGA
        // trajectory with full-model traffic on every edge.
        trace = run_centralized_saga(e.problem, opt);
        trace.algorithm = Algorithm::model_distributed;
        trace.K = e.problem.K();
        trace.comm_per_iter = comm_per_edge_per_iter(Algorithm::model_distributed, 1, trace.C, 1, trace.M,
                                                     trace.K, trace.N);
        for (auto& r : trace.records) {
            r.comm_net = static_cast<double>(r.iter) * trace.comm_per_iter.net;
            r.comm_gross = static_cast<double>(r.iter) * trace.comm_per_iter.gross;
        }
    } else {
        trace = run_algorithm(e.algorithm, e.problem, opt);
    }
    trace.config = e.config.resolved;
    return trace;
}

}  // namespace featnet
