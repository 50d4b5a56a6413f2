#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "featnet/algorithms.hpp"
#include "featnet/data.hpp"
#include "featnet/harness.hpp"
#include "featnet/model.hpp"
#include "featnet/topology.hpp"

namespace fixture {

inline featnet::Dataset synthetic(const std::string& model, std::size_t N, std::size_t M, std::uint64_t seed,
                                  std::size_t classes = 2, double scale = 1.0, double flip = 0.0) {
    featnet::SyntheticSpec s;
    s.N = N;
    s.M = M;
    s.seed = seed;
    s.model = model;
    s.classes = classes;
    s.feature_scale = scale;
    s.flip_prob = flip;
    return featnet::make_synthetic(s).data;
}

inline std::shared_ptr<const featnet::LossModel> loss(const std::string& name, std::size_t classes = 2) {
    return featnet::make_loss(name, classes);
}

inline featnet::Problem on_graph(const featnet::Dataset& d, const featnet::Graph& g, const std::string& model,
                                 double reg, std::size_t classes = 2) {
    return featnet::make_problem(d, featnet::partition_features(d.M, g.size()), featnet::build_metropolis_weights(g),
                                 loss(model, classes), featnet::l2_regularizer(reg));
}

inline featnet::Problem averaged(const featnet::Dataset& d, std::size_t K, const std::string& model, double reg,
                                 std::size_t classes = 2) {
    return featnet::make_problem(d, featnet::partition_features(d.M, K), featnet::CombinationMatrix::averaging(K),
                                 loss(model, classes), featnet::l2_regularizer(reg));
}

// Runs `run` with an observer that stores every iterate; index 0 is w_0 = 0.
inline std::vector<std::vector<double>> trajectory(
    const std::function<featnet::RunTrace(const featnet::RunOptions&)>& run, featnet::RunOptions opt,
    std::size_t dim) {
    std::vector<std::vector<double>> path{std::vector<double>(dim, 0.0)};
    opt.observer = [&](std::size_t, std::span<const double> W) { path.emplace_back(W.begin(), W.end()); };
    run(opt);
    return path;
}

inline double max_path_diff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        for (std::size_t q = 0; q < a[i].size(); ++q) m = std::max(m, std::abs(a[i][q] - b[i][q]));
    }
    return a.size() == b.size() ? m : std::numeric_limits<double>::infinity();
}

}  // namespace fixture
