#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace featnet {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected communication graph. Edges are stored normalized (first < second),
// sorted and unique; self-weights live in the combination matrix, not here.
class Graph {
public:
    Graph() = default;
    Graph(std::size_t node_count, std::vector<Edge> edges);

    std::size_t size() const { return node_count_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::vector<std::size_t> degrees() const;
    std::vector<std::vector<std::size_t>> adjacency() const;
    bool connected() const;

private:
    std::size_t node_count_ = 0;
    std::vector<Edge> edges_;
};

Graph make_ring(std::size_t K);
Graph make_path(std::size_t K);
Graph make_complete(std::size_t K);

// Places K nodes uniformly in the unit square and joins pairs closer than
// `radius`. Disconnected draws are resampled from the same stream, up to
// kGeometricGraphRetries attempts.
inline constexpr int kGeometricGraphRetries = 1000;
Graph build_random_geometric_graph(std::size_t K, double radius, std::uint64_t seed);

// Symmetric doubly stochastic weights a(l,k) with precomputed neighbor lists
// and mixing rate. Immutable once built.
class CombinationMatrix {
public:
    // Validates symmetry, stochasticity, nonnegativity and primitivity.
    static CombinationMatrix from_weights(std::size_t K, std::vector<double> weights);
    static CombinationMatrix averaging(std::size_t K);

    std::size_t size() const { return K_; }
    double weight(std::size_t l, std::size_t k) const { return weights_[l * K_ + k]; }
    std::span<const double> weights() const { return weights_; }
    // Agents l with a(l,k) > 0, in increasing order (includes k when a(k,k) > 0).
    const std::vector<std::size_t>& neighbors(std::size_t k) const { return neighbors_[k]; }
    double lambda() const { return lambda_; }

    // Dense K x K product (row-major) of this matrix raised to `power`.
    std::vector<double> power(int power) const;

private:
    std::size_t K_ = 0;
    std::vector<double> weights_;
    std::vector<std::vector<std::size_t>> neighbors_;
    double lambda_ = 0.0;
};

CombinationMatrix build_metropolis_weights(const Graph& g);

// Second-largest eigenvalue magnitude. Throws std::invalid_argument when the
// matrix is not primitive (lambda within 1e-12 of 1).
double mixing_rate(std::size_t K, std::span<const double> weights);
double mixing_rate(const CombinationMatrix& A);
// Power iteration on A - (1/K) 11^T; used above 512 agents and in tests.
double mixing_rate_power_iteration(std::size_t K, std::span<const double> weights,
                                   double tol = 1e-12, int max_iter = 1000000);

struct Topology {
    Graph graph;
    CombinationMatrix matrix;
};

nlohmann::json topology_to_json(const Graph& g, const CombinationMatrix& A);
// Weights are optional in the input; Metropolis weights are built when absent.
Topology topology_from_json(const nlohmann::json& j);
Topology read_topology(const std::string& path);
void write_topology(const std::string& path, const Graph& g, const CombinationMatrix& A);

}  // namespace featnet
