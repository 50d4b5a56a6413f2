#include "featnet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace featnet {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr std::size_t kDenseEigenLimit = 512;

}  // namespace

Graph::Graph(std::size_t node_count, std::vector<Edge> edges) : node_count_(node_count) {
    if (node_count == 0) {
        throw std::invalid_argument("graph must have at least one node");
    }
    for (auto& [l, k] : edges) {
        if (l >= node_count || k >= node_count) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (l == k) {
            throw std::invalid_argument("self-loop edges are not allowed");
        }
        if (l > k) std::swap(l, k);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> deg(node_count_, 0);
    for (const auto& [l, k] : edges_) {
        ++deg[l];
        ++deg[k];
    }
    return deg;
}

std::vector<std::vector<std::size_t>> Graph::adjacency() const {
    std::vector<std::vector<std::size_t>> adj(node_count_);
    for (const auto& [l, k] : edges_) {
        adj[l].push_back(k);
        adj[k].push_back(l);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

bool Graph::connected() const {
    if (node_count_ == 0) return false;
    const auto adj = adjacency();
    std::vector<char> seen(node_count_, 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t visited = 1;
    while (!frontier.empty()) {
        const auto v = frontier.front();
        frontier.pop();
        for (auto w : adj[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++visited;
                frontier.push(w);
            }
        }
    }
    return visited == node_count_;
}

Graph make_ring(std::size_t K) {
    if (K < 2) throw std::invalid_argument("ring needs K >= 2");
    std::vector<Edge> edges;
    for (std::size_t k = 0; k + 1 < K; ++k) edges.emplace_back(k, k + 1);
    if (K > 2) edges.emplace_back(0, K - 1);
    return Graph(K, std::move(edges));
}

Graph make_path(std::size_t K) {
    if (K < 1) throw std::invalid_argument("path needs K >= 1");
    std::vector<Edge> edges;
    for (std::size_t k = 0; k + 1 < K; ++k) edges.emplace_back(k, k + 1);
    return Graph(K, std::move(edges));
}

Graph make_complete(std::size_t K) {
    if (K < 1) throw std::invalid_argument("complete graph needs K >= 1");
    std::vector<Edge> edges;
    for (std::size_t l = 0; l < K; ++l)
        for (std::size_t k = l + 1; k < K; ++k) edges.emplace_back(l, k);
    return Graph(K, std::move(edges));
}

Graph build_random_geometric_graph(std::size_t K, double radius, std::uint64_t seed) {
    if (K < 2) throw std::invalid_argument("random geometric graph needs K >= 2");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(K), y(K);
    for (int attempt = 0; attempt < kGeometricGraphRetries; ++attempt) {
        for (std::size_t k = 0; k < K; ++k) {
            x[k] = unit(rng);
            y[k] = unit(rng);
        }
        std::vector<Edge> edges;
        for (std::size_t l = 0; l < K; ++l) {
            for (std::size_t k = l + 1; k < K; ++k) {
                if (std::hypot(x[l] - x[k], y[l] - y[k]) < radius) edges.emplace_back(l, k);
            }
        }
        Graph g(K, std::move(edges));
        if (g.connected()) return g;
    }
    std::ostringstream msg;
    msg << "no connected random geometric graph with K=" << K << " and radius=" << radius
        << " after " << kGeometricGraphRetries << " placements; the radius is too small";
    throw std::runtime_error(msg.str());
}

CombinationMatrix CombinationMatrix::from_weights(std::size_t K, std::vector<double> weights) {
    if (K == 0) throw std::invalid_argument("combination matrix must be at least 1x1");
    if (weights.size() != K * K) {
        throw std::invalid_argument("combination matrix needs K*K weights");
    }
    bool any_self = false;
    for (std::size_t l = 0; l < K; ++l) {
        double row = 0.0;
        double col = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double a = weights[l * K + k];
            if (!std::isfinite(a) || a < 0.0) {
                throw std::invalid_argument("combination weights must be finite and nonnegative");
            }
            if (a != weights[k * K + l]) {
                throw std::invalid_argument("combination matrix is not symmetric");
            }
            row += a;
            col += weights[k * K + l];
        }
        if (std::abs(row - 1.0) > kStochasticTol || std::abs(col - 1.0) > kStochasticTol) {
            throw std::invalid_argument("combination matrix is not doubly stochastic");
        }
        any_self = any_self || weights[l * K + l] > 0.0;
    }
    if (!any_self) {
        throw std::invalid_argument("combination matrix needs a(k,k) > 0 for at least one agent");
    }

    CombinationMatrix A;
    A.K_ = K;
    A.weights_ = std::move(weights);
    A.neighbors_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < K; ++l) {
            if (A.weights_[l * K + k] > 0.0) A.neighbors_[k].push_back(l);
        }
    }
    A.lambda_ = mixing_rate(K, A.weights_);
    return A;
}

CombinationMatrix CombinationMatrix::averaging(std::size_t K) {
    return from_weights(K, std::vector<double>(K * K, 1.0 / static_cast<double>(K)));
}

std::vector<double> CombinationMatrix::power(int p) const {
    if (p < 0) throw std::invalid_argument("matrix power must be nonnegative");
    std::vector<double> result(K_ * K_, 0.0);
    for (std::size_t k = 0; k < K_; ++k) result[k * K_ + k] = 1.0;
    std::vector<double> next(K_ * K_);
    for (int step = 0; step < p; ++step) {
        for (std::size_t i = 0; i < K_; ++i) {
            for (std::size_t j = 0; j < K_; ++j) {
                double s = 0.0;
                for (std::size_t m = 0; m < K_; ++m) s += result[i * K_ + m] * weights_[m * K_ + j];
                next[i * K_ + j] = s;
            }
        }
        std::swap(result, next);
    }
    return result;
}

CombinationMatrix build_metropolis_weights(const Graph& g) {
    const std::size_t K = g.size();
    if (!g.connected()) throw std::invalid_argument("Metropolis weights need a connected graph");
    const auto deg = g.degrees();
    std::vector<double> w(K * K, 0.0);
    for (const auto& [l, k] : g.edges()) {
        const double a = 1.0 / (1.0 + static_cast<double>(std::max(deg[l], deg[k])));
        w[l * K + k] = a;
        w[k * K + l] = a;
    }
    for (std::size_t k = 0; k < K; ++k) {
        double off = 0.0;
        for (std::size_t l = 0; l < K; ++l) {
            if (l != k) off += w[l * K + k];
        }
        w[k * K + k] = 1.0 - off;
    }
    return CombinationMatrix::from_weights(K, std::move(w));
}

double mixing_rate_power_iteration(std::size_t K, std::span<const double> weights, double tol,
                                   int max_iter) {
    if (K <= 1) return 0.0;
    const double inv_k = 1.0 / static_cast<double>(K);
    // B = A - (1/K) 11^T is symmetric; iterate on B^2 so that eigenvalues of
    // equal magnitude and opposite sign do not stall convergence.
    auto apply_b = [&](const std::vector<double>& in, std::vector<double>& out) {
        const double mean = std::accumulate(in.begin(), in.end(), 0.0) * inv_k;
        for (std::size_t k = 0; k < K; ++k) {
            double s = 0.0;
            for (std::size_t l = 0; l < K; ++l) s += weights[l * K + k] * in[l];
            out[k] = s - mean;
        }
    };
    std::vector<double> x(K), y(K), z(K);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    for (auto& v : x) v = gauss(rng);
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        apply_b(x, y);
        apply_b(y, z);
        const double norm = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
        if (norm == 0.0) return 0.0;
        const double xx = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
        const double next = std::sqrt(std::inner_product(x.begin(), x.end(), z.begin(), 0.0) / xx);
        for (std::size_t k = 0; k < K; ++k) x[k] = z[k] / norm;
        if (it > 0 && std::abs(next - estimate) <= tol * std::max(1.0, next)) return next;
        estimate = next;
    }
    return estimate;
}

double mixing_rate(std::size_t K, std::span<const double> weights) {
    if (weights.size() != K * K) throw std::invalid_argument("mixing_rate needs K*K weights");
    double lambda = 0.0;
    if (K <= 1) {
        lambda = 0.0;
    } else if (K <= kDenseEigenLimit) {
        Eigen::MatrixXd M(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
        for (std::size_t l = 0; l < K; ++l)
            for (std::size_t k = 0; k < K; ++k)
                M(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = weights[l * K + k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
        std::vector<double> mags;
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            mags.push_back(std::abs(solver.eigenvalues()(i)));
        }
        std::sort(mags.begin(), mags.end(), std::greater<>());
        // mags[0] is the Perron eigenvalue 1.
        lambda = mags[1];
        if (lambda < 1e-14) lambda = 0.0;
    } else {
        lambda = mixing_rate_power_iteration(K, weights);
    }
    if (lambda >= 1.0 - 1e-12) {
        throw std::invalid_argument(
            "combination matrix is not primitive (mixing rate 1): the graph is disconnected or "
            "periodic");
    }
    return lambda;
}

double mixing_rate(const CombinationMatrix& A) { return mixing_rate(A.size(), A.weights()); }

nlohmann::json topology_to_json(const Graph& g, const CombinationMatrix& A) {
    nlohmann::json j;
    j["K"] = g.size();
    auto edges = nlohmann::json::array();
    for (const auto& [l, k] : g.edges()) edges.push_back({l, k});
    j["edges"] = std::move(edges);
    j["weights"] = std::vector<double>(A.weights().begin(), A.weights().end());
    j["lambda"] = A.lambda();
    return j;
}

Topology topology_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("K") || !j.contains("edges")) {
        throw std::invalid_argument("topology JSON needs \"K\" and \"edges\"");
    }
    const auto K = j.at("K").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edge must be [l, k]");
        edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    Graph g(K, std::move(edges));
    if (j.contains("weights")) {
        auto A = CombinationMatrix::from_weights(K, j.at("weights").get<std::vector<double>>());
        for (std::size_t l = 0; l < K; ++l) {
            for (std::size_t k = l + 1; k < K; ++k) {
                const bool edge = std::binary_search(g.edges().begin(), g.edges().end(), Edge{l, k});
                if (!edge && A.weight(l, k) != 0.0) {
                    throw std::invalid_argument("nonzero weight on a pair that is not an edge");
                }
            }
        }
        return {std::move(g), std::move(A)};
    }
    auto A = build_metropolis_weights(g);
    return {std::move(g), std::move(A)};
}

Topology read_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open topology file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("topology file " + path + ": " + e.what());
    }
    return topology_from_json(j);
}

void write_topology(const std::string& path, const Graph& g, const CombinationMatrix& A) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write topology file: " + path);
    out << topology_to_json(g, A).dump(2) << '\n';
}

}  // namespace featnet
