#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "featnet/topology.hpp"

using namespace featnet;

namespace {

Eigen::MatrixXd dense(const CombinationMatrix& A) {
    const auto K = static_cast<Eigen::Index>(A.size());
    Eigen::MatrixXd m(K, K);
    for (Eigen::Index l = 0; l < K; ++l)
        for (Eigen::Index k = 0; k < K; ++k) m(l, k) = A.weight(l, k);
    return m;
}

// Metropolis rule written out directly from the degrees.
std::vector<double> metropolis_oracle(const Graph& g) {
    const auto K = g.size();
    const auto deg = g.degrees();
    std::vector<double> a(K * K, 0.0);
    for (const auto& [l, k] : g.edges()) {
        const double w = 1.0 / (1.0 + static_cast<double>(std::max(deg[l], deg[k])));
        a[l * K + k] = w;
        a[k * K + l] = w;
    }
    for (std::size_t k = 0; k < K; ++k) {
        double off = 0.0;
        for (std::size_t l = 0; l < K; ++l)
            if (l != k) off += a[l * K + k];
        a[k * K + k] = 1.0 - off;
    }
    return a;
}

std::vector<Graph> assorted_graphs() {
    std::vector<Graph> gs{make_ring(3), make_ring(7), make_path(5), make_complete(6)};
    for (std::uint64_t s = 1; s <= 6; ++s) gs.push_back(build_random_geometric_graph(12, 0.45, s));
    gs.push_back(build_random_geometric_graph(28, 0.3, 11));
    return gs;
}

}  // namespace

TEST_CASE("graph normalizes and validates edges") {
    Graph g(4, {{1, 0}, {0, 1}, {2, 3}, {3, 2}, {1, 2}});
    CHECK(g.edges().size() == 3);
    CHECK(g.edges().front() == Edge{0, 1});
    CHECK(g.connected());
    CHECK_THROWS(Graph(3, {{1, 1}}));
    CHECK_THROWS(Graph(3, {{0, 3}}));
    CHECK_FALSE(Graph(4, {{0, 1}, {2, 3}}).connected());
}

TEST_CASE("metropolis weights on a two-node path") {
    const auto A = build_metropolis_weights(make_path(2));
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t k = 0; k < 2; ++k) CHECK(A.weight(l, k) == 0.5);
    CHECK(std::abs(A.lambda()) <= 1e-12);
}

TEST_CASE("four-ring: uniform thirds and circulant spectrum") {
    const auto A = build_metropolis_weights(make_ring(4));
    for (std::size_t l = 0; l < 4; ++l) {
        for (std::size_t k = 0; k < 4; ++k) {
            const bool linked = l == k || (l + 1) % 4 == k || (k + 1) % 4 == l;
            CHECK(A.weight(l, k) == doctest::Approx(linked ? 1.0 / 3.0 : 0.0).epsilon(1e-15));
        }
    }
    // Circulant with first row (1/3, 1/3, 0, 1/3): eigenvalues 1/3 + (2/3) cos(2 pi m / 4).
    double lam = 0.0;
    for (int m = 1; m < 4; ++m) {
        lam = std::max(lam, std::abs(1.0 / 3.0 + 2.0 / 3.0 * std::cos(2.0 * std::numbers::pi * m / 4.0)));
    }
    CHECK(lam == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(A.lambda() == doctest::Approx(lam).epsilon(1e-12));
    CHECK(mixing_rate(A) == doctest::Approx(lam).epsilon(1e-12));
}

TEST_CASE("complete graph on three nodes averages exactly") {
    const auto A = build_metropolis_weights(make_complete(3));
    for (double w : A.weights()) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs(A.lambda()) < 1e-12);
}

TEST_CASE("averaging matrix has zero mixing rate; identity is rejected") {
    CHECK(CombinationMatrix::averaging(5).lambda() < 1e-12);
    std::vector<double> eye(9, 0.0);
    eye[0] = eye[4] = eye[8] = 1.0;
    CHECK_THROWS_AS(CombinationMatrix::from_weights(3, eye), std::invalid_argument);
    CHECK_THROWS_AS(mixing_rate(3, eye), std::invalid_argument);
}

TEST_CASE("from_weights rejects asymmetric, negative and non-stochastic input") {
    CHECK_THROWS(CombinationMatrix::from_weights(2, {0.6, 0.4, 0.5, 0.5}));
    CHECK_THROWS(CombinationMatrix::from_weights(2, {1.5, -0.5, -0.5, 1.5}));
    CHECK_THROWS(CombinationMatrix::from_weights(2, {0.5, 0.4, 0.4, 0.5}));
    CHECK_THROWS(CombinationMatrix::from_weights(2, {0.0, 1.0, 1.0, 0.0}));  // no positive self-weight
}

TEST_CASE("metropolis construction matches the closed-form rule on assorted graphs") {
    for (const auto& g : assorted_graphs()) {
        const auto A = build_metropolis_weights(g);
        const auto expect = metropolis_oracle(g);
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(A.weights()[i] == doctest::Approx(expect[i]).epsilon(1e-15));
    }
}

TEST_CASE("combination matrix invariants hold for every constructed matrix") {
    for (const auto& g : assorted_graphs()) {
        const auto A = build_metropolis_weights(g);
        const auto K = A.size();
        double row_err = 0.0;
        for (std::size_t l = 0; l < K; ++l) {
            double r = 0.0, c = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                r += A.weight(l, k);
                c += A.weight(k, l);
                CHECK(A.weight(l, k) == A.weight(k, l));
            }
            row_err = std::max({row_err, std::abs(r - 1.0), std::abs(c - 1.0)});
        }
        CHECK(row_err <= 1e-12);
        CHECK(A.lambda() < 1.0);
        bool self = false;
        for (std::size_t k = 0; k < K; ++k) self = self || A.weight(k, k) > 0.0;
        CHECK(self);
    }
}

TEST_CASE("mixing rate equals the eigen-solver value and bounds matrix powers") {
    for (const auto& g : assorted_graphs()) {
        const auto A = build_metropolis_weights(g);
        const auto K = static_cast<Eigen::Index>(A.size());
        const Eigen::MatrixXd D = dense(A);
        const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(K, K, 1.0 / static_cast<double>(K));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D - J);
        const double lam = es.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(A.lambda() == doctest::Approx(lam).epsilon(1e-10));
        CHECK(mixing_rate_power_iteration(A.size(), A.weights()) == doctest::Approx(lam).epsilon(1e-8));

        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(K, K);
        for (int j = 1; j <= 10; ++j) {
            P = P * D;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(P - J);
            const double norm2 = pe.eigenvalues().cwiseAbs().maxCoeff();
            CHECK(norm2 <= std::pow(A.lambda(), j) + 1e-10);
            const auto Pj = A.power(j);
            for (Eigen::Index l = 0; l < K; ++l)
                for (Eigen::Index k = 0; k < K; ++k)
                    CHECK(Pj[static_cast<std::size_t>(l * K + k)] == doctest::Approx(P(l, k)).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("random geometric graphs") {
    SUBCASE("radius sqrt(2) on two nodes is complete") {
        const auto g = build_random_geometric_graph(2, std::sqrt(2.0), 7);
        CHECK(g.edges().size() == 1);
    }
    SUBCASE("tiny radius fails after retries") {
        CHECK_THROWS_AS(build_random_geometric_graph(5, 0.01, 1), std::runtime_error);
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS(build_random_geometric_graph(1, 0.5, 1));
        CHECK_THROWS(build_random_geometric_graph(4, 0.0, 1));
    }
    SUBCASE("same seed, same graph") {
        CHECK(build_random_geometric_graph(28, 0.4, 3).edges() == build_random_geometric_graph(28, 0.4, 3).edges());
    }
    SUBCASE("edge count is nondecreasing across the four radius regimes") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::size_t prev = 0;
            for (double r : {0.3, 0.4, 0.6, std::sqrt(2.0)}) {
                const auto g = build_random_geometric_graph(28, r, seed);
                CHECK(g.connected());
                CHECK(g.edges().size() >= prev);
                prev = g.edges().size();
            }
            CHECK(prev == 28 * 27 / 2);
        }
    }
}

TEST_CASE("topology JSON round-trips bit-exactly") {
    const auto g = build_random_geometric_graph(9, 0.5, 4);
    const auto A = build_metropolis_weights(g);
    const auto path = (std::filesystem::temp_directory_path() / "featnet_topo_rt.json").string();
    write_topology(path, g, A);
    const auto t = read_topology(path);
    CHECK(t.graph.edges() == g.edges());
    REQUIRE(t.matrix.weights().size() == A.weights().size());
    for (std::size_t i = 0; i < A.weights().size(); ++i) CHECK(t.matrix.weights()[i] == A.weights()[i]);
    CHECK(t.matrix.lambda() == A.lambda());
    std::filesystem::remove(path);
}

TEST_CASE("topology JSON without weights gets Metropolis weights") {
    const auto j = nlohmann::json::parse(R"({"K": 4, "edges": [[0,1],[1,2],[2,3],[3,0]]})");
    const auto t = topology_from_json(j);
    CHECK(t.matrix.lambda() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    auto bad = j;
    bad["weights"] = std::vector<double>{0.5, 0.5, 0, 0, 0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 0.5, 0.5};
    bad["edges"] = nlohmann::json::array({{0, 1}, {2, 3}});
    CHECK_THROWS(topology_from_json(bad));  // disconnected
}
