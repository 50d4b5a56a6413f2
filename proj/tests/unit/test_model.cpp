#include <cmath>
#include <random>

#include "doctest.h"
#include "featnet/data.hpp"
#include "featnet/model.hpp"
#include "featnet/objective.hpp"
#include "oracles.hpp"

using namespace featnet;

namespace {

double rel_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST_CASE("logistic loss at the origin and in saturation") {
    CHECK(logistic_loss(0.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(logistic_score_grad(0.0, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(logistic_loss(50.0, 1.0) == doctest::Approx(std::exp(-50.0)).epsilon(1e-12));
    CHECK(logistic_score_grad(50.0, 1.0) == doctest::Approx(-std::exp(-50.0)).epsilon(1e-12));
    CHECK(std::isfinite(logistic_loss(-800.0, 1.0)));
    CHECK(logistic_loss(-800.0, 1.0) == doctest::Approx(800.0));
    CHECK(logistic_score_grad(-800.0, 1.0) == doctest::Approx(-1.0));
}

TEST_CASE("logistic gradient is bounded by one") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> z(-700.0, 700.0);
    for (int t = 0; t < 1000; ++t) {
        const double g = logistic_score_grad(z(rng), t % 2 ? 1.0 : -1.0);
        CHECK(std::abs(g) <= 1.0);
    }
    CHECK(std::abs(logistic_score_grad(5.0, -1.0)) < 1.0);
}

TEST_CASE("every loss passes randomized finite-difference checks") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (const auto& [name, C] : std::vector<std::pair<std::string, std::size_t>>{
             {"logistic", 1}, {"ridge", 1}, {"softmax", 3}, {"softmax", 10}}) {
        const auto loss = make_loss(name, C == 1 ? 2 : C);
        CHECK(loss->classes() == C);
        for (int t = 0; t < 100; ++t) {
            std::vector<double> z(C);
            for (auto& v : z) v = normal(rng);
            double label = 0.0;
            if (name == "logistic") label = t % 2 ? 1.0 : -1.0;
            if (name == "ridge") label = normal(rng);
            if (name == "softmax") label = static_cast<double>(t % C);
            std::vector<double> g(C);
            loss->score_grad(z, label, g);
            for (std::size_t c = 0; c < C; ++c) {
                const double fd = oracle::central_difference(
                    [&](const std::vector<double>& x) { return loss->loss(x, label); }, z, c);
                CHECK(rel_gap(g[c], fd) <= 1e-6);
            }
        }
    }
}

TEST_CASE("losses reject invalid labels") {
    CHECK_THROWS(make_loss("logistic")->check_label(0.0));
    CHECK_THROWS(make_loss("softmax", 3)->check_label(3.0));
    CHECK_THROWS(make_loss("softmax", 3)->check_label(0.5));
    CHECK_NOTHROW(make_loss("ridge")->check_label(-2.5));
    CHECK_THROWS(make_loss("hinge"));
    CHECK_THROWS(make_loss("softmax", 1));
}

TEST_CASE("softmax probabilities") {
    const std::vector<double> flat(4, 0.7);
    for (std::size_t g = 0; g < 4; ++g) CHECK(softmax_prob(flat, g) == doctest::Approx(0.25).epsilon(1e-15));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 5.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> z(6);
        for (auto& v : z) v = normal(rng);
        auto shifted = z;
        for (auto& v : shifted) v += 123.25;
        double total = 0.0;
        for (std::size_t g = 0; g < 6; ++g) {
            total += softmax_prob(z, g);
            CHECK(softmax_prob(shifted, g) == doctest::Approx(softmax_prob(z, g)).epsilon(1e-12));
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);

        std::vector<double> sg(6);
        SoftmaxLoss(6).score_grad(z, static_cast<double>(t % 6), sg);
        double s = 0.0;
        for (double v : sg) s += v;
        CHECK(std::abs(s) <= 1e-12);
    }
    CHECK(std::isfinite(softmax_prob(std::vector<double>{1000.0, -1000.0}, 1)));
}

TEST_CASE("softmax column gradients") {
    SUBCASE("one-hot limit zeroes the label column data term") {
        const std::vector<double> z{800.0, 0.0, 0.0};
        const std::vector<double> h{1.0, -2.0};
        const std::vector<double> W(6, 0.0);
        const auto g = softmax_column_grads(z, 0, h, W, 0.0);
        CHECK(g[0 * 3 + 0] == 0.0);
        CHECK(g[1 * 3 + 0] == 0.0);
    }
    SUBCASE("zero features and coefficient give zero") {
        const auto g = softmax_column_grads(std::vector<double>{0.3, -0.2, 0.1}, 2, std::vector<double>(4, 0.0),
                                            std::vector<double>(12, 0.7), 0.0);
        for (double v : g) CHECK(v == 0.0);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS(softmax_column_grads(std::vector<double>{0.0, 0.0}, 0, std::vector<double>(3, 1.0),
                                          std::vector<double>(5, 0.0), 0.0));
    }
    SUBCASE("randomized finite differences of the full softmax term") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t C = 4, width = 5;
        for (int t = 0; t < 100; ++t) {
            std::vector<double> h(width), W(width * C), z0(C);
            for (auto& v : h) v = normal(rng);
            for (auto& v : W) v = normal(rng);
            for (auto& v : z0) v = normal(rng);  // other agents' contribution
            const auto label = static_cast<std::size_t>(t % C);
            const double coeff = 0.05;
            auto f = [&](const std::vector<double>& w) {
                std::vector<double> z = z0;
                for (std::size_t j = 0; j < width; ++j)
                    for (std::size_t c = 0; c < C; ++c) z[c] += h[j] * w[j * C + c];
                double r = 0.0;
                for (double v : w) r += v * v;
                return -std::log(softmax_prob(z, label)) + 0.5 * coeff * r;
            };
            std::vector<double> z = z0;
            for (std::size_t j = 0; j < width; ++j)
                for (std::size_t c = 0; c < C; ++c) z[c] += h[j] * W[j * C + c];
            const auto g = softmax_column_grads(z, label, h, W, coeff);
            for (std::size_t i = 0; i < W.size(); ++i) {
                CHECK(rel_gap(g[i], oracle::central_difference(f, W, i)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("l2 regularizer") {
    const auto r = l2_regularizer(1e-4);
    std::vector<double> g(2);
    r.grad(std::vector<double>{0.0, 0.0}, g);
    CHECK(r.value(std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK(g[0] == 0.0);
    CHECK(r.value(std::vector<double>{1.0, 1.0}) == doctest::Approx(2e-4).epsilon(1e-15));
    r.grad(std::vector<double>{1.0, 1.0}, g);
    CHECK(g[0] == doctest::Approx(2e-4).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(2e-4).epsilon(1e-15));
    CHECK(r.eta() == doctest::Approx(2e-4));
    CHECK_THROWS(l2_regularizer(-1.0));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto big = l2_regularizer(0.37);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> w(7);
        for (auto& v : w) v = normal(rng);
        std::vector<double> gw(7);
        big.grad(w, gw);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double fd = oracle::central_difference([&](const std::vector<double>& x) { return big.value(x); }, w, i);
            CHECK(std::abs(fd - gw[i]) <= 1e-8 * (1.0 + std::abs(gw[i])));
        }
    }
}

TEST_CASE("regularized risk is 2*coeff strongly convex on random pairs") {
    SyntheticSpec s;
    s.N = 60;
    s.M = 8;
    s.seed = 9;
    const auto data = make_synthetic(s).data;
    const auto shards = shard(data, partition_features(8, 2));
    LogisticLoss loss;
    const double coeff = 0.03;
    const Objective obj(shards, loss, l2_regularizer(coeff));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(8), b(8), ga(8), gb(8);
        for (auto& v : a) v = normal(rng);
        for (auto& v : b) v = normal(rng);
        obj.risk_and_gradient(a, ga);
        obj.risk_and_gradient(b, gb);
        double lhs = 0.0, dist = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            lhs += (ga[i] - gb[i]) * (a[i] - b[i]);
            dist += (a[i] - b[i]) * (a[i] - b[i]);
        }
        CHECK(lhs >= 2.0 * coeff * dist * (1.0 - 1e-12));
    }
}

TEST_CASE("objective gradient agrees with the dense oracle and finite differences") {
    for (const auto& [name, C] : std::vector<std::pair<std::string, std::size_t>>{{"logistic", 1}, {"softmax", 3}, {"ridge", 1}}) {
        SyntheticSpec s;
        s.N = 40;
        s.M = 7;
        s.seed = 21;
        s.model = name;
        s.classes = 3;
        const auto data = make_synthetic(s).data;
        const auto shards = shard(data, partition_features(7, 3));
        const auto loss = make_loss(name, 3);
        const Objective obj(shards, *loss, l2_regularizer(0.01));
        std::mt19937_64 rng(8);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> W(7 * C), g(7 * C);
        for (auto& v : W) v = normal(rng);
        const double f = obj.risk_and_gradient(W, g);
        CHECK(f == doctest::Approx(oracle::risk(data, *loss, 0.01, W)).epsilon(1e-13));
        CHECK(obj.risk(W) == doctest::Approx(f).epsilon(1e-14));
        const auto g_oracle = oracle::full_gradient(data, *loss, 0.01, W);
        for (std::size_t i = 0; i < W.size(); ++i) {
            CHECK(g[i] == doctest::Approx(g_oracle[i]).epsilon(1e-12).scale(1.0));
            CHECK(rel_gap(g[i], oracle::central_difference([&](const std::vector<double>& x) { return obj.risk(x); }, W, i)) <= 1e-6);
        }
    }
}

TEST_CASE("model constants follow their definitions") {
    SyntheticSpec s;
    s.N = 30;
    s.M = 5;
    const auto data = make_synthetic(s).data;
    const auto shards = shard(data, partition_features(5, 1));
    LogisticLoss loss;
    const Objective obj(shards, loss, l2_regularizer(0.02));
    const auto c = obj.constants();
    double mx = 0.0, h4 = 0.0;
    for (std::size_t n = 0; n < data.N; ++n) {
        double sq = 0.0;
        for (std::size_t j = 0; j < data.M; ++j) sq += data.features[n * data.M + j] * data.features[n * data.M + j];
        mx = std::max(mx, sq);
        h4 += sq * sq / static_cast<double>(data.N);
    }
    CHECK(c.nu == doctest::Approx(0.04));
    CHECK(c.eta == doctest::Approx(0.04));
    CHECK(c.delta == 0.25);
    CHECK(c.L == doctest::Approx(0.25 * mx + 0.04).epsilon(1e-12));
    CHECK(c.h4 == doctest::Approx(h4).epsilon(1e-12));
}
