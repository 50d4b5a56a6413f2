#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "featnet/harness.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace featnet;

namespace {

RunTrace geometric_trace(double ratio, std::size_t n) {
    RunTrace t;
    t.iterations = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        TraceRecord r;
        r.iter = i;
        r.excess_risk = std::pow(ratio, static_cast<double>(i));
        t.records.push_back(r);
    }
    return t;
}

}  // namespace

TEST_CASE("reference minimizer of ridge matches the normal equations") {
    featnet::SyntheticSpec s;
    s.N = 120;
    s.M = 9;
    s.seed = 6;
    s.model = "ridge";
    s.noise = 0.3;
    const auto d = make_synthetic(s).data;
    const double reg = 0.05;
    const auto p = fixture::on_graph(d, make_ring(3), "ridge", reg);
    const auto ref = compute_reference(p);
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> H(d.features.data(), 120, 9);
    Eigen::Map<const Eigen::VectorXd> y(d.labels.data(), 120);
    const Eigen::VectorXd w =
        (H.transpose() * H / 120.0 + 2.0 * reg * Eigen::MatrixXd::Identity(9, 9)).ldlt().solve(H.transpose() * y / 120.0);
    for (int j = 0; j < 9; ++j) CHECK(std::abs(ref.w_star[static_cast<std::size_t>(j)] - w(j)) <= 1e-9);
    CHECK(ref.grad_norm <= 1e-10);
    CHECK(ref.risk_star == doctest::Approx(oracle::risk(d, *p.loss, reg, ref.w_star)).epsilon(1e-14));
}

TEST_CASE("reference minimizer with zero features is the origin") {
    Dataset d;
    d.N = 6;
    d.M = 4;
    d.features.assign(24, 0.0);
    d.labels = {1, -1, 1, 1, -1, -1};
    const auto p = fixture::averaged(d, 2, "logistic", 0.1);
    const auto ref = compute_reference(p);
    for (double v : ref.w_star) CHECK(v == 0.0);
    CHECK(ref.risk_star == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("logistic reference is stable across starting points") {
    const auto d = fixture::synthetic("logistic", 150, 20, 2, 2, 1.0, 0.1);
    const auto p = fixture::on_graph(d, make_ring(4), "logistic", 1e-4);
    const auto a = compute_reference(p);
    CHECK(a.grad_norm <= 1e-10);
    std::vector<double> start(20, 3.0);
    ReferenceOptions o;
    o.initial = start;
    const auto b = compute_reference(p, o);
    CHECK(oracle::max_abs_diff(a.w_star, b.w_star) < 1e-10 / 2e-4);
    CHECK(std::abs(a.risk_star - b.risk_star) < 1e-10);
    ReferenceOptions tiny;
    tiny.max_iterations = 2;
    CHECK_THROWS(compute_reference(p, tiny));
}

TEST_CASE("communication accounting") {
    CHECK(comm_per_edge_per_iter(Algorithm::pvrd2, 10, 10, 10, 784, 8).net == 1000.0);
    CHECK(comm_per_edge_per_iter(Algorithm::pvrd2, 10, 10, 10, 784, 8).gross == 2000.0);
    CHECK(comm_per_edge_per_iter(Algorithm::model_distributed, 1, 10, 1, 3072, 8).net == 30720.0);
    CHECK(comm_per_edge_per_iter(Algorithm::vrd2, 1, 1, 1, 784, 8).net == 1.0);
    CHECK(comm_per_edge_per_iter(Algorithm::naive, 1, 1, 1, 784, 8).net == 1.0);
    CHECK(comm_per_edge_per_iter(Algorithm::deterministic, 1, 3, 1, 784, 8, 200).net == 600.0);
    CHECK(comm_per_edge_per_iter(Algorithm::sgd, 1, 1, 1, 784, 8).net == 0.0);
    CHECK(comm_per_edge_per_iter(Algorithm::saga, 1, 1, 1, 784, 8).gross == 0.0);
    for (auto a : {Algorithm::naive, Algorithm::vrd2, Algorithm::pvrd2, Algorithm::sgd, Algorithm::saga,
                   Algorithm::deterministic, Algorithm::model_distributed})
        CHECK(algorithm_from_string(to_string(a)) == a);
    CHECK_THROWS(algorithm_from_string("adam"));
}

TEST_CASE("audit passes healthy runs and flags a corrupted one") {
    const auto d = fixture::synthetic("logistic", 40, 8, 3);
    const auto p = fixture::on_graph(d, make_ring(4), "logistic", 0.01);
    const auto ref = compute_reference(p);
    RunOptions o;
    o.step_size = 0.05;
    o.iterations = 400;
    o.reference = &ref;
    o.record_every = 10;

    const auto healthy = run_vrd2(p, o);
    const auto report = audit_invariants(healthy);
    CHECK(report.passed());
    for (const auto* name : {"unbiasedness", "grad_sum", "excess_risk_nonnegative", "trace_completeness", "accounting"}) {
        REQUIRE(report.find(name) != nullptr);
        CHECK(report.find(name)->status == CheckStatus::pass);
    }

    o.fault = FaultInjection{123, 0.5};
    const auto broken = run_vrd2(p, o);
    const auto bad = audit_invariants(broken);
    CHECK_FALSE(bad.passed());
    const auto* u = bad.find("unbiasedness");
    REQUIRE(u != nullptr);
    CHECK(u->status == CheckStatus::fail);
    REQUIRE(u->first_violation.has_value());
    // Residual max since the previous record, so the record at 130 is the first to see it.
    CHECK(*u->first_violation == 130);

    o.fault.reset();
    const auto naive = audit_invariants(run_naive(p, o));
    CHECK(naive.find("unbiasedness")->status == CheckStatus::not_applicable);
    CHECK(naive.find("grad_sum")->status == CheckStatus::not_applicable);
    CHECK(naive.passed());
    CHECK(to_string(CheckStatus::not_applicable) == "n/a");
}

TEST_CASE("audit detects incomplete traces and broken counters") {
    const auto d = fixture::synthetic("logistic", 30, 6, 1);
    const auto p = fixture::on_graph(d, make_ring(3), "logistic", 0.01);
    RunOptions o;
    o.step_size = 0.05;
    o.iterations = 95;
    o.record_every = 10;
    auto t = run_vrd2(p, o);
    REQUIRE(t.records.back().iter == 95);
    CHECK(audit_invariants(t).passed());

    auto gap = t;
    gap.records.erase(gap.records.begin() + 3);
    CHECK(audit_invariants(gap).find("trace_completeness")->status == CheckStatus::fail);

    auto truncated = t;
    truncated.records.pop_back();
    CHECK(audit_invariants(truncated).find("trace_completeness")->status == CheckStatus::fail);

    auto counts = t;
    counts.records[4].gradient_evals += 1;
    CHECK(audit_invariants(counts).find("accounting")->status == CheckStatus::fail);

    auto negative = t;
    negative.records[2].excess_risk = -1e-6;
    CHECK(audit_invariants(negative).find("excess_risk_nonnegative")->status == CheckStatus::fail);
}

TEST_CASE("rate fit recovers a geometric decay") {
    const auto t = geometric_trace(std::pow(10.0, -0.1), 100);
    const auto f = fit_linear_rate(t, {0, 99});
    CHECK(f.slope == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.points == 100);
    CHECK(f.warning.empty());

    auto z = t;
    z.records[60].excess_risk = 0.0;
    const auto g = fit_linear_rate(z, {10, 90});
    CHECK(g.window.begin == 10);
    CHECK(g.window.end == 59);
    CHECK_FALSE(g.warning.empty());
    CHECK(g.slope == doctest::Approx(-0.1).epsilon(1e-12));

    const auto w = decaying_window(t, 3e-3, 3e-6);
    CHECK(w.begin == 26);
    CHECK(w.end == 56);
}

TEST_CASE("plateau and median") {
    RunTrace t;
    t.iterations = 9;
    for (std::size_t i = 0; i < 10; ++i) {
        TraceRecord r;
        r.iter = i;
        r.excess_risk = i < 7 ? 100.0 : 2.0 * static_cast<double>(i);
        t.records.push_back(r);
    }
    CHECK(plateau(t) == doctest::Approx(16.0));
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK_THROWS(median({}));
}
