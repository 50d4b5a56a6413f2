#include "featnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace featnet {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::naive: return "naive";
        case Algorithm::vrd2: return "vrd2";
        case Algorithm::pvrd2: return "pvrd2";
        case Algorithm::sgd: return "sgd";
        case Algorithm::saga: return "saga";
        case Algorithm::deterministic: return "deterministic";
        case Algorithm::model_distributed: return "model-distributed";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
    for (auto a : {Algorithm::naive, Algorithm::vrd2, Algorithm::pvrd2, Algorithm::sgd, Algorithm::saga,
                   Algorithm::deterministic, Algorithm::model_distributed}) {
        if (to_string(a) == name) return a;
    }
    throw std::invalid_argument("unknown algorithm \"" + name +
                                "\" (expected naive, vrd2, pvrd2, sgd, saga, deterministic or "
                                "model-distributed)");
}

CommCount comm_per_edge_per_iter(Algorithm algorithm, std::size_t J, std::size_t C, std::size_t B,
                                 std::size_t M, std::size_t /*K*/, std::size_t N) {
    if (J == 0 || C == 0 || B == 0) throw std::invalid_argument("J, C and B must be positive");
    const auto j = static_cast<double>(J);
    const auto c = static_cast<double>(C);
    const auto b = static_cast<double>(B);
    switch (algorithm) {
        case Algorithm::pvrd2: return {j * c * b, 2.0 * j * c * b};
        // VRD2 ships u + Kh'w - v once; the v-tag stays local without a pipeline.
        case Algorithm::vrd2:
        case Algorithm::naive: return {c * b, c * b};
        case Algorithm::deterministic: return {static_cast<double>(N) * c, static_cast<double>(N) * c};
        case Algorithm::model_distributed: return {static_cast<double>(M) * c, static_cast<double>(M) * c};
        case Algorithm::sgd:
        case Algorithm::saga: return {0.0, 0.0};
    }
    return {};
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::not_applicable: return "n/a";
    }
    return "unknown";
}

bool InvariantReport::passed() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const InvariantCheck& c) { return c.status == CheckStatus::fail; });
}

const InvariantCheck* InvariantReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

// Upper-bound check over one residual channel; NaN entries are skipped.
template <typename Get>
InvariantCheck residual_check(const std::string& name, const RunTrace& t, bool applicable, double limit,
                              Get get) {
    InvariantCheck c;
    c.name = name;
    c.limit = limit;
    if (!applicable) {
        c.detail = "not tracked by " + to_string(t.algorithm);
        return c;
    }
    std::size_t seen = 0;
    for (const auto& r : t.records) {
        const double v = get(r);
        if (std::isnan(v)) continue;
        ++seen;
        if (seen == 1 || v > c.worst) {
            c.worst = v;
            c.worst_iter = r.iter;
        }
        if (!(v <= limit) && !c.first_violation) c.first_violation = r.iter;
    }
    if (seen == 0) {
        c.detail = "no samples recorded";
        return c;
    }
    c.status = c.first_violation ? CheckStatus::fail : CheckStatus::pass;
    return c;
}

}  // namespace

InvariantReport audit_invariants(const RunTrace& t, const AuditLimits& limits) {
    InvariantReport rep;
    rep.checks.push_back(residual_check("unbiasedness", t, t.tracks_unbiasedness, limits.unbiasedness,
                                        [](const TraceRecord& r) { return r.unbiasedness; }));
    rep.checks.push_back(residual_check("grad_sum", t, t.tracks_grad_sum, limits.grad_sum,
                                        [](const TraceRecord& r) { return r.grad_sum_drift; }));

    {
        InvariantCheck c;
        c.name = "excess_risk_nonnegative";
        c.limit = limits.excess_risk_floor;
        bool any = false;
        for (const auto& r : t.records) {
            if (std::isnan(r.excess_risk)) continue;
            if (!any || r.excess_risk < c.worst) {
                c.worst = r.excess_risk;
                c.worst_iter = r.iter;
            }
            any = true;
            if (r.excess_risk < limits.excess_risk_floor && !c.first_violation) c.first_violation = r.iter;
        }
        if (any) c.status = c.first_violation ? CheckStatus::fail : CheckStatus::pass;
        else c.detail = "no reference solution";
        rep.checks.push_back(c);
    }

    {
        InvariantCheck c;
        c.name = "trace_completeness";
        c.status = CheckStatus::pass;
        std::size_t next_due = 0;
        std::size_t prev = 0;
        std::size_t idx = 0;
        for (const auto& r : t.records) {
            if (idx > 0 && r.iter <= prev) {
                c.status = CheckStatus::fail;
                c.first_violation = r.iter;
                c.detail = "iteration indices not strictly increasing";
                break;
            }
            if (r.iter > next_due) {
                c.status = CheckStatus::fail;
                c.first_violation = next_due;
                c.detail = "missing record for iteration " + std::to_string(next_due);
                break;
            }
            if (r.iter == next_due) next_due += t.record_every;
            prev = r.iter;
            ++idx;
        }
        if (c.status == CheckStatus::pass &&
            (t.records.empty() || t.records.back().iter != t.iterations || next_due <= t.iterations)) {
            c.status = CheckStatus::fail;
            c.detail = "trace ends before the final iteration";
        }
        rep.checks.push_back(c);
    }

    {
        InvariantCheck c;
        c.name = "accounting";
        c.status = CheckStatus::pass;
        for (const auto& r : t.records) {
            const auto it = static_cast<double>(r.iter);
            if (r.comm_net != it * t.comm_per_iter.net || r.comm_gross != it * t.comm_per_iter.gross ||
                r.gradient_evals != r.iter * t.gradient_evals_per_iter ||
                r.combination_ops != r.iter * t.combination_ops_per_iter) {
                c.status = CheckStatus::fail;
                c.first_violation = r.iter;
                c.detail = "cumulative counters disagree with the per-iteration formula";
                break;
            }
        }
        rep.checks.push_back(c);
    }
    return rep;
}

FitWindow decaying_window(const RunTrace& t, double upper, double lower) {
    FitWindow w{0, t.iterations};
    bool started = false;
    for (const auto& r : t.records) {
        if (std::isnan(r.excess_risk)) continue;
        if (!started && r.excess_risk < upper) {
            w.begin = r.iter;
            started = true;
        }
        if (started && r.excess_risk < lower) {
            w.end = r.iter;
            return w;
        }
    }
    if (!started) w.begin = t.records.empty() ? 0 : t.records.front().iter;
    w.end = t.records.empty() ? 0 : t.records.back().iter;
    return w;
}

RateFit fit_linear_rate(const RunTrace& t, FitWindow window) {
    RateFit fit;
    fit.window = window;
    std::vector<double> xs, ys;
    for (const auto& r : t.records) {
        if (r.iter < window.begin || r.iter > window.end) continue;
        if (!(r.excess_risk > 0.0)) {
            std::ostringstream msg;
            msg << "excess risk not positive at iteration " << r.iter << "; window shrunk to ["
                << window.begin << ", " << (xs.empty() ? window.begin : static_cast<std::size_t>(xs.back()))
                << "]";
            fit.warning = msg.str();
            break;
        }
        xs.push_back(static_cast<double>(r.iter));
        ys.push_back(std::log10(r.excess_risk));
    }
    fit.points = xs.size();
    if (!xs.empty()) fit.window.end = static_cast<std::size_t>(xs.back());
    if (xs.size() < 2) {
        if (fit.warning.empty()) fit.warning = "fewer than two points in the window";
        return fit;
    }
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

double plateau(const RunTrace& t, double fraction) {
    if (t.records.empty()) throw std::invalid_argument("plateau of an empty trace");
    const auto cut = static_cast<std::size_t>(
        std::floor(static_cast<double>(t.iterations) * (1.0 - fraction)));
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : t.records) {
        if (r.iter >= cut && r.iter > 0 && !std::isnan(r.excess_risk)) {
            sum += r.excess_risk;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("no records in the plateau window");
    return sum / static_cast<double>(n);
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of nothing");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace featnet
