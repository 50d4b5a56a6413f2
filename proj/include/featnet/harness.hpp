#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featnet/algorithms.hpp"
#include "featnet/objective.hpp"
#include "featnet/trace.hpp"

namespace featnet {

struct ReferenceOptions {
    double tol = 1e-10;
    std::size_t max_iterations = 200000;
    std::size_t history = 10;
    std::span<const double> initial;  // empty: start at zero
};

// Minimizes the full regularized risk. Throws std::runtime_error when the
// gradient norm does not reach tol within the iteration cap.
ReferenceSolution compute_reference(const Objective& objective, const ReferenceOptions& opt = {});
ReferenceSolution compute_reference(const Problem& p, const ReferenceOptions& opt = {});

enum class CheckStatus { pass, fail, not_applicable };
std::string to_string(CheckStatus s);

struct InvariantCheck {
    std::string name;
    CheckStatus status = CheckStatus::not_applicable;
    double worst = 0.0;               // largest residual seen
    std::size_t worst_iter = 0;
    std::optional<std::size_t> first_violation;
    double limit = 0.0;
    std::string detail;
};

struct InvariantReport {
    std::vector<InvariantCheck> checks;
    bool passed() const;
    const InvariantCheck* find(const std::string& name) const;
};

struct AuditLimits {
    double unbiasedness = 1e-9;
    double grad_sum = 1e-8;
    double excess_risk_floor = -1e-12;
};

InvariantReport audit_invariants(const RunTrace& trace, const AuditLimits& limits = {});

// Inclusive iteration range used for slope fitting.
struct FitWindow {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct RateFit {
    double slope = 0.0;       // per iteration, log10 excess risk
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    FitWindow window;         // window actually used
    std::string warning;      // set when the window had to shrink
};

// Least squares of log10(excess risk) against iteration over the window. A
// non-positive excess risk truncates the window just before it.
RateFit fit_linear_rate(const RunTrace& trace, FitWindow window);
// Records from the first excess risk below `upper` to the first below `lower`
// (or the last record).
FitWindow decaying_window(const RunTrace& trace, double upper, double lower);

// Mean excess risk over the last `fraction` of the records.
double plateau(const RunTrace& trace, double fraction = 0.2);
double median(std::vector<double> values);

}  // namespace featnet
