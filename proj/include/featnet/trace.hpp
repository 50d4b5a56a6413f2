#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace featnet {

enum class Algorithm { naive, vrd2, pvrd2, sgd, saga, deterministic, model_distributed };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

// Scalars exchanged over one edge per iteration. `net` follows the convention
// of counting only the tracked-score payload; `gross` adds the v tags that
// travel with the pipeline slots.
struct CommCount {
    double net = 0.0;
    double gross = 0.0;
};

// PVRD2: J*C*B (gross 2*J*C*B). VRD2 and naive: C*B. Deterministic baseline:
// N*C. Model-distributed baselines (full model exchange): M*C. Centralized
// oracles communicate nothing.
CommCount comm_per_edge_per_iter(Algorithm algorithm, std::size_t J, std::size_t C, std::size_t B,
                                 std::size_t M, std::size_t K, std::size_t N = 0);

inline constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

struct TraceRecord {
    std::size_t iter = 0;
    double risk = 0.0;
    double excess_risk = kNotApplicable;
    double msd = kNotApplicable;
    double comm_net = 0.0;     // cumulative per edge
    double comm_gross = 0.0;   // cumulative per edge
    std::uint64_t gradient_evals = 0;    // cumulative per agent
    std::uint64_t combination_ops = 0;   // cumulative per agent
    double unbiasedness = kNotApplicable;   // max since the previous record
    double grad_sum_drift = kNotApplicable; // only at checkpoints
    std::uint64_t collisions = 0;           // cumulative
};

struct RunTrace {
    Algorithm algorithm = Algorithm::vrd2;
    std::size_t J = 1, B = 1, C = 1, M = 0, K = 1, N = 0;
    double step_size = 0.0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    std::size_t record_every = 1;
    bool tracks_unbiasedness = false;
    bool tracks_grad_sum = false;
    CommCount comm_per_iter;
    std::uint64_t gradient_evals_per_iter = 0;
    std::uint64_t combination_ops_per_iter = 0;
    std::vector<TraceRecord> records;
    std::vector<double> final_weights;
    std::vector<std::string> warnings;
    nlohmann::json config;  // resolved config echo
};

}  // namespace featnet
