#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "featnet/data.hpp"
#include "featnet/kernels.hpp"
#include "featnet/model.hpp"
#include "featnet/objective.hpp"
#include "featnet/topology.hpp"
#include "featnet/trace.hpp"

namespace featnet {

// Sharded data, network and model. Every agent k owns shards[k].
struct Problem {
    std::vector<FeatureShard> shards;
    CombinationMatrix A;
    std::shared_ptr<const LossModel> loss;
    L2Regularizer reg;

    std::size_t K() const { return shards.size(); }
    std::size_t N() const { return shards.front().N; }
    std::size_t M() const;
    std::size_t C() const { return loss->classes(); }
};

// Validates labels against the loss and agent counts against A.
Problem make_problem(const Dataset& data, const Partition& partition, CombinationMatrix A,
                     std::shared_ptr<const LossModel> loss, L2Regularizer reg);
// Single agent holding every feature (A = [1]); used by the centralized oracles.
Problem make_centralized_problem(const Dataset& data, std::shared_ptr<const LossModel> loss,
                                 L2Regularizer reg);

enum class Sampling { uniform, cyclic };

// Shared-seed index stream: every agent that builds a Sampler from the same
// seed draws the same sequence.
class Sampler {
public:
    Sampler(std::size_t N, std::uint64_t seed, Sampling mode = Sampling::uniform);
    std::size_t next();

private:
    std::size_t N_;
    Sampling mode_;
    std::mt19937_64 rng_;
    std::uniform_int_distribution<std::size_t> dist_;
    std::size_t cursor_ = 0;
};

struct FaultInjection {
    std::size_t iteration = 1;  // corrupt u after this iteration's update
    double amount = 1.0;        // added to agent 0's u row of the last touched sample
};

struct RunOptions {
    double step_size = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 1;
    std::size_t J = 1;
    std::size_t B = 1;
    Sampling sampling = Sampling::uniform;
    std::size_t record_every = 1;
    std::size_t grad_sum_checkpoints = 10;
    kernels::Exec exec = kernels::Exec::serial;
    const ReferenceSolution* reference = nullptr;
    std::optional<FaultInjection> fault;
    // Called after every iteration with the full M x C weights.
    std::function<void(std::size_t, std::span<const double>)> observer;
    double divergence_threshold = 1e12;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t iteration, double norm);
    std::size_t iteration() const { return iteration_; }

private:
    std::size_t iteration_;
};

// Single combination of the agents' scaled local scores, plain SGD step.
RunTrace run_naive(const Problem& p, const RunOptions& opt);
// Stochastic dynamic diffusion with SAGA correction.
RunTrace run_vrd2(const Problem& p, const RunOptions& opt);
// VRD2 with a J-deep consensus pipeline and mini-batches of B samples.
RunTrace run_pvrd2(const Problem& p, const RunOptions& opt);
// Dynamic diffusion over all N scores per iteration plus a full-gradient step.
RunTrace run_deterministic_baseline(const Problem& p, const RunOptions& opt);

RunTrace run_centralized_sgd(const Dataset& data, std::shared_ptr<const LossModel> loss,
                             L2Regularizer reg, const RunOptions& opt);
RunTrace run_centralized_saga(const Dataset& data, std::shared_ptr<const LossModel> loss,
                              L2Regularizer reg, const RunOptions& opt);
// Same oracles on an existing problem's data (its network is ignored).
RunTrace run_centralized_sgd(const Problem& p, const RunOptions& opt);
RunTrace run_centralized_saga(const Problem& p, const RunOptions& opt);

RunTrace run_algorithm(Algorithm a, const Problem& p, const RunOptions& opt);

struct RateBound {
    double rho = 0.0;
    double network_term = 0.0;    // 1 - (1 - lambda^J) / (2N)
    double convexity_term = 0.0;  // 1 - mu nu / 5   (J = 1 variant: / 4)
    bool network_limited() const { return network_term >= convexity_term; }
};

RateBound rate_bound(double lambda, std::size_t J, std::size_t N, double mu, double nu);
// J = 1 variant for VRD2.
RateBound corollary_rate_bound(double lambda, std::size_t N, double mu, double nu);

// Step-size bounds that keep the linear-rate argument valid.
struct StepGuidance {
    double quarter_nu = 0.0;     // 1 / (4 nu)
    double half_nu_n = 0.0;      // 1 / (2 nu N)
    double regularizer = 0.0;    // nu / (48 eta^2)
    double smoothness = 0.0;     // nu / (8 L^2 + 20 delta^2 h4)
    double bound() const;
};

StepGuidance step_guidance(const ModelConstants& c, std::size_t N);
// factor * bound(); throws when nu is not positive.
double default_step_size(const ModelConstants& c, std::size_t N, double factor);

}  // namespace featnet
