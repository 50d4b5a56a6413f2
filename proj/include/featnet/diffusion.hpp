#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "featnet/data.hpp"
#include "featnet/kernels.hpp"
#include "featnet/topology.hpp"

namespace featnet {

inline constexpr std::size_t kNoSample = std::numeric_limits<std::size_t>::max();

// Per-agent u and v tables (N x C each). u holds the last tracked score of a
// sample, v the scaled local score K h_{n,k}^T w_k that agent contributed then.
class ScoreMemory {
public:
    ScoreMemory(std::size_t agents, std::size_t samples, std::size_t classes);

    std::size_t agents() const { return K_; }
    std::size_t samples() const { return N_; }
    std::size_t classes() const { return C_; }

    std::span<double> u(std::size_t k, std::size_t n) { return {u_.data() + (k * N_ + n) * C_, C_}; }
    std::span<const double> u(std::size_t k, std::size_t n) const {
        return {u_.data() + (k * N_ + n) * C_, C_};
    }
    std::span<double> v(std::size_t k, std::size_t n) { return {v_.data() + (k * N_ + n) * C_, C_}; }
    std::span<const double> v(std::size_t k, std::size_t n) const {
        return {v_.data() + (k * N_ + n) * C_, C_};
    }
    std::int64_t last_update(std::size_t n) const { return last_update_[n]; }
    void mark_updated(std::size_t n, std::int64_t iter) { last_update_[n] = iter; }

    // max_c |sum_k u - sum_k v| / (1 + |sum_k v|) for sample n.
    double unbiasedness_residual(std::size_t n) const;
    double max_unbiasedness_residual() const;

private:
    std::size_t K_, N_, C_;
    std::vector<double> u_;
    std::vector<double> v_;
    std::vector<std::int64_t> last_update_;
};

// One synchronous neighbor-weighted averaging round over K vectors of `width`.
std::vector<double> consensus_step(const CombinationMatrix& A, std::span<const double> states,
                                   std::size_t width = 1,
                                   kernels::Exec exec = kernels::Exec::serial);

// x'_k = sum_l a(l,k) (x_l + d_new_l - d_old_l).
std::vector<double> dynamic_diffusion_step(const CombinationMatrix& A, std::span<const double> x,
                                           std::span<const double> d_new,
                                           std::span<const double> d_old, std::size_t width = 1,
                                           kernels::Exec exec = kernels::Exec::serial);

// K h_{n,k}^T W_k for every agent, K x C row-major. W is the full M x C weight
// matrix; agent k reads its own block.
std::vector<double> scaled_local_scores(const std::vector<FeatureShard>& shards,
                                        std::span<const double> W, std::size_t classes,
                                        std::size_t n);

struct TrackedScores {
    std::vector<double> z;      // K x C tracked scores
    std::vector<double> local;  // K x C scaled local scores (the new v rows)
};

// One stochastic tracking step for sample n. Does not modify memory; call
// commit_tracked_scores to write u <- z and v <- local.
TrackedScores tracked_score_update(const CombinationMatrix& A, const std::vector<FeatureShard>& shards,
                                   std::span<const double> W, const ScoreMemory& memory,
                                   std::size_t n, kernels::Exec exec = kernels::Exec::serial);
void commit_tracked_scores(ScoreMemory& memory, std::size_t n, const TrackedScores& t,
                           std::int64_t iter);

// One batch of pipeline slots: B samples, each carrying a K x C stage value and
// a K x C tag that passes through untouched.
struct PipelineEntry {
    std::vector<std::size_t> samples;  // kNoSample for warm-up slots
    std::int64_t push_iteration = 0;
    std::vector<double> z;    // K x (B*C), agent-major
    std::vector<double> tag;  // K x (B*C)
};

// J-deep queue shared by all agents. Between iterations it holds J-1 in-flight
// entries (warm-up entries are zero-filled); push_pop makes it J deep, advances
// every stage by one combination step, and pops the oldest.
class PipelineQueue {
public:
    PipelineQueue(std::size_t depth, std::size_t batch, std::size_t agents, std::size_t classes);

    std::size_t depth() const { return J_; }
    std::size_t batch() const { return B_; }
    std::size_t width() const { return B_ * C_; }
    std::size_t in_flight() const { return entries_.size(); }
    // Occurrences of sample n among in-flight entries.
    std::size_t in_flight_count(std::size_t n) const;

    PipelineEntry make_entry() const;
    PipelineEntry push_pop(const CombinationMatrix& A, PipelineEntry pushed,
                           kernels::Exec exec = kernels::Exec::serial);

private:
    std::size_t J_, B_, K_, C_;
    std::deque<PipelineEntry> entries_;  // front = newest
    std::vector<double> scratch_;
};

}  // namespace featnet
