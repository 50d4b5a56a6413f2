#include "featnet/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace featnet {

ScoreMemory::ScoreMemory(std::size_t agents, std::size_t samples, std::size_t classes)
    : K_(agents),
      N_(samples),
      C_(classes),
      u_(agents * samples * classes, 0.0),
      v_(agents * samples * classes, 0.0),
      last_update_(samples, -1) {}

double ScoreMemory::unbiasedness_residual(std::size_t n) const {
    double worst = 0.0;
    for (std::size_t c = 0; c < C_; ++c) {
        double su = 0.0;
        double sv = 0.0;
        for (std::size_t k = 0; k < K_; ++k) {
            su += u(k, n)[c];
            sv += v(k, n)[c];
        }
        worst = std::max(worst, std::abs(su - sv) / (1.0 + std::abs(sv)));
    }
    return worst;
}

double ScoreMemory::max_unbiasedness_residual() const {
    double worst = 0.0;
    for (std::size_t n = 0; n < N_; ++n) worst = std::max(worst, unbiasedness_residual(n));
    return worst;
}

std::vector<double> consensus_step(const CombinationMatrix& A, std::span<const double> states,
                                   std::size_t width, kernels::Exec exec) {
    std::vector<double> out(states.size());
    kernels::combine(A, states, out, width, exec);
    return out;
}

std::vector<double> dynamic_diffusion_step(const CombinationMatrix& A, std::span<const double> x,
                                           std::span<const double> d_new,
                                           std::span<const double> d_old, std::size_t width,
                                           kernels::Exec exec) {
    if (d_new.size() != x.size() || d_old.size() != x.size()) {
        throw std::invalid_argument("dynamic_diffusion_step: state and signal sizes differ");
    }
    std::vector<double> pre(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pre[i] = x[i] + d_new[i] - d_old[i];
    return consensus_step(A, pre, width, exec);
}

std::vector<double> scaled_local_scores(const std::vector<FeatureShard>& shards,
                                        std::span<const double> W, std::size_t classes,
                                        std::size_t n) {
    const std::size_t K = shards.size();
    const double scale = static_cast<double>(K);
    std::vector<double> out(K * classes);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& s = shards[k];
        const auto h = s.row(n);
        const double* Wk = W.data() + s.offset * classes;
        for (std::size_t c = 0; c < classes; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < s.width; ++j) acc += h[j] * Wk[j * classes + c];
            out[k * classes + c] = scale * acc;
        }
    }
    return out;
}

TrackedScores tracked_score_update(const CombinationMatrix& A, const std::vector<FeatureShard>& shards,
                                   std::span<const double> W, const ScoreMemory& memory,
                                   std::size_t n, kernels::Exec exec) {
    const std::size_t K = shards.size();
    const std::size_t C = memory.classes();
    if (A.size() != K || memory.agents() != K) {
        throw std::invalid_argument("tracked_score_update: agent counts differ");
    }
    TrackedScores t;
    t.local = scaled_local_scores(shards, W, C, n);
    std::vector<double> pre(K * C);
    for (std::size_t k = 0; k < K; ++k) {
        const auto u = memory.u(k, n);
        const auto v = memory.v(k, n);
        for (std::size_t c = 0; c < C; ++c) pre[k * C + c] = u[c] + t.local[k * C + c] - v[c];
    }
    t.z = consensus_step(A, pre, C, exec);
    return t;
}

void commit_tracked_scores(ScoreMemory& memory, std::size_t n, const TrackedScores& t,
                           std::int64_t iter) {
    const std::size_t C = memory.classes();
    for (std::size_t k = 0; k < memory.agents(); ++k) {
        std::copy_n(t.z.begin() + static_cast<std::ptrdiff_t>(k * C), C, memory.u(k, n).begin());
        std::copy_n(t.local.begin() + static_cast<std::ptrdiff_t>(k * C), C, memory.v(k, n).begin());
    }
    memory.mark_updated(n, iter);
}

PipelineQueue::PipelineQueue(std::size_t depth, std::size_t batch, std::size_t agents,
                             std::size_t classes)
    : J_(depth), B_(batch), K_(agents), C_(classes) {
    if (depth < 1) throw std::invalid_argument("pipeline depth J must be >= 1");
    if (batch < 1) throw std::invalid_argument("mini-batch B must be >= 1");
    for (std::size_t j = 1; j < J_; ++j) {
        auto e = make_entry();
        e.push_iteration = 1 - static_cast<std::int64_t>(j);
        entries_.push_back(std::move(e));
    }
    scratch_.resize(K_ * B_ * C_);
}

std::size_t PipelineQueue::in_flight_count(std::size_t n) const {
    std::size_t count = 0;
    for (const auto& e : entries_) count += static_cast<std::size_t>(std::count(e.samples.begin(), e.samples.end(), n));
    return count;
}

PipelineEntry PipelineQueue::make_entry() const {
    PipelineEntry e;
    e.samples.assign(B_, kNoSample);
    e.z.assign(K_ * B_ * C_, 0.0);
    e.tag.assign(K_ * B_ * C_, 0.0);
    return e;
}

PipelineEntry PipelineQueue::push_pop(const CombinationMatrix& A, PipelineEntry pushed,
                                      kernels::Exec exec) {
    if (A.size() != K_ || pushed.samples.size() != B_ || pushed.z.size() != K_ * B_ * C_ ||
        pushed.tag.size() != pushed.z.size()) {
        throw std::invalid_argument("pipeline entry has the wrong shape");
    }
    entries_.push_front(std::move(pushed));
    // Every stage takes one combination step in the same exchange round.
    for (auto& e : entries_) {
        kernels::combine(A, e.z, scratch_, width(), exec);
        std::swap(e.z, scratch_);
    }
    PipelineEntry popped = std::move(entries_.back());
    entries_.pop_back();
    return popped;
}

}  // namespace featnet
