#include "featnet/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace featnet {

Objective::Objective(const std::vector<FeatureShard>& shards, const LossModel& loss,
                     L2Regularizer reg, kernels::Exec exec)
    : shards_(&shards), loss_(&loss), reg_(reg), exec_(exec) {
    if (shards.empty()) throw std::invalid_argument("objective needs at least one shard");
    N_ = shards.front().N;
    C_ = loss.classes();
    for (const auto& s : shards) {
        if (s.N != N_) throw std::invalid_argument("shards disagree on sample count");
        if (s.offset != M_) throw std::invalid_argument("shards must be contiguous and in order");
        M_ += s.width;
    }
}

void Objective::scores(std::span<const double> W, std::span<double> out) const {
    if (W.size() != dim() || out.size() != N_ * C_) {
        throw std::invalid_argument("Objective::scores: size mismatch");
    }
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> part(N_ * C_);
    for (const auto& s : *shards_) {
        kernels::scores(s.features, N_, s.width, W.subspan(s.offset * C_, s.width * C_), C_, 1.0,
                        part, exec_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += part[i];
    }
}

double Objective::risk(std::span<const double> W) const {
    std::vector<double> z(N_ * C_);
    scores(W, z);
    const auto& labels = shards_->front().labels;
    double data_term = 0.0;
    for (std::size_t n = 0; n < N_; ++n) {
        data_term += loss_->loss(std::span<const double>(z).subspan(n * C_, C_), labels[n]);
    }
    double reg_term = 0.0;
    for (const auto& s : *shards_) reg_term += reg_.value(W.subspan(s.offset * C_, s.width * C_));
    return data_term / static_cast<double>(N_) + reg_term;
}

double Objective::risk_and_gradient(std::span<const double> W, std::span<double> grad) const {
    if (grad.size() != dim()) throw std::invalid_argument("gradient buffer has the wrong size");
    std::vector<double> z(N_ * C_);
    scores(W, z);
    const auto& labels = shards_->front().labels;
    const double inv_n = 1.0 / static_cast<double>(N_);
    std::vector<double> coeff(N_ * C_);
    double data_term = 0.0;
    for (std::size_t n = 0; n < N_; ++n) {
        const auto zn = std::span<const double>(z).subspan(n * C_, C_);
        data_term += loss_->loss(zn, labels[n]);
        loss_->score_grad(zn, labels[n], std::span<double>(coeff).subspan(n * C_, C_));
    }
    for (auto& c : coeff) c *= inv_n;
    double reg_term = 0.0;
    std::vector<double> reg_grad;
    for (const auto& s : *shards_) {
        auto Wk = W.subspan(s.offset * C_, s.width * C_);
        auto Gk = grad.subspan(s.offset * C_, s.width * C_);
        kernels::accumulate_outer(s.features, N_, s.width, coeff, C_, Gk, exec_);
        reg_grad.resize(Wk.size());
        reg_.grad(Wk, reg_grad);
        for (std::size_t i = 0; i < Gk.size(); ++i) Gk[i] += reg_grad[i];
        reg_term += reg_.value(Wk);
    }
    return data_term * inv_n + reg_term;
}

ModelConstants Objective::constants() const {
    ModelConstants c;
    c.delta = loss_->delta();
    c.eta = reg_.eta();
    c.nu = 2.0 * reg_.coeff;
    double max_norm = 0.0;
    double h4 = 0.0;
    for (double v : shards_->front().row_norms_sq) {
        max_norm = std::max(max_norm, v);
        h4 += v * v;
    }
    c.h4 = h4 / static_cast<double>(N_);
    c.L = c.delta * max_norm + c.eta;
    return c;
}

}  // namespace featnet
