#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "featnet/data.hpp"
#include "featnet/kernels.hpp"
#include "featnet/model.hpp"

namespace featnet {

// R(W) = (1/N) sum_n Q(sum_k h_{n,k}^T W_k; label_n) + sum_k r(W_k), evaluated
// centrally over the sharded data. W is the full M x C weight matrix; block k
// occupies rows [offset_k, offset_k + width_k). Holds references only.
class Objective {
public:
    Objective(const std::vector<FeatureShard>& shards, const LossModel& loss, L2Regularizer reg,
              kernels::Exec exec = kernels::Exec::serial);

    std::size_t dim() const { return M_ * C_; }
    std::size_t samples() const { return N_; }
    std::size_t features() const { return M_; }
    std::size_t classes() const { return C_; }
    const std::vector<FeatureShard>& shards() const { return *shards_; }
    const LossModel& loss() const { return *loss_; }
    const L2Regularizer& reg() const { return reg_; }

    // N x C aggregated scores.
    void scores(std::span<const double> W, std::span<double> out) const;
    double risk(std::span<const double> W) const;
    // Returns the risk and writes the gradient.
    double risk_and_gradient(std::span<const double> W, std::span<double> grad) const;

    // Estimated constants: nu = 2 coeff, L = delta max ||h||^2 + eta, h4 = mean ||h||^4.
    ModelConstants constants() const;

private:
    const std::vector<FeatureShard>* shards_;
    const LossModel* loss_;
    L2Regularizer reg_;
    kernels::Exec exec_;
    std::size_t N_ = 0, M_ = 0, C_ = 0;
};

// Minimizer of the full regularized risk, used to report excess risk.
struct ReferenceSolution {
    std::vector<double> w_star;  // M x C
    double risk_star = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    std::string solver;
};

}  // namespace featnet
