#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace featnet {

// Loss Q(z; label) on the aggregated score vector z (length classes()).
// Scalar-score losses are the classes() == 1 case.
class LossModel {
public:
    virtual ~LossModel() = default;

    virtual std::string name() const = 0;
    virtual std::size_t classes() const = 0;
    virtual double loss(std::span<const double> z, double label) const = 0;
    // Writes dQ/dz into out (length classes()).
    virtual void score_grad(std::span<const double> z, double label, std::span<double> out) const = 0;
    // Lipschitz constant of score_grad in z.
    virtual double delta() const = 0;
    // Throws std::invalid_argument when a label is not valid for this loss.
    virtual void check_label(double label) const = 0;
};

// ln(1 + exp(-label * z)), label in {-1, +1}.
class LogisticLoss final : public LossModel {
public:
    std::string name() const override { return "logistic"; }
    std::size_t classes() const override { return 1; }
    double loss(std::span<const double> z, double label) const override;
    void score_grad(std::span<const double> z, double label, std::span<double> out) const override;
    double delta() const override { return 0.25; }
    void check_label(double label) const override;
};

// -ln softmax_prob(z, label), label in {0, ..., C-1}.
class SoftmaxLoss final : public LossModel {
public:
    explicit SoftmaxLoss(std::size_t classes);
    std::string name() const override { return "softmax"; }
    std::size_t classes() const override { return classes_; }
    double loss(std::span<const double> z, double label) const override;
    void score_grad(std::span<const double> z, double label, std::span<double> out) const override;
    double delta() const override { return 0.5; }
    void check_label(double label) const override;

private:
    std::size_t classes_;
};

// (z - label)^2 / 2 for real labels.
class SquaredLoss final : public LossModel {
public:
    std::string name() const override { return "ridge"; }
    std::size_t classes() const override { return 1; }
    double loss(std::span<const double> z, double label) const override;
    void score_grad(std::span<const double> z, double label, std::span<double> out) const override;
    double delta() const override { return 1.0; }
    void check_label(double label) const override;
};

// "logistic" | "softmax" | "ridge"; classes is only read for softmax.
std::unique_ptr<LossModel> make_loss(const std::string& name, std::size_t classes = 1);

double logistic_loss(double z, double label);
double logistic_score_grad(double z, double label);

// exp(z[label]) / sum_c exp(z[c]) with max-subtraction.
double softmax_prob(std::span<const double> z, std::size_t label);

// Per-column gradients of -ln softmax_prob(z, label) + (coeff / 2) ||W||_F^2 with
// respect to the agent's weight block W (features x classes, row-major), where
// z depends on W through z[c] += h^T W[:, c]. Output uses the same layout as W.
std::vector<double> softmax_column_grads(std::span<const double> z, std::size_t label,
                                         std::span<const double> h_block,
                                         std::span<const double> W_block, double coeff);

// coeff * ||w||^2 applied per agent block.
struct L2Regularizer {
    double coeff = 0.0;

    double value(std::span<const double> w) const;
    void grad(std::span<const double> w, std::span<double> out) const;
    double eta() const { return 2.0 * coeff; }
};

L2Regularizer l2_regularizer(double coeff);

// Declared or estimated constants used for step-size guidance.
struct ModelConstants {
    double nu = 0.0;      // strong convexity of the total risk
    double L = 0.0;       // weight-gradient Lipschitz bound
    double delta = 0.0;   // score-gradient Lipschitz bound
    double eta = 0.0;     // regularizer gradient Lipschitz bound
    double h4 = 0.0;      // mean ||h_n||^4
};

}  // namespace featnet
