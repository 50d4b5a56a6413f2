#include "featnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace featnet {

namespace {

// ln(1 + exp(x)) without overflow.
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

std::size_t class_index(double label, std::size_t classes) {
    if (!(label >= 0.0) || label != std::floor(label) || label >= static_cast<double>(classes)) {
        throw std::invalid_argument("softmax label must be an integer class in [0, C)");
    }
    return static_cast<std::size_t>(label);
}

}  // namespace

double logistic_loss(double z, double label) { return softplus(-label * z); }

double logistic_score_grad(double z, double label) {
    const double t = label * z;
    // -label / (1 + exp(t)), evaluated on the side that does not overflow.
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return -label * e / (1.0 + e);
    }
    return -label / (1.0 + std::exp(t));
}

double LogisticLoss::loss(std::span<const double> z, double label) const {
    return logistic_loss(z[0], label);
}

void LogisticLoss::score_grad(std::span<const double> z, double label, std::span<double> out) const {
    out[0] = logistic_score_grad(z[0], label);
}

void LogisticLoss::check_label(double label) const {
    if (label != 1.0 && label != -1.0) {
        throw std::invalid_argument("logistic labels must be -1 or +1");
    }
}

SoftmaxLoss::SoftmaxLoss(std::size_t classes) : classes_(classes) {
    if (classes < 2) throw std::invalid_argument("softmax needs at least 2 classes");
}

double SoftmaxLoss::loss(std::span<const double> z, double label) const {
    const auto y = class_index(label, classes_);
    const double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - zmax);
    return std::log(s) + zmax - z[y];
}

void SoftmaxLoss::score_grad(std::span<const double> z, double label, std::span<double> out) const {
    const auto y = class_index(label, classes_);
    const double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) {
        out[c] = std::exp(z[c] - zmax);
        s += out[c];
    }
    for (std::size_t c = 0; c < classes_; ++c) out[c] /= s;
    out[y] -= 1.0;
}

void SoftmaxLoss::check_label(double label) const { class_index(label, classes_); }

double SquaredLoss::loss(std::span<const double> z, double label) const {
    const double r = z[0] - label;
    return 0.5 * r * r;
}

void SquaredLoss::score_grad(std::span<const double> z, double label, std::span<double> out) const {
    out[0] = z[0] - label;
}

void SquaredLoss::check_label(double label) const {
    if (!std::isfinite(label)) throw std::invalid_argument("ridge labels must be finite");
}

std::unique_ptr<LossModel> make_loss(const std::string& name, std::size_t classes) {
    if (name == "logistic") return std::make_unique<LogisticLoss>();
    if (name == "softmax") return std::make_unique<SoftmaxLoss>(classes);
    if (name == "ridge") return std::make_unique<SquaredLoss>();
    throw std::invalid_argument("unknown loss \"" + name + "\" (expected logistic, softmax or ridge)");
}

double softmax_prob(std::span<const double> z, std::size_t label) {
    if (z.size() < 2) throw std::invalid_argument("softmax_prob needs at least 2 classes");
    if (label >= z.size()) throw std::invalid_argument("softmax_prob label out of range");
    const double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - zmax);
    return std::exp(z[label] - zmax) / s;
}

std::vector<double> softmax_column_grads(std::span<const double> z, std::size_t label,
                                         std::span<const double> h_block,
                                         std::span<const double> W_block, double coeff) {
    const std::size_t C = z.size();
    const std::size_t Mk = h_block.size();
    if (W_block.size() != Mk * C) {
        throw std::invalid_argument("softmax_column_grads: weight block must be features x classes");
    }
    if (label >= C) throw std::invalid_argument("softmax_column_grads: label out of range");
    std::vector<double> prob(C);
    for (std::size_t c = 0; c < C; ++c) prob[c] = softmax_prob(z, c);
    prob[label] -= 1.0;
    std::vector<double> g(Mk * C);
    for (std::size_t j = 0; j < Mk; ++j) {
        for (std::size_t c = 0; c < C; ++c) {
            g[j * C + c] = prob[c] * h_block[j] + coeff * W_block[j * C + c];
        }
    }
    return g;
}

double L2Regularizer::value(std::span<const double> w) const {
    double s = 0.0;
    for (double v : w) s += v * v;
    return coeff * s;
}

void L2Regularizer::grad(std::span<const double> w, std::span<double> out) const {
    const double two_c = 2.0 * coeff;
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = two_c * w[i];
}

L2Regularizer l2_regularizer(double coeff) {
    if (!(coeff >= 0.0) || !std::isfinite(coeff)) {
        throw std::invalid_argument("regularization coefficient must be finite and >= 0");
    }
    return L2Regularizer{coeff};
}

}  // namespace featnet
