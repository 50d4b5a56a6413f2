#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "featnet/harness.hpp"

namespace featnet {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct Pair {
    std::vector<double> s, y;
    double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> lbfgs_direction(const std::deque<Pair>& mem, const std::vector<double>& g) {
    std::vector<double> q = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
        alpha[i] = mem[i].rho * dot(mem[i].s, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * mem[i].y[j];
    }
    if (!mem.empty()) {
        const auto& last = mem.back();
        const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (auto& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * dot(mem[i].y, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[i] - beta) * mem[i].s[j];
    }
    for (auto& v : q) v = -v;
    return q;
}

}  // namespace

ReferenceSolution compute_reference(const Objective& objective, const ReferenceOptions& opt) {
    const std::size_t d = objective.dim();
    std::vector<double> w(d, 0.0);
    if (!opt.initial.empty()) {
        if (opt.initial.size() != d) throw std::invalid_argument("initial point has the wrong dimension");
        std::copy(opt.initial.begin(), opt.initial.end(), w.begin());
    }
    std::vector<double> g(d), g_new(d), w_new(d);
    double f = objective.risk_and_gradient(w, g);
    std::deque<Pair> mem;

    std::size_t it = 0;
    double gnorm = norm(g);
    while (gnorm > opt.tol && it < opt.max_iterations) {
        ++it;
        auto p = lbfgs_direction(mem, g);
        double slope = dot(p, g);
        if (!(slope < 0.0)) {
            mem.clear();
            p = g;
            for (auto& v : p) v = -v;
            slope = -gnorm * gnorm;
        }
        double step = mem.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
        bool accepted = false;
        double f_new = f;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t j = 0; j < d; ++j) w_new[j] = w[j] + step * p[j];
            f_new = objective.risk_and_gradient(w_new, g_new);
            // Near the optimum the decrease drowns in rounding; accept any step
            // that does not raise f beyond noise and shrinks the gradient.
            if (f_new <= f + 1e-4 * step * slope ||
                (f_new <= f + 1e-13 * std::abs(f) && norm(g_new) < gnorm)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (mem.empty()) break;
            mem.clear();
            continue;
        }
        Pair pr;
        pr.s.resize(d);
        pr.y.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            pr.s[j] = w_new[j] - w[j];
            pr.y[j] = g_new[j] - g[j];
        }
        const double sy = dot(pr.s, pr.y);
        if (sy > 1e-300) {
            pr.rho = 1.0 / sy;
            mem.push_back(std::move(pr));
            if (mem.size() > opt.history) mem.pop_front();
        }
        w.swap(w_new);
        g.swap(g_new);
        f = f_new;
        gnorm = norm(g);
    }
    if (gnorm > opt.tol) {
        std::ostringstream msg;
        msg << "reference solver stopped at ||grad R|| = " << gnorm << " after " << it
            << " iterations (target " << opt.tol
            << "); increase reg_coeff or metrics.reference_max_iters";
        throw std::runtime_error(msg.str());
    }
    ReferenceSolution r;
    r.risk_star = objective.risk(w);
    r.w_star = std::move(w);
    r.grad_norm = gnorm;
    r.iterations = it;
    r.solver = "lbfgs-backtracking";
    return r;
}

ReferenceSolution compute_reference(const Problem& p, const ReferenceOptions& opt) {
    const Objective objective(p.shards, *p.loss, p.reg);
    return compute_reference(objective, opt);
}

}  // namespace featnet
