#include "featnet/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "featnet/diffusion.hpp"

namespace featnet {

std::size_t Problem::M() const {
    std::size_t m = 0;
    for (const auto& s : shards) m += s.width;
    return m;
}

Problem make_problem(const Dataset& data, const Partition& partition, CombinationMatrix A,
                     std::shared_ptr<const LossModel> loss, L2Regularizer reg) {
    data.validate();
    if (!loss) throw std::invalid_argument("problem needs a loss model");
    if (partition.agents() != A.size()) {
        throw std::invalid_argument("partition has " + std::to_string(partition.agents()) +
                                    " agents but the combination matrix is " +
                                    std::to_string(A.size()) + "x" + std::to_string(A.size()));
    }
    for (double y : data.labels) loss->check_label(y);
    return Problem{shard(data, partition), std::move(A), std::move(loss), reg};
}

Problem make_centralized_problem(const Dataset& data, std::shared_ptr<const LossModel> loss,
                                 L2Regularizer reg) {
    return make_problem(data, partition_features(data.M, 1), CombinationMatrix::averaging(1),
                        std::move(loss), reg);
}

Sampler::Sampler(std::size_t N, std::uint64_t seed, Sampling mode)
    : N_(N), mode_(mode), rng_(seed), dist_(0, N == 0 ? 0 : N - 1) {
    if (N == 0) throw std::invalid_argument("sampler needs N >= 1");
}

std::size_t Sampler::next() {
    if (mode_ == Sampling::cyclic) {
        const auto n = cursor_;
        cursor_ = (cursor_ + 1) % N_;
        return n;
    }
    return dist_(rng_);
}

DivergenceError::DivergenceError(std::size_t iteration, double norm)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << "iterates diverged at iteration " << iteration << " (||w|| = " << norm
              << "); reduce the step size";
          return msg.str();
      }()),
      iteration_(iteration) {}

namespace {

using kernels::Exec;

std::uint64_t per_iter_gradient_evals(Algorithm a, std::size_t B, std::size_t N) {
    switch (a) {
        case Algorithm::pvrd2: return B;
        case Algorithm::deterministic: return N;
        default: return 1;
    }
}

std::uint64_t per_iter_combinations(Algorithm a, std::size_t J, std::size_t B, std::size_t N) {
    switch (a) {
        case Algorithm::pvrd2: return J * B;
        case Algorithm::deterministic: return N;
        case Algorithm::naive:
        case Algorithm::vrd2: return 1;
        default: return 0;
    }
}

// Owns the trace and writes metric records at the configured cadence and at
// grad-sum checkpoints.
class Recorder {
public:
    Recorder(Algorithm a, const Problem& p, const RunOptions& opt)
        : p_(p), opt_(opt), objective_(p.shards, *p.loss, p.reg, opt.exec) {
        if (opt.step_size <= 0.0 || !std::isfinite(opt.step_size)) {
            throw std::invalid_argument("step size must be positive and finite");
        }
        if (opt.record_every == 0) throw std::invalid_argument("record_every must be >= 1");
        trace_.algorithm = a;
        trace_.J = a == Algorithm::pvrd2 ? opt.J : 1;
        trace_.B = a == Algorithm::pvrd2 ? opt.B : 1;
        trace_.C = p.C();
        trace_.M = p.M();
        trace_.K = p.K();
        trace_.N = p.N();
        trace_.step_size = opt.step_size;
        trace_.seed = opt.seed;
        trace_.iterations = opt.iterations;
        trace_.record_every = opt.record_every;
        trace_.tracks_unbiasedness = a == Algorithm::vrd2 || a == Algorithm::pvrd2;
        trace_.tracks_grad_sum = a == Algorithm::vrd2 || a == Algorithm::pvrd2 || a == Algorithm::saga;
        trace_.comm_per_iter =
            comm_per_edge_per_iter(a, trace_.J, trace_.C, trace_.B, trace_.M, trace_.K, trace_.N);
        trace_.gradient_evals_per_iter = per_iter_gradient_evals(a, trace_.B, trace_.N);
        trace_.combination_ops_per_iter = per_iter_combinations(a, trace_.J, trace_.B, trace_.N);
        if (opt.reference && opt.reference->w_star.size() != objective_.dim()) {
            throw std::invalid_argument("reference solution has the wrong dimension");
        }
        const auto constants = objective_.constants();
        if (constants.nu > 0.0) {
            const double bound = step_guidance(constants, p.N()).bound();
            if (opt.step_size > bound) {
                std::ostringstream msg;
                msg << "step size " << opt.step_size << " exceeds the linear-rate guidance bound "
                    << bound;
                trace_.warnings.push_back(msg.str());
            }
        }
        if (trace_.tracks_grad_sum && opt.grad_sum_checkpoints > 0 && opt.iterations > 0) {
            const std::size_t cps = std::min(opt.grad_sum_checkpoints, opt.iterations);
            for (std::size_t c = 1; c <= cps; ++c) {
                checkpoints_.push_back((c * opt.iterations + cps - 1) / cps);
            }
        }
    }

    bool checkpoint(std::size_t iter) const {
        return std::binary_search(checkpoints_.begin(), checkpoints_.end(), iter);
    }

    bool due(std::size_t iter) const {
        return iter % opt_.record_every == 0 || iter == opt_.iterations || checkpoint(iter);
    }

    void note_unbiasedness(double r) { pending_unbias_ = std::max(pending_unbias_, r); }
    void note_collision() { ++collisions_; }

    void record(std::size_t iter, std::span<const double> W, double drift = kNotApplicable) {
        TraceRecord r;
        r.iter = iter;
        r.risk = objective_.risk(W);
        if (opt_.reference) {
            r.excess_risk = r.risk - opt_.reference->risk_star;
            const std::size_t C = p_.C();
            double worst = 0.0;
            for (const auto& s : p_.shards) {
                double d = 0.0;
                for (std::size_t i = s.offset * C; i < (s.offset + s.width) * C; ++i) {
                    const double e = W[i] - opt_.reference->w_star[i];
                    d += e * e;
                }
                worst = std::max(worst, d);
            }
            r.msd = worst;
        }
        const auto it = static_cast<double>(iter);
        r.comm_net = it * trace_.comm_per_iter.net;
        r.comm_gross = it * trace_.comm_per_iter.gross;
        r.gradient_evals = iter * trace_.gradient_evals_per_iter;
        r.combination_ops = iter * trace_.combination_ops_per_iter;
        if (trace_.tracks_unbiasedness) {
            r.unbiasedness = iter == 0 ? 0.0 : pending_unbias_;
            pending_unbias_ = 0.0;
        }
        r.grad_sum_drift = drift;
        r.collisions = collisions_;
        trace_.records.push_back(r);
    }

    // Divergence guard plus the per-iteration observer hook.
    void after_step(std::size_t iter, std::span<const double> W) {
        double sq = 0.0;
        for (double v : W) sq += v * v;
        const double norm = std::sqrt(sq);
        if (!std::isfinite(norm) || norm > opt_.divergence_threshold) {
            throw DivergenceError(iter, norm);
        }
        if (opt_.observer) opt_.observer(iter, W);
    }

    RunTrace finish(std::vector<double> W) {
        trace_.final_weights = std::move(W);
        return std::move(trace_);
    }

private:
    const Problem& p_;
    const RunOptions& opt_;
    Objective objective_;
    RunTrace trace_;
    std::vector<std::size_t> checkpoints_;
    double pending_unbias_ = 0.0;
    std::uint64_t collisions_ = 0;
};

// W_k <- W_k - mu (bracket + G_k / N + grad r(W_k)), elementwise over the block.
void saga_step(std::span<double> Wk, std::span<const double> bracket, std::span<const double> Gk,
               double N, const L2Regularizer& reg, double mu, std::span<double> reg_buf) {
    reg.grad(Wk, reg_buf);
    for (std::size_t i = 0; i < Wk.size(); ++i) {
        Wk[i] -= mu * (bracket[i] + Gk[i] / N + reg_buf[i]);
    }
}

// out[j, c] += g[c] * h[j]
void add_outer(std::span<double> out, std::span<const double> h, std::span<const double> g) {
    const std::size_t C = g.size();
    for (std::size_t j = 0; j < h.size(); ++j) {
        for (std::size_t c = 0; c < C; ++c) out[j * C + c] += g[c] * h[j];
    }
}

// Running sum_n grad_z Q(u_{n,k}) h_{n,k} per agent, stored as one M x C block
// matrix laid out like W.
std::vector<double> fresh_grad_sum(const Problem& p, const ScoreMemory& mem, Exec exec) {
    const std::size_t N = p.N();
    const std::size_t C = p.C();
    std::vector<double> G(p.M() * C, 0.0);
    std::vector<double> coeff(N * C);
    for (std::size_t k = 0; k < p.K(); ++k) {
        const auto& s = p.shards[k];
        for (std::size_t n = 0; n < N; ++n) {
            p.loss->score_grad(mem.u(k, n), s.labels[n], std::span<double>(coeff).subspan(n * C, C));
        }
        kernels::accumulate_outer(s.features, N, s.width, coeff, C,
                                  std::span<double>(G).subspan(s.offset * C, s.width * C), exec);
    }
    return G;
}

double grad_sum_drift(const Problem& p, const ScoreMemory& mem, std::span<const double> G, Exec exec) {
    const auto fresh = fresh_grad_sum(p, mem, exec);
    const std::size_t C = p.C();
    double worst = 0.0;
    for (const auto& s : p.shards) {
        double diff = 0.0;
        double ref = 0.0;
        for (std::size_t i = s.offset * C; i < (s.offset + s.width) * C; ++i) {
            diff += (G[i] - fresh[i]) * (G[i] - fresh[i]);
            ref += fresh[i] * fresh[i];
        }
        worst = std::max(worst, std::sqrt(diff) / std::max(1.0, std::sqrt(ref)));
    }
    return worst;
}

void inject_fault(const RunOptions& opt, std::size_t iter, ScoreMemory& mem, std::size_t n) {
    if (opt.fault && opt.fault->iteration == iter && n != kNoSample) {
        mem.u(0, n)[0] += opt.fault->amount;
    }
}

}  // namespace

RunTrace run_naive(const Problem& p, const RunOptions& opt) {
    Recorder rec(Algorithm::naive, p, opt);
    const std::size_t C = p.C();
    const double mu = opt.step_size;
    std::vector<double> W(p.M() * C, 0.0);
    std::vector<double> g(C), reg_buf;
    Sampler sampler(p.N(), opt.seed, opt.sampling);
    rec.record(0, W);
    for (std::size_t i = 1; i <= opt.iterations; ++i) {
        const std::size_t n = sampler.next();
        const auto local = scaled_local_scores(p.shards, W, C, n);
        const auto zhat = consensus_step(p.A, local, C, opt.exec);
        for (std::size_t k = 0; k < p.K(); ++k) {
            const auto& s = p.shards[k];
            const auto h = s.row(n);
            auto Wk = std::span<double>(W).subspan(s.offset * C, s.width * C);
            p.loss->score_grad(std::span<const double>(zhat).subspan(k * C, C), s.labels[n], g);
            reg_buf.resize(Wk.size());
            p.reg.grad(Wk, reg_buf);
            for (std::size_t j = 0; j < s.width; ++j) {
                for (std::size_t c = 0; c < C; ++c) {
                    Wk[j * C + c] -= mu * (g[c] * h[j] + reg_buf[j * C + c]);
                }
            }
        }
        rec.after_step(i, W);
        if (rec.due(i)) rec.record(i, W);
    }
    return rec.finish(std::move(W));
}

RunTrace run_vrd2(const Problem& p, const RunOptions& opt) {
    Recorder rec(Algorithm::vrd2, p, opt);
    const std::size_t C = p.C();
    const double mu = opt.step_size;
    const auto Nd = static_cast<double>(p.N());
    std::vector<double> W(p.M() * C, 0.0);
    ScoreMemory mem(p.K(), p.N(), C);
    std::vector<double> G = fresh_grad_sum(p, mem, opt.exec);
    std::vector<double> gz(C), gu(C), bracket, reg_buf;
    std::vector<double> diff(p.K() * C);
    Sampler sampler(p.N(), opt.seed, opt.sampling);
    rec.record(0, W);
    for (std::size_t i = 1; i <= opt.iterations; ++i) {
        const std::size_t n = sampler.next();
        const auto t = tracked_score_update(p.A, p.shards, W, mem, n, opt.exec);
        for (std::size_t k = 0; k < p.K(); ++k) {
            const auto& s = p.shards[k];
            const auto h = s.row(n);
            p.loss->score_grad(std::span<const double>(t.z).subspan(k * C, C), s.labels[n], gz);
            p.loss->score_grad(mem.u(k, n), s.labels[n], gu);
            auto dk = std::span<double>(diff).subspan(k * C, C);
            for (std::size_t c = 0; c < C; ++c) dk[c] = gz[c] - gu[c];
            bracket.assign(s.width * C, 0.0);
            add_outer(bracket, h, dk);
            for (auto& b : bracket) b /= 1.0;
            reg_buf.resize(bracket.size());
            saga_step(std::span<double>(W).subspan(s.offset * C, s.width * C), bracket,
                      std::span<const double>(G).subspan(s.offset * C, s.width * C), Nd, p.reg, mu,
                      reg_buf);
        }
        for (std::size_t k = 0; k < p.K(); ++k) {
            const auto& s = p.shards[k];
            add_outer(std::span<double>(G).subspan(s.offset * C, s.width * C), s.row(n),
                      std::span<const double>(diff).subspan(k * C, C));
        }
        commit_tracked_scores(mem, n, t, static_cast<std::int64_t>(i));
        inject_fault(opt, i, mem, n);
        rec.note_unbiasedness(mem.unbiasedness_residual(n));
        rec.after_step(i, W);
        if (rec.due(i)) {
            rec.record(i, W, rec.checkpoint(i) ? grad_sum_drift(p, mem, G, opt.exec) : kNotApplicable);
        }
    }
    return rec.finish(std::move(W));
}

RunTrace run_pvrd2(const Problem& p, const RunOptions& opt) {
    Recorder rec(Algorithm::pvrd2, p, opt);
    const std::size_t K = p.K();
    const std::size_t C = p.C();
    const std::size_t B = opt.B;
    const double mu = opt.step_size;
    const auto Nd = static_cast<double>(p.N());
    const auto Bd = static_cast<double>(B);
    std::vector<double> W(p.M() * C, 0.0);
    ScoreMemory mem(K, p.N(), C);
    PipelineQueue queue(opt.J, B, K, C);
    std::vector<double> G = fresh_grad_sum(p, mem, opt.exec);
    std::vector<double> gz(C), gu(C), d(C), bracket, reg_buf;
    Sampler sampler(p.N(), opt.seed, opt.sampling);
    const std::size_t width = B * C;
    rec.record(0, W);
    for (std::size_t i = 1; i <= opt.iterations; ++i) {
        auto entry = queue.make_entry();
        entry.push_iteration = static_cast<std::int64_t>(i);
        for (std::size_t b = 0; b < B; ++b) {
            const std::size_t n = sampler.next();
            if (queue.in_flight_count(n) > 0 ||
                std::find(entry.samples.begin(), entry.samples.begin() + static_cast<std::ptrdiff_t>(b), n) !=
                    entry.samples.begin() + static_cast<std::ptrdiff_t>(b)) {
                rec.note_collision();
            }
            entry.samples[b] = n;
            const auto local = scaled_local_scores(p.shards, W, C, n);
            for (std::size_t k = 0; k < K; ++k) {
                const auto u = mem.u(k, n);
                const auto v = mem.v(k, n);
                for (std::size_t c = 0; c < C; ++c) {
                    entry.z[k * width + b * C + c] = u[c] + local[k * C + c] - v[c];
                    entry.tag[k * width + b * C + c] = local[k * C + c];
                }
            }
        }
        const auto popped = queue.push_pop(p.A, std::move(entry), opt.exec);

        for (std::size_t k = 0; k < K; ++k) {
            const auto& s = p.shards[k];
            bracket.assign(s.width * C, 0.0);
            for (std::size_t b = 0; b < B; ++b) {
                const std::size_t n = popped.samples[b];
                if (n == kNoSample) continue;
                p.loss->score_grad(std::span<const double>(popped.z).subspan(k * width + b * C, C),
                                   s.labels[n], gz);
                p.loss->score_grad(mem.u(k, n), s.labels[n], gu);
                for (std::size_t c = 0; c < C; ++c) d[c] = gz[c] - gu[c];
                add_outer(bracket, s.row(n), d);
            }
            for (auto& x : bracket) x /= Bd;
            reg_buf.resize(bracket.size());
            saga_step(std::span<double>(W).subspan(s.offset * C, s.width * C), bracket,
                      std::span<const double>(G).subspan(s.offset * C, s.width * C), Nd, p.reg, mu,
                      reg_buf);
        }

        // Table updates in pop order; the online sum follows each overwrite.
        double residual = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const std::size_t n = popped.samples[b];
            if (n == kNoSample) continue;
            for (std::size_t k = 0; k < K; ++k) {
                const auto& s = p.shards[k];
                const auto zk = std::span<const double>(popped.z).subspan(k * width + b * C, C);
                p.loss->score_grad(zk, s.labels[n], gz);
                p.loss->score_grad(mem.u(k, n), s.labels[n], gu);
                for (std::size_t c = 0; c < C; ++c) d[c] = gz[c] - gu[c];
                add_outer(std::span<double>(G).subspan(s.offset * C, s.width * C), s.row(n), d);
                std::copy(zk.begin(), zk.end(), mem.u(k, n).begin());
                const auto tag = std::span<const double>(popped.tag).subspan(k * width + b * C, C);
                std::copy(tag.begin(), tag.end(), mem.v(k, n).begin());
            }
            mem.mark_updated(n, static_cast<std::int64_t>(i));
        }
        inject_fault(opt, i, mem, popped.samples.back());
        for (auto n : popped.samples) {
            if (n != kNoSample) residual = std::max(residual, mem.unbiasedness_residual(n));
        }
        rec.note_unbiasedness(residual);
        rec.after_step(i, W);
        if (rec.due(i)) {
            rec.record(i, W, rec.checkpoint(i) ? grad_sum_drift(p, mem, G, opt.exec) : kNotApplicable);
        }
    }
    return rec.finish(std::move(W));
}

RunTrace run_deterministic_baseline(const Problem& p, const RunOptions& opt) {
    Recorder rec(Algorithm::deterministic, p, opt);
    const std::size_t K = p.K();
    const std::size_t N = p.N();
    const std::size_t C = p.C();
    const double mu = opt.step_size;
    const double inv_n = 1.0 / static_cast<double>(N);
    const std::size_t width = N * C;
    std::vector<double> W(p.M() * C, 0.0);
    // With w_0 = 0 the tracked state starts at x_0 = d_0 = 0.
    std::vector<double> x(K * width, 0.0), d(K * width), d_prev(K * width, 0.0), pre(K * width);
    std::vector<double> coeff(width), grad, reg_buf;
    rec.record(0, W);
    for (std::size_t i = 1; i <= opt.iterations; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            const auto& s = p.shards[k];
            kernels::scores(s.features, N, s.width,
                            std::span<const double>(W).subspan(s.offset * C, s.width * C), C,
                            static_cast<double>(K), std::span<double>(d).subspan(k * width, width),
                            opt.exec);
        }
        for (std::size_t q = 0; q < x.size(); ++q) pre[q] = x[q] + d[q] - d_prev[q];
        kernels::combine(p.A, pre, x, width, opt.exec);
        std::swap(d, d_prev);

        for (std::size_t k = 0; k < K; ++k) {
            const auto& s = p.shards[k];
            for (std::size_t n = 0; n < N; ++n) {
                auto cn = std::span<double>(coeff).subspan(n * C, C);
                p.loss->score_grad(std::span<const double>(x).subspan(k * width + n * C, C),
                                   s.labels[n], cn);
                for (auto& v : cn) v *= inv_n;
            }
            grad.resize(s.width * C);
            kernels::accumulate_outer(s.features, N, s.width, coeff, C, grad, opt.exec);
            auto Wk = std::span<double>(W).subspan(s.offset * C, s.width * C);
            reg_buf.resize(Wk.size());
            p.reg.grad(Wk, reg_buf);
            for (std::size_t q = 0; q < Wk.size(); ++q) Wk[q] -= mu * (grad[q] + reg_buf[q]);
        }
        rec.after_step(i, W);
        if (rec.due(i)) rec.record(i, W);
    }
    return rec.finish(std::move(W));
}

RunTrace run_centralized_sgd(const Problem& p, const RunOptions& opt) {
    Recorder rec(Algorithm::sgd, p, opt);
    const std::size_t C = p.C();
    const std::size_t M = p.M();
    const double mu = opt.step_size;
    const auto data = assemble(p.shards);
    std::vector<double> W(M * C, 0.0), z(C), g(C), reg_buf(M * C);
    Sampler sampler(p.N(), opt.seed, opt.sampling);
    rec.record(0, W);
    for (std::size_t i = 1; i <= opt.iterations; ++i) {
        const std::size_t n = sampler.next();
        const auto h = data.row(n);
        for (std::size_t c = 0; c < C; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < M; ++j) acc += h[j] * W[j * C + c];
            z[c] = acc;
        }
        p.loss->score_grad(z, data.labels[n], g);
        p.reg.grad(W, reg_buf);
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t c = 0; c < C; ++c) W[j * C + c] -= mu * (g[c] * h[j] + reg_buf[j * C + c]);
        }
        rec.after_step(i, W);
        if (rec.due(i)) rec.record(i, W);
    }
    return rec.finish(std::move(W));
}

RunTrace run_centralized_saga(const Problem& p, const RunOptions& opt) {
    Recorder rec(Algorithm::saga, p, opt);
    const std::size_t C = p.C();
    const std::size_t M = p.M();
    const std::size_t N = p.N();
    const double mu = opt.step_size;
    const auto Nd = static_cast<double>(N);
    const auto data = assemble(p.shards);
    std::vector<double> W(M * C, 0.0), z(C), gz(C), gu(C), d(C), reg_buf(M * C), bracket(M * C);
    // Stored scores h_n^T w at each sample's last visit; the gradient table is
    // implied by them.
    std::vector<double> u(N * C, 0.0);
    std::vector<double> G(M * C, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
        p.loss->score_grad(std::span<const double>(u).subspan(n * C, C), data.labels[n], gu);
        add_outer(G, data.row(n), gu);
    }
    Sampler sampler(N, opt.seed, opt.sampling);
    rec.record(0, W);
    for (std::size_t i = 1; i <= opt.iterations; ++i) {
        const std::size_t n = sampler.next();
        const auto h = data.row(n);
        for (std::size_t c = 0; c < C; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < M; ++j) acc += h[j] * W[j * C + c];
            z[c] = acc;
        }
        auto un = std::span<double>(u).subspan(n * C, C);
        p.loss->score_grad(z, data.labels[n], gz);
        p.loss->score_grad(un, data.labels[n], gu);
        for (std::size_t c = 0; c < C; ++c) d[c] = gz[c] - gu[c];
        std::fill(bracket.begin(), bracket.end(), 0.0);
        add_outer(bracket, h, d);
        saga_step(W, bracket, G, Nd, p.reg, mu, reg_buf);
        add_outer(G, h, d);
        std::copy(z.begin(), z.end(), un.begin());
        rec.after_step(i, W);
        if (rec.due(i)) {
            double drift = kNotApplicable;
            if (rec.checkpoint(i)) {
                std::vector<double> fresh(M * C, 0.0);
                for (std::size_t m = 0; m < N; ++m) {
                    p.loss->score_grad(std::span<const double>(u).subspan(m * C, C), data.labels[m], gu);
                    add_outer(fresh, data.row(m), gu);
                }
                double diff = 0.0, ref = 0.0;
                for (std::size_t q = 0; q < G.size(); ++q) {
                    diff += (G[q] - fresh[q]) * (G[q] - fresh[q]);
                    ref += fresh[q] * fresh[q];
                }
                drift = std::sqrt(diff) / std::max(1.0, std::sqrt(ref));
            }
            rec.record(i, W, drift);
        }
    }
    return rec.finish(std::move(W));
}

RunTrace run_centralized_sgd(const Dataset& data, std::shared_ptr<const LossModel> loss,
                             L2Regularizer reg, const RunOptions& opt) {
    const auto p = make_centralized_problem(data, std::move(loss), reg);
    return run_centralized_sgd(p, opt);
}

RunTrace run_centralized_saga(const Dataset& data, std::shared_ptr<const LossModel> loss,
                              L2Regularizer reg, const RunOptions& opt) {
    const auto p = make_centralized_problem(data, std::move(loss), reg);
    return run_centralized_saga(p, opt);
}

RunTrace run_algorithm(Algorithm a, const Problem& p, const RunOptions& opt) {
    switch (a) {
        case Algorithm::naive: return run_naive(p, opt);
        case Algorithm::vrd2: return run_vrd2(p, opt);
        case Algorithm::pvrd2: return run_pvrd2(p, opt);
        case Algorithm::deterministic: return run_deterministic_baseline(p, opt);
        case Algorithm::sgd: return run_centralized_sgd(p, opt);
        case Algorithm::saga: return run_centralized_saga(p, opt);
        case Algorithm::model_distributed: break;
    }
    throw std::invalid_argument("algorithm \"" + to_string(a) + "\" is accounting-only and cannot be run");
}

RateBound rate_bound(double lambda, std::size_t J, std::size_t N, double mu, double nu) {
    if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in [0, 1)");
    if (J < 1 || N < 1) throw std::invalid_argument("J and N must be >= 1");
    if (!(mu * nu > 0.0)) throw std::invalid_argument("mu * nu must be positive");
    RateBound r;
    r.network_term = 1.0 - (1.0 - std::pow(lambda, static_cast<double>(J))) / (2.0 * static_cast<double>(N));
    r.convexity_term = 1.0 - mu * nu / 5.0;
    r.rho = std::max(r.network_term, r.convexity_term);
    return r;
}

RateBound corollary_rate_bound(double lambda, std::size_t N, double mu, double nu) {
    if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in [0, 1)");
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (!(mu * nu > 0.0)) throw std::invalid_argument("mu * nu must be positive");
    RateBound r;
    r.network_term = 1.0 - (1.0 - lambda) / (2.0 * static_cast<double>(N));
    r.convexity_term = 1.0 - mu * nu / 4.0;
    r.rho = std::max(r.network_term, r.convexity_term);
    return r;
}

double StepGuidance::bound() const {
    return std::min({quarter_nu, half_nu_n, regularizer, smoothness});
}

StepGuidance step_guidance(const ModelConstants& c, std::size_t N) {
    if (!(c.nu > 0.0)) {
        throw std::invalid_argument("step-size guidance needs a positive strong-convexity constant");
    }
    const double inf = std::numeric_limits<double>::infinity();
    StepGuidance g;
    g.quarter_nu = 1.0 / (4.0 * c.nu);
    g.half_nu_n = 1.0 / (2.0 * c.nu * static_cast<double>(N));
    g.regularizer = c.eta > 0.0 ? c.nu / (48.0 * c.eta * c.eta) : inf;
    const double denom = 8.0 * c.L * c.L + 20.0 * c.delta * c.delta * c.h4;
    g.smoothness = denom > 0.0 ? c.nu / denom : inf;
    return g;
}

double default_step_size(const ModelConstants& c, std::size_t N, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("step factor must be positive");
    return factor * step_guidance(c, N).bound();
}

}  // namespace featnet
