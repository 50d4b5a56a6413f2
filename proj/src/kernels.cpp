#include "featnet/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <omp.h>

namespace featnet::kernels {

namespace {

void check_combine(const CombinationMatrix& A, std::span<const double> in, std::span<double> out,
                   std::size_t width) {
    if (in.size() != A.size() * width || out.size() != in.size()) {
        throw std::invalid_argument("combine: buffers must be K x width");
    }
}

}  // namespace

namespace serial {

void combine(const CombinationMatrix& A, std::span<const double> in, std::span<double> out,
             std::size_t width) {
    check_combine(A, in, out, width);
    const std::size_t K = A.size();
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t p = 0; p < width; ++p) {
            double s = 0.0;
            for (auto l : A.neighbors(k)) s += A.weight(l, k) * in[l * width + p];
            out[k * width + p] = s;
        }
    }
}

void scores(std::span<const double> features, std::size_t rows, std::size_t width,
            std::span<const double> W, std::size_t classes, double scale, std::span<double> out) {
    for (std::size_t n = 0; n < rows; ++n) {
        const double* h = features.data() + n * width;
        for (std::size_t c = 0; c < classes; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < width; ++j) s += h[j] * W[j * classes + c];
            out[n * classes + c] = scale * s;
        }
    }
}

void accumulate_outer(std::span<const double> features, std::size_t rows, std::size_t width,
                      std::span<const double> coeffs, std::size_t classes, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t n = 0; n < rows; ++n) {
        const double* h = features.data() + n * width;
        const double* g = coeffs.data() + n * classes;
        for (std::size_t j = 0; j < width; ++j) {
            for (std::size_t c = 0; c < classes; ++c) out[j * classes + c] += h[j] * g[c];
        }
    }
}

}  // namespace serial

namespace omp {

void combine(const CombinationMatrix& A, std::span<const double> in, std::span<double> out,
             std::size_t width) {
    check_combine(A, in, out, width);
    const auto total = static_cast<long>(A.size() * width);
#pragma omp parallel for schedule(static)
    for (long idx = 0; idx < total; ++idx) {
        const auto k = static_cast<std::size_t>(idx) / width;
        const auto p = static_cast<std::size_t>(idx) % width;
        double s = 0.0;
        for (auto l : A.neighbors(k)) s += A.weight(l, k) * in[l * width + p];
        out[k * width + p] = s;
    }
}

void scores(std::span<const double> features, std::size_t rows, std::size_t width,
            std::span<const double> W, std::size_t classes, double scale, std::span<double> out) {
    const auto n_rows = static_cast<long>(rows);
#pragma omp parallel for schedule(static)
    for (long n = 0; n < n_rows; ++n) {
        const double* h = features.data() + static_cast<std::size_t>(n) * width;
        for (std::size_t c = 0; c < classes; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < width; ++j) s += h[j] * W[j * classes + c];
            out[static_cast<std::size_t>(n) * classes + c] = scale * s;
        }
    }
}

void accumulate_outer(std::span<const double> features, std::size_t rows, std::size_t width,
                      std::span<const double> coeffs, std::size_t classes, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    // Each thread owns a contiguous range of feature columns and walks all
    // rows in order, so every output keeps the serial summation order.
#pragma omp parallel
    {
        const auto threads = static_cast<std::size_t>(omp_get_num_threads());
        const auto tid = static_cast<std::size_t>(omp_get_thread_num());
        const std::size_t chunk = (width + threads - 1) / threads;
        const std::size_t j0 = std::min(width, tid * chunk);
        const std::size_t j1 = std::min(width, j0 + chunk);
        for (std::size_t n = 0; n < rows; ++n) {
            const double* h = features.data() + n * width;
            const double* g = coeffs.data() + n * classes;
            for (std::size_t j = j0; j < j1; ++j) {
                for (std::size_t c = 0; c < classes; ++c) out[j * classes + c] += h[j] * g[c];
            }
        }
    }
}

}  // namespace omp

void combine(const CombinationMatrix& A, std::span<const double> in, std::span<double> out,
             std::size_t width, Exec exec) {
    if (exec == Exec::parallel) {
        omp::combine(A, in, out, width);
    } else {
        serial::combine(A, in, out, width);
    }
}

void scores(std::span<const double> features, std::size_t rows, std::size_t width,
            std::span<const double> W, std::size_t classes, double scale, std::span<double> out,
            Exec exec) {
    if (features.size() < rows * width || W.size() != width * classes || out.size() < rows * classes) {
        throw std::invalid_argument("scores: buffer sizes do not match");
    }
    if (exec == Exec::parallel) {
        omp::scores(features, rows, width, W, classes, scale, out);
    } else {
        serial::scores(features, rows, width, W, classes, scale, out);
    }
}

void accumulate_outer(std::span<const double> features, std::size_t rows, std::size_t width,
                      std::span<const double> coeffs, std::size_t classes, std::span<double> out,
                      Exec exec) {
    if (features.size() < rows * width || coeffs.size() < rows * classes || out.size() != width * classes) {
        throw std::invalid_argument("accumulate_outer: buffer sizes do not match");
    }
    if (exec == Exec::parallel) {
        omp::accumulate_outer(features, rows, width, coeffs, classes, out);
    } else {
        serial::accumulate_outer(features, rows, width, coeffs, classes, out);
    }
}

int configure_threads_from_env() {
    const char* env = std::getenv("FEATNET_THREADS");
    if (env == nullptr || *env == '\0') return omp_get_max_threads();
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
        throw std::invalid_argument(std::string("FEATNET_THREADS must be a positive integer, got \"") +
                                    env + "\"");
    }
    omp_set_num_threads(static_cast<int>(v));
    return static_cast<int>(v);
}

}  // namespace featnet::kernels
