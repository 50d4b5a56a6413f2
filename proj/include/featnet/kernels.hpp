#pragma once

#include <cstddef>
#include <span>

#include "featnet/topology.hpp"

// Data-parallel inner loops. Every kernel has a serial reference and an OpenMP
// version; each output element is reduced in the same order in both, so the
// results are bit-identical regardless of thread count.
namespace featnet::kernels {

enum class Exec { serial, parallel };

// out[k, :] = sum_{l in N_k} a(l,k) in[l, :], with in/out K x width row-major.
void combine(const CombinationMatrix& A, std::span<const double> in, std::span<double> out,
             std::size_t width, Exec exec);

// out[n, c] = scale * sum_j features[n, j] * W[j, c].
void scores(std::span<const double> features, std::size_t rows, std::size_t width,
            std::span<const double> W, std::size_t classes, double scale, std::span<double> out,
            Exec exec);

// out[j, c] = sum_n features[n, j] * coeffs[n, c]  (summed in increasing n).
void accumulate_outer(std::span<const double> features, std::size_t rows, std::size_t width,
                      std::span<const double> coeffs, std::size_t classes, std::span<double> out,
                      Exec exec);

namespace serial {
void combine(const CombinationMatrix& A, std::span<const double> in, std::span<double> out,
             std::size_t width);
void scores(std::span<const double> features, std::size_t rows, std::size_t width,
            std::span<const double> W, std::size_t classes, double scale, std::span<double> out);
void accumulate_outer(std::span<const double> features, std::size_t rows, std::size_t width,
                      std::span<const double> coeffs, std::size_t classes, std::span<double> out);
}  // namespace serial

namespace omp {
void combine(const CombinationMatrix& A, std::span<const double> in, std::span<double> out,
             std::size_t width);
void scores(std::span<const double> features, std::size_t rows, std::size_t width,
            std::span<const double> W, std::size_t classes, double scale, std::span<double> out);
void accumulate_outer(std::span<const double> features, std::size_t rows, std::size_t width,
                      std::span<const double> coeffs, std::size_t classes, std::span<double> out);
}  // namespace omp

// Honors FEATNET_THREADS (a positive integer) when set; returns the cap applied.
int configure_threads_from_env();

}  // namespace featnet::kernels
