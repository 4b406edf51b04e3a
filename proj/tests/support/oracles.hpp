#pragma once

// Deliberately naive reference implementations. None of these call into the library code they
// are used to check.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "iscs/image.hpp"
#include "iscs/matrix.hpp"
#include "iscs/rng.hpp"
#include "iscs/tensor_io.hpp"

namespace iscs::oracle {

/// Mean loop, then squared-deviation loop, in long double.
double variance(std::span<const double> v);
double cosine(std::span<const double> a, std::span<const double> b);

/// Selection sort, largest first, lower index wins ties.
std::vector<std::size_t> selection_sort_descending(std::span<const double> v);

/// Greedy nearest-neighbour chain from `sc` over `members` by raw similarity.
std::vector<std::size_t> nearest_neighbour_chain(std::size_t sc, std::span<const std::size_t> members,
                                                 const Matrix& sim);

/// Symmetric matrix Q diag(values) Q^T with a random orthogonal Q.
Matrix with_spectrum(std::span<const double> values, Rng& rng);

/// Eigenvalues by power iteration with deflation. Only for small, well-separated spectra.
std::vector<double> power_iteration_eigenvalues(Matrix a, std::size_t count, std::size_t iterations);

double psnr(const Image& a, const Image& b);

/// Integer-time simulation of list scheduling over chains of integer-cost tasks. A chain's
/// last task keeps its worker `join` extra ticks.
long long simulate_chains(const std::vector<std::vector<long long>>& chains, std::size_t workers, long long join);

ConvKernelSet random_kernels(std::size_t out, std::size_t in, std::size_t k, bool with_bias, Rng& rng);

/// Entries +a and -a in equal counts (length must be even), shuffled.
std::vector<double> two_point_kernel(std::size_t length, double a, Rng& rng);

} // namespace iscs::oracle
