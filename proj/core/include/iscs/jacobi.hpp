#pragma once

#include <cstddef>
#include <vector>

#include "iscs/matrix.hpp"

namespace iscs {

struct EigenDecomposition {
    std::vector<double> values; // descending
    Matrix vectors;             // column j is the unit eigenvector of values[j]
    std::size_t sweeps = 0;
};

/// Cyclic Jacobi rotations in fixed (p, q) row order until the off-diagonal Frobenius norm
/// drops to `tolerance`. Each eigenvector's largest-magnitude entry is made positive.
EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-10, std::size_t max_sweeps = 100);

} // namespace iscs
