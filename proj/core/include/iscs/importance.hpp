#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iscs/matrix.hpp"
#include "iscs/tensor_io.hpp"

namespace iscs {

// Parameter-side importance signals of one projection layer.
struct ChannelScores {
    std::vector<double> variance; // entry-wise population variance of each kernel
    std::vector<double> bias_mag; // |b_c|, zero when the layer has no bias
    Matrix similarity;            // cosine similarity of flattened kernels, unit diagonal

    std::size_t channels() const noexcept { return variance.size(); }
};

/// Population variance of every kernel's K*K*C_in entries (two-pass, fixed summation order).
std::vector<double> variance_scores(const ConvKernelSet& k);

std::vector<double> bias_scores(const ConvKernelSet& k);

/// Pairwise cosine similarity. Kernels with norm below 1e-30 get similarity 0 to every
/// other kernel; the diagonal is set to exactly 1.
Matrix cosine_similarity_matrix(const ConvKernelSet& k);

ChannelScores compute_scores(const ConvKernelSet& k);

/// Indices sorted by value descending; ties go to the lower index. Throws on non-finite input.
std::vector<std::size_t> rank_descending(std::span<const double> values);

} // namespace iscs
