#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "iscs/discovery.hpp"
#include "iscs/latent.hpp"
#include "iscs/matrix.hpp"

namespace iscs {

enum class OrderingStrategy { KnI, CorrAscending, CorrDescending, TspGreedy };

const char* to_string(OrderingStrategy s) noexcept;
OrderingStrategy ordering_strategy_from_string(const std::string& s);

using Slice = std::vector<std::size_t>;

struct GroupingPlan {
    /// permutation[new_position] = original channel index.
    std::vector<std::size_t> permutation;
    /// Per group, its slices in processing order.
    std::vector<std::vector<Slice>> groups;
    std::size_t slice_count = 1;
    OrderingStrategy strategy = OrderingStrategy::KnI;
    std::vector<std::size_t> bias_channels;
    std::vector<std::size_t> residual;

    /// Throws InvariantError if the plan is not a consistent partition of `channels`.
    void check(std::size_t channels) const;

    bool operator==(const GroupingPlan&) const = default;
};

/// Interleaved split: the channel at rank r goes to slice r mod S, position floor(r / S).
std::vector<Slice> slice_group(std::span<const std::size_t> ordered, std::size_t slice_count);

/// Contiguous split into S equal blocks.
std::vector<Slice> slice_contiguous(std::span<const std::size_t> ordered, std::size_t slice_count);

/// Ordered channel list for one group, SC first.
std::vector<std::size_t> order_group(std::size_t sc, std::span<const std::size_t> members,
                                     const Matrix& similarity, OrderingStrategy strategy,
                                     SimilarityMode mode = SimilarityMode::Raw);

GroupingPlan build_plan(const IscsStructure& structure, const Matrix& similarity, std::size_t slice_count,
                        OrderingStrategy strategy, SimilarityMode mode = SimilarityMode::Raw);

/// Groups of N consecutive channel indices, ignoring weights. Baseline for comparisons.
GroupingPlan build_index_plan(std::size_t channels, std::size_t group_size, std::size_t slice_count);

std::vector<std::size_t> invert_permutation(std::span<const std::size_t> permutation);

/// Output channel j takes input channel permutation[j]; spatial layout is untouched.
LatentBlock apply_permutation(const LatentBlock& latents, std::span<const std::size_t> permutation);

} // namespace iscs
