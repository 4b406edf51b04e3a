#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iscs/importance.hpp"
#include "iscs/tensor_io.hpp"

namespace iscs {

enum class SimilarityMode { Raw, Absolute };

const char* to_string(SimilarityMode m) noexcept;
SimilarityMode similarity_mode_from_string(const std::string& s);

struct DiscoveryParams {
    std::size_t group_size = 64;             // N: channels per group, SC included
    std::optional<std::size_t> num_groups;   // M; default floor((C_out - |bias|) / N)
    double bias_z_threshold = 3.5;           // robust z-score cutoff for bias outliers
    SimilarityMode similarity_mode = SimilarityMode::Raw;

    void validate() const;
};

/// One salient-core channel and its auxiliaries, ordered by similarity to the core.
struct ChannelGroup {
    std::size_t sc = 0;
    std::vector<std::size_t> sa;

    bool operator==(const ChannelGroup&) const = default;
};

/// Groups, bias channels and residual together partition {0..C_out-1}.
struct IscsStructure {
    std::vector<ChannelGroup> groups;
    std::vector<std::size_t> bias_channels; // ascending
    std::vector<std::size_t> residual;      // descending variance

    std::size_t channel_count() const noexcept;
    /// Throws InvariantError unless the partition property holds for `channels`.
    void check_partition(std::size_t channels) const;

    bool operator==(const IscsStructure&) const = default;
};

/// Similarity used for ranking: raw cosine, or its magnitude in Absolute mode.
double ranking_similarity(const Matrix& similarity, std::size_t a, std::size_t b,
                          SimilarityMode mode) noexcept;

/// Channels whose bias magnitude is a robust (median/MAD) outlier above `z_threshold`.
/// With zero MAD, every channel strictly above the median is returned.
std::vector<std::size_t> flag_bias_dominated(const ChannelScores& scores, double z_threshold);

/// Top-M channels by variance outside `bias_channels`, in descending variance order.
std::vector<std::size_t> select_scs(const ChannelScores& scores, std::span<const std::size_t> bias_channels,
                                    std::size_t num_groups);

/// Greedy exclusive assignment: SCs in the given order each take the N-1 most similar
/// channels still free. SCs that cannot fill a group fall through to the residual.
IscsStructure assign_sas(const ChannelScores& scores, std::span<const std::size_t> scs,
                         std::span<const std::size_t> bias_channels, std::size_t group_size,
                         SimilarityMode mode);

std::size_t default_num_groups(std::size_t channels, std::size_t bias_count, std::size_t group_size);

IscsStructure discover(const ChannelScores& scores, const DiscoveryParams& params);
IscsStructure discover(const ConvKernelSet& k, const DiscoveryParams& params);

} // namespace iscs
