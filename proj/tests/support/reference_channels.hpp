#pragma once

#include <array>
#include <cstddef>

#include "iscs/rng.hpp"
#include "iscs/tensor_io.hpp"

namespace iscs::testing {

struct ReferenceChannel {
    std::size_t channel;
    double variance;
    double bias;
};

// Published per-channel scores of a 320-channel encoder projection.
inline constexpr std::array<ReferenceChannel, 9> kReferenceChannels{{
    {217, 0.0638, 0.0178},
    {24, 0.0347, 0.0616},
    {233, 0.0232, 0.0916},
    {93, 0.0304, 0.0031},
    {40, 0.0271, 0.0295},
    {252, 0.0201, 0.0587},
    {157, 0.0175, 0.0055},
    {292, 0.0038, 2.0534},
    {140, 0.0148, 0.0676},
}};

inline constexpr std::size_t kReferenceChannelCount = 320;

/// 320 kernels of 18 entries. The nine reference channels get +-sqrt(variance) entries and
/// their bias; the rest get variances in [0.001, 0.06] and biases in [0, 0.1].
ConvKernelSet embed_reference_channels(Rng& rng);

} // namespace iscs::testing
