#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace iscs {

// Quantized latent symbols on a patch grid, channel index innermost.
struct LatentBlock {
    std::size_t patches_y = 0;
    std::size_t patches_x = 0;
    std::size_t channels = 0;
    std::vector<std::int32_t> symbols;

    LatentBlock() = default;
    LatentBlock(std::size_t py, std::size_t px, std::size_t c)
        : patches_y(py), patches_x(px), channels(c), symbols(py * px * c, 0) {}

    std::size_t patch_count() const noexcept { return patches_y * patches_x; }
    std::int32_t& at(std::size_t patch, std::size_t c) noexcept { return symbols[patch * channels + c]; }
    std::int32_t at(std::size_t patch, std::size_t c) const noexcept { return symbols[patch * channels + c]; }

    bool operator==(const LatentBlock&) const = default;
};

} // namespace iscs
