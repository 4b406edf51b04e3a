#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace iscs {

/// 8-bit raster, row-major, channels interleaved. 1 = gray, 3 = RGB.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<std::uint8_t> samples;

    Image() = default;
    Image(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c), samples(w * h * c, fill) {}

    std::size_t pixel_count() const noexcept { return width * height; }
    std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) noexcept {
        return samples[(y * width + x) * channels + c];
    }
    std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const noexcept {
        return samples[(y * width + x) * channels + c];
    }

    bool operator==(const Image&) const = default;
};

// Binary PGM (P5) / PPM (P6) with maxval 255.
Image parse_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_pnm(const Image& img);
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

/// Extends the image to multiples of `block` by replicating the last row/column.
Image pad_to_multiple(const Image& img, std::size_t block);
Image crop(const Image& img, std::size_t width, std::size_t height);

} // namespace iscs
