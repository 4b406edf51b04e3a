#pragma once

#include <cstdint>
#include <vector>

#include "iscs/range_coder.hpp"

namespace iscs {

// Zero-mean discretized Gaussian over integer symbols, quantized to a 16-bit frequency table.
//
// Symbols in [-R, R] are coded directly; anything outside falls into one of two escape
// buckets followed by 16 raw bits holding the excess magnitude. Every table entry has
// frequency >= 1, so every symbol is codable.
class GaussianSymbolModel {
public:
    static constexpr std::uint32_t kTotal = 1U << 16;
    static constexpr std::int32_t kMaxRadius = 4096;
    static constexpr unsigned kEscapeBits = 16;

    /// `scale` is the standard deviation in symbol units; values below 1e-9 are clamped.
    explicit GaussianSymbolModel(double scale);

    double scale() const noexcept { return scale_; }
    std::int32_t radius() const noexcept { return radius_; }

    /// Probability the quantized table assigns to a symbol, escapes included.
    double probability(std::int32_t symbol) const;
    /// -log2 of the table probability plus raw escape bits.
    double code_length_bits(std::int32_t symbol) const;

    void encode(RangeEncoder& enc, std::int32_t symbol) const;
    std::int32_t decode(RangeDecoder& dec) const;

    const std::vector<std::uint32_t>& frequencies() const noexcept { return freq_; }

private:
    std::size_t index_of(std::int32_t symbol) const noexcept;

    double scale_;
    std::int32_t radius_;
    std::vector<std::uint32_t> freq_; // [neg escape, -R..R, pos escape]
    std::vector<std::uint32_t> cum_;  // size freq_.size() + 1
};

/// Continuous-model bucket mass Phi((q + 1/2)/s) - Phi((q - 1/2)/s).
double discretized_gaussian_mass(std::int32_t symbol, double scale);

} // namespace iscs
