#include "iscs/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "iscs/error.hpp"

namespace iscs {
namespace {

constexpr double kTailSigmas = 8.0;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Upper tail 1 - Phi(x), accurate far into the tail.
double upper_tail(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

} // namespace

double discretized_gaussian_mass(std::int32_t symbol, double scale) {
    const double a = std::fabs(static_cast<double>(symbol));
    if (a == 0.0) return 1.0 - 2.0 * upper_tail(0.5 / scale);
    return upper_tail((a - 0.5) / scale) - upper_tail((a + 0.5) / scale);
}

GaussianSymbolModel::GaussianSymbolModel(double scale) : scale_(std::max(scale, 1e-9)) {
    const double r = std::ceil(kTailSigmas * scale_);
    radius_ = static_cast<std::int32_t>(std::clamp(r, 1.0, static_cast<double>(kMaxRadius)));

    const std::size_t n = 2 * static_cast<std::size_t>(radius_) + 3;
    std::vector<double> p(n);
    const double tail = upper_tail((radius_ + 0.5) / scale_);
    p.front() = tail;
    p.back() = tail;
    for (std::int32_t s = -radius_; s <= radius_; ++s) p[index_of(s)] = discretized_gaussian_mass(s, scale_);

    const std::uint32_t budget = kTotal - static_cast<std::uint32_t>(n);
    freq_.assign(n, 1);
    std::uint32_t used = static_cast<std::uint32_t>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto extra = static_cast<std::uint32_t>(std::floor(p[i] * budget));
        freq_[i] += extra;
        used += extra;
    }
    if (used > kTotal) throw InvariantError("entropy model: frequency table overflow");
    const auto peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    freq_[peak] += kTotal - used;

    cum_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) cum_[i + 1] = cum_[i] + freq_[i];
}

std::size_t GaussianSymbolModel::index_of(std::int32_t symbol) const noexcept {
    if (symbol < -radius_) return 0;
    if (symbol > radius_) return 2 * static_cast<std::size_t>(radius_) + 2;
    return static_cast<std::size_t>(symbol + radius_ + 1);
}

double GaussianSymbolModel::probability(std::int32_t symbol) const {
    return static_cast<double>(freq_[index_of(symbol)]) / kTotal;
}

double GaussianSymbolModel::code_length_bits(std::int32_t symbol) const {
    const bool escape = symbol < -radius_ || symbol > radius_;
    return -std::log2(probability(symbol)) + (escape ? kEscapeBits : 0.0);
}

void GaussianSymbolModel::encode(RangeEncoder& enc, std::int32_t symbol) const {
    const std::size_t i = index_of(symbol);
    enc.encode(cum_[i], freq_[i], kTotal);
    if (symbol < -radius_ || symbol > radius_) {
        const std::int64_t excess = std::llabs(static_cast<std::int64_t>(symbol)) - radius_ - 1;
        if (excess >= (std::int64_t{1} << kEscapeBits))
            throw InputError("symbol " + std::to_string(symbol) + " exceeds the escape range");
        enc.encode_bits(static_cast<std::uint32_t>(excess), kEscapeBits);
    }
}

std::int32_t GaussianSymbolModel::decode(RangeDecoder& dec) const {
    const std::uint32_t target = dec.peek(kTotal);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    const auto i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    dec.consume(cum_[i], freq_[i]);
    if (i == 0 || i == freq_.size() - 1) {
        const auto excess = static_cast<std::int32_t>(dec.decode_bits(kEscapeBits));
        const std::int32_t mag = radius_ + 1 + excess;
        return i == 0 ? -mag : mag;
    }
    return static_cast<std::int32_t>(i) - radius_ - 1;
}

} // namespace iscs
