#include "iscs/range_coder.hpp"

#include <algorithm>

#include "iscs/error.hpp"

namespace iscs {
namespace {
constexpr std::uint32_t kTop = 1U << 24;
constexpr std::uint32_t kMaxTotal = 1U << 16;
} // namespace

RangeEncoder::RangeEncoder() = default;

void RangeEncoder::encode(std::uint32_t cum_freq, std::uint32_t freq, std::uint32_t total_freq) {
    if (freq == 0 || total_freq > kMaxTotal || cum_freq + freq > total_freq)
        throw InvariantError("range coder: invalid frequency triple");
    const std::uint32_t r = range_ / total_freq;
    low_ += static_cast<std::uint64_t>(r) * cum_freq;
    range_ = r * freq;
    while (range_ < kTop) {
        range_ <<= 8;
        shift_low();
    }
}

void RangeEncoder::encode_bits(std::uint32_t value, unsigned bits) {
    encode(value & ((1U << bits) - 1U), 1, 1U << bits);
}

void RangeEncoder::shift_low() {
    if (static_cast<std::uint32_t>(low_) < 0xFF000000U || (low_ >> 32) != 0) {
        const auto carry = static_cast<std::uint8_t>(low_ >> 32);
        std::uint8_t pending = cache_;
        do {
            out_.push_back(static_cast<std::uint8_t>(pending + carry));
            pending = 0xFF;
        } while (--cache_size_ != 0);
        cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFULL) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : in_(bytes) {
    // The encoder always emits a leading zero byte from its initial cache.
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
    if (pos_ < in_.size()) return in_[pos_++];
    overrun_ = true;
    ++pos_;
    return 0;
}

std::uint32_t RangeDecoder::peek(std::uint32_t total_freq) {
    step_ = range_ / total_freq;
    return std::min(code_ / step_, total_freq - 1);
}

void RangeDecoder::consume(std::uint32_t cum_freq, std::uint32_t freq) {
    code_ -= step_ * cum_freq;
    range_ = step_ * freq;
    while (range_ < kTop) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
}

std::uint32_t RangeDecoder::decode_bits(unsigned bits) {
    const std::uint32_t v = peek(1U << bits);
    consume(v, 1);
    return v;
}

} // namespace iscs
