#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace iscs {

// Byte-oriented range coder: 64-bit low register, 32-bit range, renormalizing one byte at a
// time whenever range drops below 2^24. A carry out of bit 32 is absorbed by a pending-byte
// cache before anything is emitted, so written bytes are never revisited.
//
// Frequencies are cumulative counts over a total of at most 2^16.

class RangeEncoder {
public:
    RangeEncoder();

    void encode(std::uint32_t cum_freq, std::uint32_t freq, std::uint32_t total_freq);
    /// `bits` (<= 16) equiprobable bits.
    void encode_bits(std::uint32_t value, unsigned bits);
    /// Flushes the coder state. No further encode calls are allowed.
    std::vector<std::uint8_t> finish();

private:
    void shift_low();

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFU;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> bytes);

    /// Cumulative frequency the next symbol falls into; follow with consume().
    std::uint32_t peek(std::uint32_t total_freq);
    void consume(std::uint32_t cum_freq, std::uint32_t freq);
    std::uint32_t decode_bits(unsigned bits);

    /// True when decoding ran past the end of the input.
    bool overrun() const noexcept { return overrun_; }

private:
    std::uint8_t next_byte();

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint32_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFU;
    std::uint32_t step_ = 0;
    bool overrun_ = false;
};

} // namespace iscs
