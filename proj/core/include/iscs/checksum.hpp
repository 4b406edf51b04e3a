#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace iscs {

/// CRC-32 (IEEE 802.3, reflected, polynomial 0xEDB88320).
std::uint32_t crc32(std::span<const std::uint8_t> bytes, std::uint32_t seed = 0);

/// Incremental 64-bit FNV-1a.
class Fnv1a64 {
public:
    void update(std::span<const std::uint8_t> bytes) noexcept;
    void update(std::string_view text) noexcept;
    template <typename T>
    void update_value(const T& v) noexcept {
        update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(&v), sizeof(T)));
    }
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

} // namespace iscs
