#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iscs/error.hpp"

namespace iscs {

enum class DType { F16, F32, F64 };

std::size_t dtype_size(DType t) noexcept;
const char* dtype_name(DType t) noexcept;

/// What went wrong while reading a tensor container or pulling a kernel set out of it.
enum class TensorErrorKind {
    Io,
    Truncated,
    MalformedJson,
    UnknownDtype,
    BadShape,
    OffsetOutOfBounds,
    OffsetOverlap,
    SizeMismatch,
    MissingTensor,
    RankMismatch,
    BiasLengthMismatch,
    NonFinite,
};

class TensorFileError : public InputError {
public:
    TensorFileError(TensorErrorKind kind, std::string tensor, const std::string& message);

    TensorErrorKind kind() const noexcept { return kind_; }
    /// Offending tensor name; empty when the error is not tied to one tensor.
    const std::string& tensor() const noexcept { return tensor_; }

private:
    TensorErrorKind kind_;
    std::string tensor_;
};

struct TensorInfo {
    DType dtype = DType::F32;
    std::vector<std::int64_t> shape;
    std::uint64_t begin = 0; // relative to the end of the header
    std::uint64_t end = 0;

    std::uint64_t element_count() const noexcept;
};

// In-memory image of the container: JSON header entries plus the raw payload.
struct TensorFile {
    std::map<std::string, TensorInfo> entries;
    std::vector<std::uint8_t> payload;

    bool contains(const std::string& name) const { return entries.contains(name); }
    const TensorInfo& info(const std::string& name) const;
    std::span<const std::uint8_t> bytes(const std::string& name) const;

    /// Element values promoted to double (exact for every supported dtype).
    std::vector<double> to_doubles(const std::string& name) const;

    /// Appends a tensor encoded as `dtype`. Values are narrowed with round-to-nearest-even.
    void add(const std::string& name, DType dtype, std::vector<std::int64_t> shape,
             std::span<const double> values);
};

TensorFile parse_tensor_file(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_tensor_file(const TensorFile& tf);

TensorFile read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path, const TensorFile& tf);

/// IEEE 754 binary16 <-> binary64. Promotion is exact.
double half_to_double(std::uint16_t bits) noexcept;
std::uint16_t double_to_half(double value) noexcept;

/// Output-channel kernels of one convolution layer, shape (C_out, C_in, K, K), row-major.
struct ConvKernelSet {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel_size = 0;
    std::vector<double> weights;
    std::optional<std::vector<double>> bias;

    std::size_t kernel_length() const noexcept { return in_channels * kernel_size * kernel_size; }
    std::span<const double> kernel(std::size_t c) const noexcept {
        return {weights.data() + c * kernel_length(), kernel_length()};
    }
    std::span<double> kernel(std::size_t c) noexcept {
        return {weights.data() + c * kernel_length(), kernel_length()};
    }

    /// Throws InputError when shape or finiteness invariants do not hold.
    void validate() const;
};

ConvKernelSet extract_kernel_set(const TensorFile& tf, const std::string& weight_name,
                                 const std::optional<std::string>& bias_name = std::nullopt);

} // namespace iscs
