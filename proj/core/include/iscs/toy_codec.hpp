#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "iscs/image.hpp"
#include "iscs/latent.hpp"
#include "iscs/matrix.hpp"
#include "iscs/tensor_io.hpp"

namespace iscs {

// Desk-scale transform codec: a patch-PCA analysis transform whose channel 0 is a planted
// bias channel (near-zero weights, large constant bias) that reconstructs the mean patch.
//
// Channels c >= 1:  z_c = <W_c, x - m>,  W_c = sqrt(lambda_c) v_c,  q_c = round((z_c - mu_c) / step)
// Channel 0:        z_0 = beta,          q_0 = round(z_0 / beta),  contributes q_0 * m at synthesis
struct ToyCodecModel {
    static constexpr std::size_t kBiasChannel = 0;
    static constexpr double kScaleFloor = 1e-4;
    static constexpr double kEigenFloor = 1e-12;
    static constexpr std::int32_t kSymbolMin = -32768;
    static constexpr std::int32_t kSymbolMax = 32767;

    std::size_t patch_size = 8;
    std::size_t channels = 32;
    std::vector<double> mean;        // p*p mean patch, pixel values in [0, 1]
    Matrix basis;                    // channels x p*p; row 0 is zero
    std::vector<double> eigenvalues; // channels; entry 0 is zero, the rest non-increasing
    Matrix weights;                  // channels x p*p analysis rows
    std::vector<double> bias;        // channels
    float step = 0.05F;              // quantizer step
    float beta = 4.0F;               // planted bias value
    std::vector<float> latent_mean;  // mu_c
    std::vector<float> latent_scale; // sigma_c >= kScaleFloor

    std::size_t patch_dim() const noexcept { return patch_size * patch_size; }
    /// Quantizer step of channel c (the bias channel uses beta).
    double channel_step(std::size_t c) const noexcept;
    /// Integer the entropy coder subtracts before coding channel c.
    std::int32_t symbol_offset(std::size_t c) const noexcept;
    /// Symbol-domain scale of channel c's entropy model.
    double symbol_scale(std::size_t c) const noexcept;

    void validate() const;
    std::uint64_t hash() const;
};

struct FitOptions {
    std::size_t patch_size = 8;
    std::size_t channels = 32;
    double step = 0.05;
    double beta = 4.0;
    std::uint64_t seed = 1;
};

ToyCodecModel fit(std::span<const Image> images, const FitOptions& options);

/// Real-valued latents, patch-major with channel innermost (same layout as LatentBlock).
std::vector<double> analysis_transform(const ToyCodecModel& model, const Image& image);
LatentBlock quantize(const ToyCodecModel& model, std::span<const double> latents, std::size_t patches_y,
                     std::size_t patches_x);
/// Image dimensions must be multiples of the patch size.
LatentBlock encode_latents(const ToyCodecModel& model, const Image& image);

/// Unclamped reconstruction in [0, 1] pixel units, row-major.
std::vector<double> synthesize_real(const ToyCodecModel& model, const LatentBlock& latents);
Image synthesize(const ToyCodecModel& model, const LatentBlock& latents);

ConvKernelSet export_encoder_weights(const ToyCodecModel& model);

TensorFile model_to_tensor_file(const ToyCodecModel& model);
ToyCodecModel model_from_tensor_file(const TensorFile& tf);
void save_model(const std::filesystem::path& path, const ToyCodecModel& model);
ToyCodecModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Bitstream

inline constexpr std::uint16_t kBitstreamVersion = 1;
inline constexpr std::uint16_t kFlagScalarPath = 1U << 0;
inline constexpr std::uint16_t kFlagPermuted = 1U << 1;

struct BitstreamHeader {
    std::uint16_t version = kBitstreamVersion;
    std::uint16_t flags = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint8_t patch_size = 0;
    std::uint16_t channels = 0;
    float step = 0.0F;
    float beta = 0.0F;
    std::uint64_t model_hash = 0;
    std::optional<std::uint64_t> manifest_hash;
    std::vector<float> latent_mean;
    std::vector<float> latent_scale;
    /// Scalar-path channels and the symbol broadcast to every patch.
    std::vector<std::pair<std::uint16_t, std::int32_t>> scalars;
    std::size_t header_bytes = 0;
    std::size_t payload_bytes = 0;
};

struct EncodeOptions {
    bool scalar_path = false;
    /// Channels sent as one scalar when scalar_path is on. Empty means the planted bias channel.
    std::vector<std::size_t> scalar_channels;
    /// Coding order: position j carries original channel permutation[j].
    std::optional<std::vector<std::size_t>> permutation;
    std::uint64_t manifest_hash = 0;
};

struct DecodeOptions {
    std::optional<std::vector<std::size_t>> permutation;
    std::optional<std::uint64_t> manifest_hash;
};

/// `width`/`height` are the original image size recorded in the header; the latent grid
/// covers it rounded up to whole patches.
std::vector<std::uint8_t> entropy_encode(const LatentBlock& latents, const ToyCodecModel& model, std::size_t width,
                                         std::size_t height, const EncodeOptions& options = {});

struct DecodedStream {
    BitstreamHeader header;
    LatentBlock latents; // original channel order
};

/// Throws IntegrityError on CRC, model-hash or manifest-hash mismatch.
DecodedStream entropy_decode(std::span<const std::uint8_t> stream, const ToyCodecModel& model,
                             const DecodeOptions& options = {});

BitstreamHeader parse_bitstream_header(std::span<const std::uint8_t> stream);

/// Pads, transforms, quantizes and entropy-codes one grayscale image.
std::vector<std::uint8_t> encode_image(const ToyCodecModel& model, const Image& image,
                                       const EncodeOptions& options = {});
Image decode_image(std::span<const std::uint8_t> stream, const ToyCodecModel& model,
                   const DecodeOptions& options = {});

/// Analytic code length in bits of every channel under the codec's quantized model.
std::vector<double> channel_code_lengths(const ToyCodecModel& model, const LatentBlock& latents);

} // namespace iscs
