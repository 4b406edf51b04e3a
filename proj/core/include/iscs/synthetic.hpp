#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "iscs/discovery.hpp"
#include "iscs/image.hpp"
#include "iscs/rng.hpp"
#include "iscs/tensor_io.hpp"

namespace iscs {

// Kernel sets with a known channel structure.
//
// SC kernels are zero-mean and mutually orthogonal with entry std in [2, 3]. Each SA is
// alpha * (SC + eta * |SC| * e) with e a unit direction orthogonal to every SC, so its cosine
// to its own SC is 1 / sqrt(1 + eta^2) >= 0.95 and to every other SC exactly 0. Residual
// channels are orthogonal noise with entry std in [0.1, 0.6]. Bias channels have tiny
// weights and |b| >= 20x the median; all other biases are spread over [0.01, 0.05].
struct PlantedConfig {
    std::size_t num_groups = 2;  // M
    std::size_t group_size = 4;  // N, SC included
    std::size_t bias_count = 1;  // B
    std::size_t residual = 0;    // R < N
    std::size_t in_channels = 2;
    std::size_t kernel_size = 3;
    double bias_factor = 20.0;   // bias channels get at least this multiple of 0.05

    std::size_t channels() const noexcept { return num_groups * group_size + bias_count + residual; }
    void validate() const;
};

/// Random configuration within M <= 8, N <= 16, B <= 4, kernel length >= 18.
PlantedConfig random_planted_config(Rng& rng);

struct PlantedKernels {
    PlantedConfig config;
    ConvKernelSet kernels;
    IscsStructure truth; // SA lists and residual sorted ascending; compare as sets
};

PlantedKernels generate_planted(const PlantedConfig& config, Rng& rng);

/// Grayscale image with a 1/f amplitude spectrum and random phases, mean about 128.
Image generate_pink_noise_image(std::size_t width, std::size_t height, Rng& rng);

/// Grayscale image whose p x p patches are level * 1 + contrast * checkerboard, with integer
/// level in [100, 110] and contrast in {-2..2}. Every patch lies in a two-dimensional span
/// around the mean patch.
Image generate_low_rank_image(std::size_t width, std::size_t height, std::size_t patch_size, Rng& rng);

} // namespace iscs
