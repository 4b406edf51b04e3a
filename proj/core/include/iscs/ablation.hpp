#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "iscs/image.hpp"
#include "iscs/latent.hpp"
#include "iscs/toy_codec.hpp"

namespace iscs {

/// Scalar-path channels are charged this many bits per image.
inline constexpr double kScalarBits = 32.0;

/// Analytic bits per pixel of every channel under the codec's entropy model.
/// Channels listed in `scalar_channels` cost kScalarBits / pixel_count instead.
std::vector<double> per_channel_bpp(const ToyCodecModel& model, const LatentBlock& latents, std::size_t pixel_count,
                                    std::span<const std::size_t> scalar_channels = {});

struct AblationDelta {
    double delta_psnr = 0.0;
    double delta_msssim = 0.0;
};

/// Quality drop when every quantized symbol of channel c is zeroed before synthesis.
AblationDelta ablate_channel(const ToyCodecModel& model, const Image& image, std::size_t channel);

struct AblationRow {
    std::size_t channel = 0;
    double bpp = 0.0;
    double delta_psnr = 0.0;
    double delta_msssim = 0.0;
    double baseline_psnr = 0.0;
    bool is_outlier = false;
};

struct AblationSweep {
    std::vector<AblationRow> rows; // one per channel, ascending
    std::size_t msssim_scales = 0; // fewest MS-SSIM scales used on any image
};

/// Per-channel averages over `images`. `outliers` marks rows (bias-dominated channels).
AblationSweep ablation_sweep(const ToyCodecModel& model, std::span<const Image> images,
                             std::span<const std::size_t> outliers);

struct CorrelationReport {
    double spearman = 0.0;   // bpp vs delta_psnr over non-outlier rows
    double log_fit_a = 0.0;  // delta_psnr ~ a log(bpp + 1e-6) + b
    double log_fit_b = 0.0;
    double log_fit_r2 = 0.0;
    std::size_t samples = 0;
    std::vector<std::size_t> outliers;
};

CorrelationReport correlation_report(std::span<const AblationRow> rows);

/// Spearman rank correlation with average ranks for ties. Zero when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Ranks starting at 1, ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// `channel,bpp,delta_psnr,delta_msssim,is_outlier`
std::string ablation_csv(std::span<const AblationRow> rows);
/// Two blank-line separated series of `bpp<TAB>delta_psnr`: regular channels, then outliers.
std::string ablation_plot_tsv(std::span<const AblationRow> rows);

/// Shortest round-trip text for a double; "inf" / "-inf" / "nan" for non-finite values.
std::string format_number(double v);

} // namespace iscs
