#pragma once

#include <cstddef>
#include <vector>

#include "iscs/image.hpp"

namespace iscs {

/// 10 log10(255^2 / MSE) over all samples; +infinity for identical images.
double psnr(const Image& a, const Image& b);
double mse(const Image& a, const Image& b);

/// Mean single-scale SSIM of one plane (11x11 Gaussian window, sigma 1.5, valid region).
double ssim_plane(const std::vector<double>& a, const std::vector<double>& b, std::size_t width, std::size_t height);

struct MsSsimResult {
    double value = 1.0;
    std::size_t scales = 0; // scales actually used (5 unless the image is too small)
};

/// Five-scale MS-SSIM. Images too small for five scales use as many as fit, with the
/// leading scale weights renormalized. RGB inputs average the per-plane results.
MsSsimResult ms_ssim_detailed(const Image& a, const Image& b);
double ms_ssim(const Image& a, const Image& b);

} // namespace iscs
