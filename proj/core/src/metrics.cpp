#include "iscs/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "iscs/error.hpp"

namespace iscs {
namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

void require_same_shape(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw InputError("images differ in size or channel count");
    if (a.samples.empty()) throw InputError("empty image");
}

const std::array<double, kWindow>& gaussian_taps() {
    static const std::array<double, kWindow> taps = [] {
        std::array<double, kWindow> t{};
        double sum = 0.0;
        for (std::size_t i = 0; i < kWindow; ++i) {
            const double d = static_cast<double>(i) - 5.0;
            t[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += t[i];
        }
        for (double& v : t) v /= sum;
        return t;
    }();
    return taps;
}

// Separable valid-mode Gaussian filter.
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t w, std::size_t h) {
    const auto& g = gaussian_taps();
    const std::size_t ow = w - kWindow + 1;
    const std::size_t oh = h - kWindow + 1;
    std::vector<double> rows(ow * h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * in[y * w + x + k];
            rows[y * ow + x] = s;
        }
    std::vector<double> out(ow * oh);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * rows[(y + k) * ow + x];
            out[y * ow + x] = s;
        }
    return out;
}

struct SsimParts {
    double ssim = 1.0;
    double cs = 1.0;
};

SsimParts ssim_parts(const std::vector<double>& a, const std::vector<double>& b, std::size_t w, std::size_t h) {
    if (w < kWindow || h < kWindow) throw InputError("image smaller than the 11x11 SSIM window");
    std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, w, h);
    const auto mu_b = filter_valid(b, w, h);
    const auto e_aa = filter_valid(aa, w, h);
    const auto e_bb = filter_valid(bb, w, h);
    const auto e_ab = filter_valid(ab, w, h);
    double ssim_sum = 0.0;
    double cs_sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = e_aa[i] - mu_a[i] * mu_a[i];
        const double vb = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        const double cs = (2.0 * cov + kC2) / (va + vb + kC2);
        const double lum = (2.0 * mu_a[i] * mu_b[i] + kC1) / (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1);
        ssim_sum += lum * cs;
        cs_sum += cs;
    }
    const auto n = static_cast<double>(mu_a.size());
    return {ssim_sum / n, cs_sum / n};
}

std::vector<double> downsample(const std::vector<double>& in, std::size_t w, std::size_t h) {
    const std::size_t ow = w / 2;
    const std::size_t oh = h / 2;
    std::vector<double> out(ow * oh);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x)
            out[y * ow + x] = 0.25 * (in[2 * y * w + 2 * x] + in[2 * y * w + 2 * x + 1] + in[(2 * y + 1) * w + 2 * x] +
                                      in[(2 * y + 1) * w + 2 * x + 1]);
    return out;
}

std::vector<double> plane(const Image& img, std::size_t c) {
    std::vector<double> out(img.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.samples[i * img.channels + c];
    return out;
}

std::size_t feasible_scales(std::size_t w, std::size_t h) {
    std::size_t scales = 0;
    while (scales < kScaleWeights.size() && (w >> scales) >= kWindow && (h >> scales) >= kWindow) ++scales;
    return scales;
}

double ms_ssim_plane(std::vector<double> a, std::vector<double> b, std::size_t w, std::size_t h,
                     std::size_t scales) {
    double weight_sum = 0.0;
    for (std::size_t s = 0; s < scales; ++s) weight_sum += kScaleWeights[s];
    double result = 1.0;
    for (std::size_t s = 0; s < scales; ++s) {
        const auto parts = ssim_parts(a, b, w, h);
        const double weight = kScaleWeights[s] / weight_sum;
        const double term = s + 1 == scales ? parts.ssim : parts.cs;
        result *= std::pow(std::max(term, 0.0), weight);
        if (s + 1 < scales) {
            a = downsample(a, w, h);
            b = downsample(b, w, h);
            w /= 2;
            h /= 2;
        }
    }
    return result;
}

} // namespace

double mse(const Image& a, const Image& b) {
    require_same_shape(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = static_cast<double>(a.samples[i]) - static_cast<double>(b.samples[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(a.samples.size());
}

double psnr(const Image& a, const Image& b) {
    const double e = mse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / e);
}

double ssim_plane(const std::vector<double>& a, const std::vector<double>& b, std::size_t width, std::size_t height) {
    if (a.size() != width * height || b.size() != a.size()) throw InputError("plane size mismatch");
    return ssim_parts(a, b, width, height).ssim;
}

MsSsimResult ms_ssim_detailed(const Image& a, const Image& b) {
    require_same_shape(a, b);
    const std::size_t scales = feasible_scales(a.width, a.height);
    if (scales == 0) throw InputError("image smaller than 11 pixels on a side; MS-SSIM undefined");
    MsSsimResult r;
    r.scales = scales;
    double sum = 0.0;
    for (std::size_t c = 0; c < a.channels; ++c)
        sum += ms_ssim_plane(plane(a, c), plane(b, c), a.width, a.height, scales);
    r.value = sum / static_cast<double>(a.channels);
    return r;
}

double ms_ssim(const Image& a, const Image& b) { return ms_ssim_detailed(a, b).value; }

} // namespace iscs
