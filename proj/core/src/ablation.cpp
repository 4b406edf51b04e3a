#include "iscs/ablation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "iscs/error.hpp"
#include "iscs/metrics.hpp"

namespace iscs {
namespace {

constexpr double kLogEpsilon = 1e-6;

// Difference of two PSNR values where either may be +inf.
double psnr_drop(double baseline, double ablated) {
    if (std::isinf(baseline) && std::isinf(ablated)) return 0.0;
    return baseline - ablated;
}

struct Prepared {
    LatentBlock latents;
    Image reconstruction;
    double psnr = 0.0;
    MsSsimResult msssim;
};

Prepared prepare(const ToyCodecModel& model, const Image& image) {
    if (image.channels != 1) throw InputError("ablation needs grayscale images");
    Prepared p;
    p.latents = encode_latents(model, pad_to_multiple(image, model.patch_size));
    p.reconstruction = crop(synthesize(model, p.latents), image.width, image.height);
    p.psnr = psnr(image, p.reconstruction);
    p.msssim = ms_ssim_detailed(image, p.reconstruction);
    return p;
}

AblationDelta ablate_prepared(const ToyCodecModel& model, const Image& image, const Prepared& p, std::size_t c) {
    LatentBlock removed = p.latents;
    for (std::size_t patch = 0; patch < removed.patch_count(); ++patch) removed.at(patch, c) = 0;
    const Image recon = crop(synthesize(model, removed), image.width, image.height);
    return {psnr_drop(p.psnr, psnr(image, recon)), p.msssim.value - ms_ssim(image, recon)};
}

} // namespace

std::vector<double> per_channel_bpp(const ToyCodecModel& model, const LatentBlock& latents, std::size_t pixel_count,
                                    std::span<const std::size_t> scalar_channels) {
    if (pixel_count == 0) throw InputError("pixel count must be positive");
    auto bits = channel_code_lengths(model, latents);
    for (auto c : scalar_channels) {
        if (c >= bits.size()) throw InputError("scalar channel out of range");
        bits[c] = kScalarBits;
    }
    for (double& b : bits) b /= static_cast<double>(pixel_count);
    return bits;
}

AblationDelta ablate_channel(const ToyCodecModel& model, const Image& image, std::size_t channel) {
    if (channel >= model.channels) throw InputError("channel index out of range");
    return ablate_prepared(model, image, prepare(model, image), channel);
}

AblationSweep ablation_sweep(const ToyCodecModel& model, std::span<const Image> images,
                             std::span<const std::size_t> outliers) {
    if (images.empty()) throw InputError("ablation sweep needs at least one image");
    AblationSweep sweep;
    sweep.rows.resize(model.channels);
    for (std::size_t c = 0; c < model.channels; ++c) sweep.rows[c].channel = c;
    for (auto c : outliers) {
        if (c >= model.channels) throw InputError("outlier channel out of range");
        sweep.rows[c].is_outlier = true;
    }
    sweep.msssim_scales = std::numeric_limits<std::size_t>::max();

    for (const auto& image : images) {
        const Prepared p = prepare(model, image);
        sweep.msssim_scales = std::min(sweep.msssim_scales, p.msssim.scales);
        const auto bpp = per_channel_bpp(model, p.latents, image.pixel_count());
        for (std::size_t c = 0; c < model.channels; ++c) {
            const auto d = ablate_prepared(model, image, p, c);
            auto& row = sweep.rows[c];
            row.bpp += bpp[c];
            row.delta_psnr += d.delta_psnr;
            row.delta_msssim += d.delta_msssim;
            row.baseline_psnr += p.psnr;
        }
    }
    const auto n = static_cast<double>(images.size());
    for (auto& row : sweep.rows) {
        row.bpp /= n;
        row.delta_psnr /= n;
        row.delta_msssim /= n;
        row.baseline_psnr /= n;
    }
    return sweep;
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("spearman: length mismatch");
    if (x.size() < 2) return 0.0;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mean = 0.5 * static_cast<double>(x.size() + 1);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

CorrelationReport correlation_report(std::span<const AblationRow> rows) {
    CorrelationReport r;
    std::vector<double> bpp, drop, logx;
    for (const auto& row : rows) {
        if (row.is_outlier) {
            r.outliers.push_back(row.channel);
            continue;
        }
        if (!std::isfinite(row.delta_psnr) || !std::isfinite(row.bpp)) continue;
        bpp.push_back(row.bpp);
        drop.push_back(row.delta_psnr);
        logx.push_back(std::log(row.bpp + kLogEpsilon));
    }
    r.samples = bpp.size();
    r.spearman = spearman(bpp, drop);
    if (r.samples < 2) return r;

    const auto n = static_cast<double>(r.samples);
    const double mx = std::accumulate(logx.begin(), logx.end(), 0.0) / n;
    const double my = std::accumulate(drop.begin(), drop.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < r.samples; ++i) {
        sxx += (logx[i] - mx) * (logx[i] - mx);
        sxy += (logx[i] - mx) * (drop[i] - my);
        syy += (drop[i] - my) * (drop[i] - my);
    }
    r.log_fit_a = sxx > 0.0 ? sxy / sxx : 0.0;
    r.log_fit_b = my - r.log_fit_a * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < r.samples; ++i) {
        const double e = drop[i] - (r.log_fit_a * logx[i] + r.log_fit_b);
        ss_res += e * e;
    }
    r.log_fit_r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    return r;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

std::string ablation_csv(std::span<const AblationRow> rows) {
    std::string out = "channel,bpp,delta_psnr,delta_msssim,is_outlier\n";
    for (const auto& r : rows)
        out += std::to_string(r.channel) + "," + format_number(r.bpp) + "," + format_number(r.delta_psnr) + "," +
               format_number(r.delta_msssim) + "," + (r.is_outlier ? "1" : "0") + "\n";
    return out;
}

std::string ablation_plot_tsv(std::span<const AblationRow> rows) {
    std::string out;
    for (const bool outlier : {false, true}) {
        if (outlier) out += "\n\n";
        out += outlier ? "# outliers\n" : "# channels\n";
        out += "bpp\tdelta_psnr\n";
        for (const auto& r : rows)
            if (r.is_outlier == outlier) out += format_number(r.bpp) + "\t" + format_number(r.delta_psnr) + "\n";
    }
    return out;
}

} // namespace iscs
