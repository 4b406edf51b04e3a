#include "iscs/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iscs/error.hpp"

namespace iscs {
namespace {

constexpr double kZeroNorm = 1e-30;

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

std::vector<double> variance_scores(const ConvKernelSet& k) {
    std::vector<double> out(k.out_channels);
    const double n = static_cast<double>(k.kernel_length());
    for (std::size_t c = 0; c < k.out_channels; ++c) {
        auto w = k.kernel(c);
        double mean = 0.0;
        for (double v : w) mean += v;
        mean /= n;
        // Second pass with the compensation term of the corrected two-pass algorithm.
        double sq = 0.0;
        double comp = 0.0;
        for (double v : w) {
            const double d = v - mean;
            sq += d * d;
            comp += d;
        }
        out[c] = std::max(0.0, (sq - comp * comp / n) / n);
    }
    return out;
}

std::vector<double> bias_scores(const ConvKernelSet& k) {
    std::vector<double> out(k.out_channels, 0.0);
    if (k.bias)
        for (std::size_t c = 0; c < k.out_channels; ++c) out[c] = std::fabs((*k.bias)[c]);
    return out;
}

Matrix cosine_similarity_matrix(const ConvKernelSet& k) {
    const std::size_t n = k.out_channels;
    std::vector<double> norms(n);
    for (std::size_t c = 0; c < n; ++c) norms[c] = std::sqrt(dot(k.kernel(c), k.kernel(c)));

    Matrix sim(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        sim(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            if (norms[i] >= kZeroNorm && norms[j] >= kZeroNorm)
                s = std::clamp(dot(k.kernel(i), k.kernel(j)) / (norms[i] * norms[j]), -1.0, 1.0);
            sim(i, j) = s;
            sim(j, i) = s;
        }
    }
    return sim;
}

ChannelScores compute_scores(const ConvKernelSet& k) {
    k.validate();
    return {variance_scores(k), bias_scores(k), cosine_similarity_matrix(k)};
}

std::vector<std::size_t> rank_descending(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) throw InputError("cannot rank a non-finite value");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

} // namespace iscs
