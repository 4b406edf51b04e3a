#include "iscs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "iscs/error.hpp"

namespace iscs {
namespace {

constexpr double kOtherBiasLo = 0.01;
constexpr double kOtherBiasHi = 0.05;
constexpr double kBiasWeightStd = 1e-3;

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void normalize(Vec& v) {
    const double n = std::sqrt(dot(v, v));
    for (double& x : v) x /= n;
}

// Unit Gaussian direction orthogonal to every vector in `basis` (assumed orthonormal).
Vec random_orthogonal(const std::vector<Vec>& basis, std::size_t dim, Rng& rng) {
    for (;;) {
        Vec v(dim);
        for (double& x : v) x = rng.normal();
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) {
                const double p = dot(v, q);
                for (std::size_t i = 0; i < dim; ++i) v[i] -= p * q[i];
            }
        if (std::sqrt(dot(v, v)) > 1e-6) {
            normalize(v);
            return v;
        }
    }
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

} // namespace

void PlantedConfig::validate() const {
    const std::size_t dim = in_channels * kernel_size * kernel_size;
    if (num_groups < 1 || group_size < 2) throw InputError("planted structure needs M >= 1 and N >= 2");
    if (residual >= group_size) throw InputError("planted residual must be smaller than N");
    if (dim < num_groups + 2) throw InputError("kernel too short to hold orthogonal planted directions");
    const std::size_t others = channels() - bias_count;
    if (bias_count > 0 && others < 2 * bias_count + 2)
        throw InputError("too many bias channels for the robust outlier rule to see them");
    if (!(bias_factor > 0.0)) throw InputError("bias factor must be positive");
}

PlantedConfig random_planted_config(Rng& rng) {
    PlantedConfig c;
    c.num_groups = 1 + rng.below(8);
    c.group_size = 2 + rng.below(15);
    c.residual = rng.below(c.group_size);
    c.in_channels = 2 + rng.below(7);
    c.kernel_size = 3 + 2 * rng.below(3);
    const std::size_t others = c.num_groups * c.group_size + c.residual;
    c.bias_count = std::min<std::size_t>(rng.below(5), (others - 2) / 2);
    return c;
}

PlantedKernels generate_planted(const PlantedConfig& config, Rng& rng) {
    config.validate();
    const std::size_t dim = config.in_channels * config.kernel_size * config.kernel_size;
    const std::size_t channels = config.channels();
    const double root_dim = std::sqrt(static_cast<double>(dim));

    std::vector<std::size_t> slot(channels);
    std::iota(slot.begin(), slot.end(), 0);
    shuffle(slot, rng);
    std::size_t next_slot = 0;

    PlantedKernels out;
    out.config = config;
    auto& k = out.kernels;
    k.out_channels = channels;
    k.in_channels = config.in_channels;
    k.kernel_size = config.kernel_size;
    k.weights.assign(channels * dim, 0.0);
    k.bias = std::vector<double>(channels, 0.0);
    auto set_kernel = [&](std::size_t c, const Vec& v, double scale) {
        auto dst = k.kernel(c);
        for (std::size_t i = 0; i < dim; ++i) dst[i] = scale * v[i];
    };

    std::vector<Vec> basis{Vec(dim, 1.0 / root_dim)};
    std::vector<Vec> sc_dirs;
    for (std::size_t g = 0; g < config.num_groups; ++g) {
        sc_dirs.push_back(random_orthogonal(basis, dim, rng));
        basis.push_back(sc_dirs.back());
    }

    struct Planted {
        double stddev;
        ChannelGroup group;
    };
    std::vector<Planted> groups;
    for (std::size_t g = 0; g < config.num_groups; ++g) {
        Planted p{rng.uniform(2.0, 3.0), {}};
        p.group.sc = slot[next_slot++];
        const double norm = p.stddev * root_dim;
        set_kernel(p.group.sc, sc_dirs[g], norm);
        for (std::size_t j = 1; j < config.group_size; ++j) {
            const std::size_t c = slot[next_slot++];
            const double alpha = rng.uniform(0.4, 0.6);
            const double eta = rng.uniform(0.05, 0.3);
            const Vec e = random_orthogonal(basis, dim, rng);
            Vec v(dim);
            for (std::size_t i = 0; i < dim; ++i) v[i] = alpha * norm * (sc_dirs[g][i] + eta * e[i]);
            set_kernel(c, v, 1.0);
            p.group.sa.push_back(c);
        }
        std::sort(p.group.sa.begin(), p.group.sa.end());
        groups.push_back(std::move(p));
    }
    std::stable_sort(groups.begin(), groups.end(),
                     [](const Planted& a, const Planted& b) { return a.stddev > b.stddev; });
    for (auto& p : groups) out.truth.groups.push_back(p.group);

    for (std::size_t b = 0; b < config.bias_count; ++b) {
        const std::size_t c = slot[next_slot++];
        Vec v(dim);
        for (double& x : v) x = kBiasWeightStd * rng.normal();
        set_kernel(c, v, 1.0);
        const double mag = config.bias_factor * kOtherBiasHi * rng.uniform(1.2, 2.0);
        (*k.bias)[c] = (rng.next() & 1U) ? mag : -mag;
        out.truth.bias_channels.push_back(c);
    }
    for (std::size_t r = 0; r < config.residual; ++r) {
        const std::size_t c = slot[next_slot++];
        set_kernel(c, random_orthogonal(basis, dim, rng), rng.uniform(0.1, 0.6) * root_dim);
        out.truth.residual.push_back(c);
    }
    std::sort(out.truth.bias_channels.begin(), out.truth.bias_channels.end());
    std::sort(out.truth.residual.begin(), out.truth.residual.end());

    // Ordinary biases evenly spread so no ordinary channel looks like an outlier.
    std::vector<std::size_t> ordinary;
    for (std::size_t c = 0; c < channels; ++c)
        if (!std::binary_search(out.truth.bias_channels.begin(), out.truth.bias_channels.end(), c))
            ordinary.push_back(c);
    shuffle(ordinary, rng);
    for (std::size_t i = 0; i < ordinary.size(); ++i) {
        const double mag = kOtherBiasLo + (kOtherBiasHi - kOtherBiasLo) * (static_cast<double>(i) + 0.5) /
                                              static_cast<double>(ordinary.size());
        (*k.bias)[ordinary[i]] = (rng.next() & 1U) ? mag : -mag;
    }
    return out;
}

Image generate_pink_noise_image(std::size_t width, std::size_t height, Rng& rng) {
    using cd = std::complex<double>;
    constexpr double kTwoPi = 6.283185307179586476925;
    std::vector<cd> spec(width * height);
    for (std::size_t v = 0; v < height; ++v)
        for (std::size_t u = 0; u < width; ++u) {
            const double fu = static_cast<double>(std::min(u, width - u));
            const double fv = static_cast<double>(std::min(v, height - v));
            const double f = std::sqrt(fu * fu + fv * fv);
            const double phase = kTwoPi * rng.uniform();
            spec[v * width + u] = f > 0.0 ? std::polar(1.0 / f, phase) : cd(0.0, 0.0);
        }
    // Separable inverse DFT: rows, then columns.
    auto twiddles = [&](std::size_t n) {
        std::vector<cd> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = std::polar(1.0, kTwoPi * static_cast<double>(i) / n);
        return t;
    };
    const auto tw = twiddles(width);
    const auto th = twiddles(height);
    std::vector<cd> rows(width * height);
    for (std::size_t v = 0; v < height; ++v)
        for (std::size_t x = 0; x < width; ++x) {
            cd s = 0.0;
            for (std::size_t u = 0; u < width; ++u) s += spec[v * width + u] * tw[(u * x) % width];
            rows[v * width + x] = s;
        }
    std::vector<double> field(width * height);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            cd s = 0.0;
            for (std::size_t v = 0; v < height; ++v) s += rows[v * width + x] * th[(v * y) % height];
            field[y * width + x] = s.real();
        }

    const double n = static_cast<double>(field.size());
    const double mean = std::accumulate(field.begin(), field.end(), 0.0) / n;
    double var = 0.0;
    for (double f : field) var += (f - mean) * (f - mean);
    const double sd = std::sqrt(var / n);
    Image img(width, height, 1);
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double v = 128.0 + 40.0 * (sd > 0.0 ? (field[i] - mean) / sd : 0.0);
        img.samples[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    return img;
}

Image generate_low_rank_image(std::size_t width, std::size_t height, std::size_t patch_size, Rng& rng) {
    if (patch_size == 0 || width % patch_size != 0 || height % patch_size != 0)
        throw InputError("low-rank image size must be a multiple of the patch size");
    Image img(width, height, 1);
    for (std::size_t py = 0; py < height / patch_size; ++py)
        for (std::size_t px = 0; px < width / patch_size; ++px) {
            const auto level = static_cast<int>(100 + rng.below(11));
            const int contrast = static_cast<int>(rng.below(5)) - 2;
            for (std::size_t y = 0; y < patch_size; ++y)
                for (std::size_t x = 0; x < patch_size; ++x) {
                    const int sign = ((x + y) % 2 == 0) ? 1 : -1;
                    img.at(px * patch_size + x, py * patch_size + y) = static_cast<std::uint8_t>(level + sign * contrast);
                }
        }
    return img;
}

} // namespace iscs
