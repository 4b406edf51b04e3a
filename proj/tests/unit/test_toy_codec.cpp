#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "iscs/ablation.hpp"
#include "iscs/discovery.hpp"
#include "iscs/grouping.hpp"
#include "iscs/metrics.hpp"
#include "iscs/synthetic.hpp"
#include "iscs/toy_codec.hpp"
#include "oracles.hpp"

using namespace iscs;

namespace {

std::vector<Image> pink_images(std::size_t count, std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Image> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_pink_noise_image(size, size, rng));
    return out;
}

const ToyCodecModel& pink_model() {
    static const ToyCodecModel m = [] {
        FitOptions o;
        o.channels = 32;
        return fit(pink_images(4, 64, 77), o);
    }();
    return m;
}

// Row k of the 16x16 Sylvester-Hadamard matrix, scaled to unit norm.
std::vector<double> hadamard_row(std::size_t k) {
    std::vector<double> v(16);
    for (std::size_t i = 0; i < 16; ++i) v[i] = (__builtin_popcount(static_cast<unsigned>(i & k)) % 2 ? -0.25 : 0.25);
    return v;
}

// One 4x4-patch image whose patches are mean + sum_c a_c g_c v_c with Gaussian g.
Image spectrum_image(const std::vector<double>& amplitudes, const std::vector<std::size_t>& rows, std::size_t grid,
                     Rng& rng) {
    Image img(grid * 4, grid * 4, 1);
    std::vector<std::vector<double>> basis;
    for (auto r : rows) basis.push_back(hadamard_row(r));
    for (std::size_t py = 0; py < grid; ++py)
        for (std::size_t px = 0; px < grid; ++px) {
            std::vector<double> x(16, 0.5);
            for (std::size_t c = 0; c < amplitudes.size(); ++c) {
                const double g = rng.normal();
                for (std::size_t i = 0; i < 16; ++i) x[i] += amplitudes[c] * g * basis[c][i];
            }
            for (std::size_t i = 0; i < 16; ++i)
                img.at(px * 4 + i % 4, py * 4 + i / 4) =
                    static_cast<std::uint8_t>(std::lround(std::clamp(x[i], 0.0, 1.0) * 255.0));
        }
    return img;
}

// Hand-built model with an identity-like basis; used where fitted statistics are irrelevant.
ToyCodecModel manual_model(std::size_t p, std::size_t c, float step, float scale) {
    ToyCodecModel m;
    m.patch_size = p;
    m.channels = c;
    const std::size_t d = p * p;
    m.mean.assign(d, 0.5);
    m.basis = Matrix(c, d);
    m.weights = Matrix(c, d);
    m.eigenvalues.assign(c, 0.0);
    for (std::size_t k = 1; k < c; ++k) {
        m.eigenvalues[k] = 1.0;
        m.basis(k, k) = 1.0;
        m.weights(k, k) = 1.0;
    }
    m.bias.assign(c, 0.0);
    m.bias[0] = 4.0;
    m.step = step;
    m.beta = 4.0F;
    m.latent_mean.assign(c, 0.0F);
    m.latent_mean[0] = 4.0F;
    m.latent_scale.assign(c, scale);
    m.validate();
    return m;
}

double cross_entropy_bits(const ToyCodecModel& m, const LatentBlock& l, const std::vector<bool>& skip = {}) {
    const auto bits = channel_code_lengths(m, l);
    double total = 0.0;
    for (std::size_t c = 0; c < bits.size(); ++c)
        if (skip.empty() || !skip[c]) total += bits[c];
    return total;
}

} // namespace

TEST(Fit, ConstantImagesGiveFlooredScales) {
    std::vector<Image> imgs{Image(32, 32, 1, 90), Image(32, 32, 1, 90)};
    FitOptions o;
    o.channels = 8;
    const auto m = fit(imgs, o);
    for (std::size_t c = 1; c < 8; ++c) {
        EXPECT_EQ(m.eigenvalues[c], 0.0);
        EXPECT_EQ(m.latent_scale[c], static_cast<float>(ToyCodecModel::kScaleFloor));
    }
}

TEST(Fit, RecoversPlantedSpectrum) {
    Rng rng(1);
    const std::vector<double> amplitudes{0.2, 0.1, 0.05};
    const std::vector<std::size_t> rows{3, 9, 6};
    std::vector<Image> imgs{spectrum_image(amplitudes, rows, 100, rng)};
    FitOptions o;
    o.patch_size = 4;
    o.channels = 4;
    const auto m = fit(imgs, o);
    for (std::size_t c = 1; c < 4; ++c) {
        const double expect = amplitudes[c - 1] * amplitudes[c - 1];
        EXPECT_NEAR(m.eigenvalues[c], expect, 0.05 * expect);
        const auto v = hadamard_row(rows[c - 1]);
        double dot = 0.0;
        for (std::size_t i = 0; i < 16; ++i) dot += v[i] * m.basis(c, i);
        EXPECT_GE(std::abs(dot), 0.99);
    }
    for (std::size_t a = 1; a < 4; ++a)
        for (std::size_t b = 1; b < 4; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 16; ++i) dot += m.basis(a, i) * m.basis(b, i);
            EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-8);
        }

    // Zero-mean basis rows make the kernel variance exactly lambda / p^2, so ranks agree.
    const auto variance = variance_scores(export_encoder_weights(m));
    std::vector<double> var_tail(variance.begin() + 1, variance.end());
    std::vector<double> lambda_tail(m.eigenvalues.begin() + 1, m.eigenvalues.end());
    EXPECT_EQ(spearman(var_tail, lambda_tail), 1.0);
    EXPECT_GT(variance[1], variance[2]);
}

TEST(Fit, Errors) {
    FitOptions o;
    EXPECT_THROW(fit(std::vector<Image>{}, o), InputError);
    EXPECT_THROW(fit(std::vector<Image>{Image(16, 16, 1)}, o), InputError); // 4 patches < 32 channels
    EXPECT_THROW(fit(std::vector<Image>{Image(64, 64, 3)}, o), InputError);
    o.channels = 65;
    EXPECT_THROW(fit(std::vector<Image>{Image(512, 512, 1)}, o), InputError);
}

TEST(Analysis, MatchesNaiveLoop) {
    const auto& m = pink_model();
    const auto img = pink_images(1, 64, 5)[0];
    const auto z = analysis_transform(m, img);
    const std::size_t p = m.patch_size;
    for (std::size_t py = 0; py < 8; ++py)
        for (std::size_t px = 0; px < 8; ++px)
            for (std::size_t c = 1; c < m.channels; ++c) {
                long double s = 0.0L;
                for (std::size_t y = 0; y < p; ++y)
                    for (std::size_t x = 0; x < p; ++x)
                        s += static_cast<long double>(m.weights(c, y * p + x)) *
                             (img.at(px * p + x, py * p + y) / 255.0 - m.mean[y * p + x]);
                EXPECT_NEAR(z[(py * 8 + px) * m.channels + c], static_cast<double>(s) + m.bias[c], 1e-10);
            }
}

TEST(Analysis, CenteredInputAndCoarseStep) {
    auto m = pink_model();
    std::fill(m.mean.begin(), m.mean.end(), 128.0 / 255.0);
    const Image flat(16, 16, 1, 128);
    const auto z = analysis_transform(m, flat);
    for (std::size_t patch = 0; patch < 4; ++patch) {
        EXPECT_EQ(z[patch * m.channels], static_cast<double>(m.beta));
        for (std::size_t c = 1; c < m.channels; ++c) EXPECT_EQ(z[patch * m.channels + c], 0.0);
    }
    m.step = 1e6F;
    const auto q = encode_latents(m, pink_images(1, 64, 6)[0]);
    for (std::size_t patch = 0; patch < q.patch_count(); ++patch)
        for (std::size_t c = 1; c < m.channels; ++c) EXPECT_EQ(q.at(patch, c), 0);
    EXPECT_THROW(analysis_transform(m, Image(20, 16, 1)), InputError);
}

TEST(Synthesis, NearLosslessOnInSpanImages) {
    Rng rng(2);
    std::vector<Image> imgs;
    for (int i = 0; i < 4; ++i) imgs.push_back(generate_low_rank_image(64, 64, 8, rng));
    FitOptions o;
    o.channels = 4;
    o.step = 1e-6;
    const auto m = fit(imgs, o);
    for (const auto& img : imgs) {
        const auto rec = synthesize(m, encode_latents(m, img));
        EXPECT_GE(psnr(img, rec), 80.0);
    }
}

TEST(Synthesis, ZeroLatentsGiveBlackFrame) {
    auto m = pink_model();
    std::fill(m.latent_mean.begin(), m.latent_mean.end(), 0.0F);
    const auto img = synthesize(m, LatentBlock(2, 3, m.channels));
    EXPECT_EQ(img.width, 24U);
    EXPECT_TRUE(std::all_of(img.samples.begin(), img.samples.end(), [](auto s) { return s == 0; }));
}

TEST(Synthesis, DroppingBiasChannelLosesTheMean) {
    const auto& m = pink_model();
    const auto img = pink_images(1, 64, 8)[0];
    auto q = encode_latents(m, img);
    const double base = psnr(img, synthesize(m, q));
    for (std::size_t p = 0; p < q.patch_count(); ++p) q.at(p, 0) = 0;
    EXPECT_GT(base - psnr(img, synthesize(m, q)), 10.0);
}

TEST(Synthesis, DistortionMonotoneInStep) {
    auto m = pink_model();
    const auto img = pink_images(1, 64, 9)[0];
    double previous = std::numeric_limits<double>::infinity();
    for (float step : {0.005F, 0.01F, 0.02F, 0.05F, 0.1F, 0.2F, 0.5F}) {
        m.step = step;
        const double q = psnr(img, synthesize(m, encode_latents(m, img)));
        EXPECT_GE(q, 0.0);
        EXPECT_LE(q, previous + 0.1);
        previous = q;
    }
}

TEST(Export, ShapeAndTensorRoundTrip) {
    const auto& m = pink_model();
    const auto k = export_encoder_weights(m);
    EXPECT_EQ(k.out_channels, 32U);
    EXPECT_EQ(k.in_channels, 1U);
    EXPECT_EQ(k.kernel_size, 8U);
    ASSERT_TRUE(k.bias.has_value());

    const auto path = std::filesystem::temp_directory_path() / "iscs_toy_model_test.bin";
    save_model(path, m);
    const auto back = load_model(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.bias, m.bias);
    EXPECT_EQ(back.latent_scale, m.latent_scale);
    EXPECT_EQ(back.hash(), m.hash());

    const auto tf = model_to_tensor_file(m);
    const auto again = extract_kernel_set(parse_tensor_file(serialize_tensor_file(tf)), "analysis.weight",
                                          std::string("analysis.bias"));
    EXPECT_EQ(again.weights, k.weights);
}

TEST(Export, BiasChannelIsFlaggedByDiscovery) {
    const auto scores = compute_scores(export_encoder_weights(pink_model()));
    EXPECT_EQ(flag_bias_dominated(scores, 3.5), std::vector<std::size_t>{0});
    DiscoveryParams p;
    p.group_size = 8;
    const auto s = discover(scores, p);
    EXPECT_EQ(s.bias_channels, std::vector<std::size_t>{0});
    s.check_partition(32);
}

TEST(EntropyCoding, AllZeroSymbolsNearCrossEntropy) {
    const auto m = manual_model(2, 2, 1.0F, 1.0F);
    LatentBlock l(50, 50, 2);
    for (std::size_t p = 0; p < l.patch_count(); ++p) l.at(p, 0) = 1;
    const auto stream = entropy_encode(l, m, 100, 100);
    const auto h = parse_bitstream_header(stream);
    EXPECT_LE(static_cast<double>(h.payload_bytes), cross_entropy_bits(m, l) / 8.0 + 64.0);
    EXPECT_EQ(entropy_decode(stream, m).latents, l);
}

TEST(EntropyCoding, RandomSymbolsRoundTrip) {
    Rng rng(3);
    for (int seed = 0; seed < 100; ++seed) {
        const float scale = static_cast<float>(std::exp(rng.uniform(-3.0, 3.0)));
        const auto m = manual_model(8, 32, 0.05F, scale);
        LatentBlock l(10, 10, 32);
        for (std::size_t p = 0; p < l.patch_count(); ++p)
            for (std::size_t c = 0; c < 32; ++c)
                l.at(p, c) = static_cast<std::int32_t>(std::lround(rng.normal() * scale / 0.05 * rng.uniform(0, 3)));
        const auto stream = entropy_encode(l, m, 80, 80);
        const auto d = entropy_decode(stream, m);
        ASSERT_EQ(d.latents, l) << seed;
        const double bound = cross_entropy_bits(m, l) / 8.0;
        EXPECT_LE(static_cast<double>(d.header.payload_bytes), bound * 1.001 + 64.0);
        EXPECT_EQ(d.header.header_bytes + d.header.payload_bytes + 4, stream.size());
    }
}

TEST(EntropyCoding, ScalarPathKeepsReconstruction) {
    const auto& m = pink_model();
    const auto img = pink_images(1, 64, 10)[0];
    EncodeOptions scalar;
    scalar.scalar_path = true;
    const auto plain = encode_image(m, img);
    const auto lean = encode_image(m, img, scalar);
    EXPECT_EQ(decode_image(lean, m), decode_image(plain, m));
    const auto h = parse_bitstream_header(lean);
    EXPECT_EQ(h.flags & kFlagScalarPath, kFlagScalarPath);
    ASSERT_EQ(h.scalars.size(), 1U);
    EXPECT_EQ(h.scalars[0].first, 0);
    EXPECT_EQ(h.scalars[0].second, 1);
}

TEST(EntropyCoding, PermutationIsTransparent) {
    const auto& m = pink_model();
    Rng rng(11);
    const auto img = pink_images(1, 64, 12)[0];
    const auto reference = decode_image(encode_image(m, img), m);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::size_t> perm(m.channels);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        EncodeOptions eo;
        eo.permutation = perm;
        eo.manifest_hash = 42;
        const auto stream = encode_image(m, img, eo);
        DecodeOptions d;
        d.permutation = perm;
        d.manifest_hash = 42;
        EXPECT_EQ(decode_image(stream, m, d), reference);
        EXPECT_THROW(decode_image(stream, m), InputError);
        d.manifest_hash = 43;
        EXPECT_THROW(decode_image(stream, m, d), IntegrityError);
    }
}

TEST(EntropyCoding, IntegrityFailures) {
    const auto& m = pink_model();
    const auto img = pink_images(1, 64, 13)[0];
    auto stream = encode_image(m, img);

    auto other = m;
    other.latent_scale[3] *= 2.0F;
    EXPECT_THROW(decode_image(stream, other), IntegrityError);

    auto flipped = stream;
    flipped[flipped.size() / 2] ^= 0x10;
    EXPECT_THROW(decode_image(flipped, m), IntegrityError);

    auto bad_magic = stream;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_image(bad_magic, m), InputError);

    EXPECT_THROW(decode_image(std::vector<std::uint8_t>{1, 2, 3}, m), InputError);
}

TEST(EntropyCoding, OddSizedImagesArePaddedAndCropped) {
    const auto& m = pink_model();
    const auto big = pink_images(1, 64, 14)[0];
    const auto img = crop(big, 61, 45);
    const auto rec = decode_image(encode_image(m, img), m);
    EXPECT_EQ(rec.width, 61U);
    EXPECT_EQ(rec.height, 45U);
    EXPECT_GT(psnr(img, rec), 20.0);
}
