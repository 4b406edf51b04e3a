#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "iscs/importance.hpp"
#include "oracles.hpp"
#include "reference_channels.hpp"

using namespace iscs;

namespace {

ConvKernelSet single(std::vector<double> w, std::size_t in, std::size_t k) {
    ConvKernelSet ks;
    ks.out_channels = 1;
    ks.in_channels = in;
    ks.kernel_size = k;
    ks.weights = std::move(w);
    return ks;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

} // namespace

TEST(Variance, ConstantKernelIsZero) {
    EXPECT_EQ(variance_scores(single(std::vector<double>(27, 0.7), 3, 3))[0], 0.0);
}

TEST(Variance, TwoPointKernel) {
    Rng rng(1);
    for (double a : {0.5, 1.0, 3.25, 1e-3}) {
        const auto v = variance_scores(single(oracle::two_point_kernel(18, a, rng), 2, 3))[0];
        EXPECT_NEAR(v, a * a, 1e-15 * a * a);
    }
}

TEST(Variance, MatchesTwoPassOracle) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ks = oracle::random_kernels(1 + rng.below(16), 1 + rng.below(8), 1 + rng.below(7), false, rng);
        const auto v = variance_scores(ks);
        for (std::size_t c = 0; c < ks.out_channels; ++c)
            EXPECT_LE(rel(v[c], oracle::variance(ks.kernel(c))), 1e-12);
    }
}

TEST(BiasScores, Magnitudes) {
    auto ks = single({1.0}, 1, 1);
    ks.bias = std::vector<double>{-2.0534};
    EXPECT_EQ(bias_scores(ks)[0], 2.0534);

    ConvKernelSet three;
    three.out_channels = 3;
    three.in_channels = 1;
    three.kernel_size = 1;
    three.weights = {1, 2, 3};
    EXPECT_EQ(bias_scores(three), (std::vector<double>{0, 0, 0}));
    three.bias = std::vector<double>{0, -1, 3};
    EXPECT_EQ(bias_scores(three), (std::vector<double>{0, 1, 3}));
}

TEST(Similarity, IdenticalAndNegated) {
    Rng rng(4);
    ConvKernelSet ks;
    ks.out_channels = 3;
    ks.in_channels = 2;
    ks.kernel_size = 2;
    ks.weights.resize(24);
    for (std::size_t i = 0; i < 8; ++i) {
        ks.weights[i] = rng.normal();
        ks.weights[8 + i] = ks.weights[i];
        ks.weights[16 + i] = -ks.weights[i];
    }
    const auto s = cosine_similarity_matrix(ks);
    EXPECT_NEAR(s(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(s(0, 2), -1.0, 1e-15);
}

TEST(Similarity, MatchesDotProductOracle) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ks = oracle::random_kernels(8, 1 + rng.below(4), 3, false, rng);
        const auto s = cosine_similarity_matrix(ks);
        for (std::size_t a = 0; a < 8; ++a) {
            EXPECT_EQ(s(a, a), 1.0);
            for (std::size_t b = 0; b < 8; ++b) {
                EXPECT_EQ(s(a, b), s(b, a));
                if (a != b) EXPECT_NEAR(s(a, b), oracle::cosine(ks.kernel(a), ks.kernel(b)), 1e-12);
                EXPECT_LE(std::abs(s(a, b)), 1.0 + 1e-12);
            }
        }
    }
}

TEST(Similarity, ZeroNormKernelIsUnrelated) {
    ConvKernelSet ks;
    ks.out_channels = 2;
    ks.in_channels = 1;
    ks.kernel_size = 2;
    ks.weights = {0, 0, 0, 0, 1, 2, 3, 4};
    const auto s = cosine_similarity_matrix(ks);
    EXPECT_EQ(s(0, 1), 0.0);
    EXPECT_EQ(s(0, 0), 1.0);
}

TEST(Rank, ReferenceVarianceColumn) {
    std::vector<double> values;
    std::vector<std::size_t> ids;
    for (const auto& r : iscs::testing::kReferenceChannels) {
        ids.push_back(r.channel);
        values.push_back(r.variance);
    }
    std::vector<std::size_t> order;
    for (std::size_t i : rank_descending(values)) order.push_back(ids[i]);
    EXPECT_EQ(order, (std::vector<std::size_t>{217, 24, 93, 40, 233, 252, 157, 140, 292}));
}

TEST(Rank, TiesByIndexAndOracle) {
    EXPECT_EQ(rank_descending(std::vector<double>{1, 1, 1}), (std::vector<std::size_t>{0, 1, 2}));
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(1 + rng.below(40));
        // Coarse values so ties actually happen.
        for (double& x : v) x = static_cast<double>(rng.below(6));
        EXPECT_EQ(rank_descending(v), oracle::selection_sort_descending(v));
    }
    EXPECT_THROW(rank_descending(std::vector<double>{1, std::numeric_limits<double>::quiet_NaN()}), InputError);
}

TEST(ScoreProperties, ScaleCovariance) {
    Rng rng(7);
    auto ks = oracle::random_kernels(6, 3, 3, true, rng);
    const auto before = compute_scores(ks);
    for (double s : {2.5, -0.5}) {
        auto scaled = ks;
        for (double& w : scaled.kernel(2)) w *= s;
        const auto after = compute_scores(scaled);
        EXPECT_LE(rel(after.variance[2], s * s * before.variance[2]), 1e-12);
        for (std::size_t c = 0; c < 6; ++c) {
            if (c == 2) continue;
            const double expect = s > 0 ? before.similarity(2, c) : -before.similarity(2, c);
            EXPECT_NEAR(after.similarity(2, c), expect, 1e-10);
            EXPECT_NEAR(after.similarity(c, 2), expect, 1e-10);
        }
    }
}

TEST(ScoreProperties, PermutationEquivariance) {
    Rng rng(8);
    const auto ks = oracle::random_kernels(9, 2, 3, true, rng);
    std::vector<std::size_t> perm(9);
    for (std::size_t i = 0; i < 9; ++i) perm[i] = i;
    for (std::size_t i = 9; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    auto permuted = ks;
    for (std::size_t j = 0; j < 9; ++j) {
        std::copy(ks.kernel(perm[j]).begin(), ks.kernel(perm[j]).end(), permuted.kernel(j).begin());
        (*permuted.bias)[j] = (*ks.bias)[perm[j]];
    }
    const auto a = compute_scores(ks);
    const auto b = compute_scores(permuted);
    for (std::size_t j = 0; j < 9; ++j) {
        EXPECT_EQ(b.variance[j], a.variance[perm[j]]);
        EXPECT_EQ(b.bias_mag[j], a.bias_mag[perm[j]]);
        for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(b.similarity(j, k), a.similarity(perm[j], perm[k]), 1e-15);
    }
}
