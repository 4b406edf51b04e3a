#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string_view>

#include "iscs/checksum.hpp"
#include "iscs/entropy_model.hpp"
#include "iscs/jacobi.hpp"
#include "iscs/range_coder.hpp"
#include "iscs/rng.hpp"
#include "oracles.hpp"

using namespace iscs;

namespace {

struct Table {
    std::vector<std::uint32_t> freq, cum;
    std::uint32_t total = 0;
};

Table random_table(std::size_t n, std::uint32_t total, Rng& rng) {
    Table t;
    t.freq.assign(n, 1);
    for (std::uint32_t left = total - static_cast<std::uint32_t>(n); left > 0; --left) ++t.freq[rng.below(n)];
    t.cum.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) t.cum[i + 1] = t.cum[i] + t.freq[i];
    t.total = total;
    return t;
}

std::size_t lookup(const Table& t, std::uint32_t target) {
    return static_cast<std::size_t>(std::upper_bound(t.cum.begin(), t.cum.end(), target) - t.cum.begin()) - 1;
}

} // namespace

TEST(RangeCoder, RoundTripRandomTables) {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(300);
        const auto t = random_table(n, static_cast<std::uint32_t>(std::max<std::size_t>(n, 1U << (8 + rng.below(9)))), rng);
        std::vector<std::size_t> symbols(rng.below(2000));
        for (auto& s : symbols) s = rng.below(n);
        RangeEncoder enc;
        for (auto s : symbols) enc.encode(t.cum[s], t.freq[s], t.total);
        const auto bytes = enc.finish();
        RangeDecoder dec(bytes);
        for (auto s : symbols) {
            const auto i = lookup(t, dec.peek(t.total));
            ASSERT_EQ(i, s);
            dec.consume(t.cum[i], t.freq[i]);
        }
        EXPECT_FALSE(dec.overrun());
    }
}

TEST(RangeCoder, SkewedTablesForceCarries) {
    // Near-certain symbols keep low creeping toward the carry boundary.
    Rng rng(2);
    Table t;
    t.freq = {65534, 1, 1};
    t.cum = {0, 65534, 65535, 65536};
    t.total = 65536;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> symbols(5000);
        for (auto& s : symbols) s = rng.below(100) == 0 ? 1 + rng.below(2) : 0;
        RangeEncoder enc;
        for (auto s : symbols) enc.encode(t.cum[s], t.freq[s], t.total);
        const auto bytes = enc.finish();
        RangeDecoder dec(bytes);
        for (auto s : symbols) {
            const auto i = lookup(t, dec.peek(t.total));
            ASSERT_EQ(i, s);
            dec.consume(t.cum[i], t.freq[i]);
        }
    }
}

TEST(RangeCoder, RawBits) {
    Rng rng(3);
    std::vector<std::pair<std::uint32_t, unsigned>> values(1000);
    for (auto& [v, b] : values) {
        b = 1 + static_cast<unsigned>(rng.below(16));
        v = static_cast<std::uint32_t>(rng.below(1ULL << b));
    }
    RangeEncoder enc;
    for (auto [v, b] : values) enc.encode_bits(v, b);
    const auto bytes = enc.finish();
    RangeDecoder dec(bytes);
    for (auto [v, b] : values) EXPECT_EQ(dec.decode_bits(b), v);
}

TEST(RangeCoder, SizeTracksInformationContent) {
    Rng rng(4);
    const auto t = random_table(16, 1U << 16, rng);
    double bits = 0.0;
    RangeEncoder enc;
    for (int i = 0; i < 20000; ++i) {
        const auto s = lookup(t, static_cast<std::uint32_t>(rng.below(t.total)));
        bits -= std::log2(static_cast<double>(t.freq[s]) / t.total);
        enc.encode(t.cum[s], t.freq[s], t.total);
    }
    const auto bytes = enc.finish();
    EXPECT_LE(static_cast<double>(bytes.size()), bits / 8.0 * 1.001 + 8.0);
}

TEST(RangeCoder, TruncatedInputIsDetected) {
    RangeEncoder enc;
    for (int i = 0; i < 1000; ++i) enc.encode_bits(static_cast<std::uint32_t>(i & 0xFF), 8);
    auto bytes = enc.finish();
    bytes.resize(bytes.size() / 2);
    RangeDecoder dec(bytes);
    for (int i = 0; i < 1000; ++i) dec.decode_bits(8);
    EXPECT_TRUE(dec.overrun());
}

TEST(GaussianModel, TableIsValid) {
    for (double s : {1e-12, 1e-3, 0.3, 1.0, 7.5, 100.0, 2000.0}) {
        GaussianSymbolModel m(s);
        const auto& f = m.frequencies();
        EXPECT_EQ(std::accumulate(f.begin(), f.end(), 0ULL), GaussianSymbolModel::kTotal);
        EXPECT_TRUE(std::all_of(f.begin(), f.end(), [](auto x) { return x >= 1; }));
        EXPECT_EQ(f.size(), 2U * static_cast<std::size_t>(m.radius()) + 3);
    }
}

TEST(GaussianModel, ProbabilitiesFollowDiscretizedGaussian) {
    GaussianSymbolModel m(3.0);
    for (std::int32_t q = -6; q <= 6; ++q)
        EXPECT_NEAR(m.probability(q), discretized_gaussian_mass(q, 3.0), 2e-4) << q;
    EXPECT_EQ(m.probability(2), m.probability(-2));
    // Closed form for the center bucket.
    EXPECT_NEAR(discretized_gaussian_mass(0, 1.0), std::erf(0.5 / std::sqrt(2.0)), 1e-15);
}

TEST(GaussianModel, RoundTripIncludingEscapes) {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const double scale = std::exp(rng.uniform(std::log(1e-3), std::log(500.0)));
        GaussianSymbolModel m(scale);
        std::vector<std::int32_t> symbols(500);
        for (auto& s : symbols) {
            const double u = rng.uniform();
            s = u < 0.05 ? static_cast<std::int32_t>(rng.below(60000)) - 30000
                         : static_cast<std::int32_t>(std::lround(rng.normal() * scale));
        }
        RangeEncoder enc;
        double bits = 0.0;
        for (auto s : symbols) {
            m.encode(enc, s);
            bits += m.code_length_bits(s);
        }
        const auto bytes = enc.finish();
        RangeDecoder dec(bytes);
        for (auto s : symbols) ASSERT_EQ(m.decode(dec), s);
        EXPECT_LE(static_cast<double>(bytes.size()), bits / 8.0 * 1.001 + 8.0);
    }
}

TEST(GaussianModel, EscapeRangeIsBounded) {
    GaussianSymbolModel m(1.0);
    RangeEncoder enc;
    EXPECT_THROW(m.encode(enc, 1 << 20), InputError);
}

TEST(Jacobi, KnownSpectrum) {
    Rng rng(6);
    for (std::size_t n : {2U, 5U, 16U, 64U}) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = rng.uniform(-5, 5);
        const auto a = oracle::with_spectrum(values, rng);
        const auto e = jacobi_eigen(a);
        std::sort(values.begin(), values.end(), std::greater<>());
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(e.values[i], values[i], 1e-9 * (1 + std::abs(values[i])));
        // A v = lambda v and orthonormal columns.
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t r = 0; r < n; ++r) {
                double av = 0.0;
                for (std::size_t k = 0; k < n; ++k) av += a(r, k) * e.vectors(k, j);
                EXPECT_NEAR(av, e.values[j] * e.vectors(r, j), 1e-8);
            }
            for (std::size_t k = 0; k < n; ++k) {
                double d = 0.0;
                for (std::size_t r = 0; r < n; ++r) d += e.vectors(r, j) * e.vectors(r, k);
                EXPECT_NEAR(d, j == k ? 1.0 : 0.0, 1e-8);
            }
        }
    }
}

TEST(Jacobi, RandomSymmetricMatchesPowerIteration) {
    Rng rng(7);
    const std::size_t n = 64;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.uniform(-1, 1);
    // Shift so the largest eigenvalues are positive and dominant for power iteration.
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 20.0;
    const auto e = jacobi_eigen(a);
    const auto ref = oracle::power_iteration_eigenvalues(a, 3, 20000);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(e.values[i], ref[i], 1e-6 * std::abs(ref[i]));
    double trace = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += a(i, i), sum += e.values[i];
    EXPECT_NEAR(sum, trace, 1e-9 * trace);
}

TEST(Jacobi, SignConvention) {
    Rng rng(8);
    const std::vector<double> values{3, 2, 1};
    const auto e = jacobi_eigen(oracle::with_spectrum(values, rng));
    for (std::size_t j = 0; j < 3; ++j) {
        std::size_t big = 0;
        for (std::size_t r = 1; r < 3; ++r)
            if (std::abs(e.vectors(r, j)) > std::abs(e.vectors(big, j))) big = r;
        EXPECT_GT(e.vectors(big, j), 0.0);
    }
}

TEST(Checksum, KnownVectors) {
    const std::string_view check = "123456789";
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(check.data()), check.size());
    EXPECT_EQ(crc32(bytes), 0xCBF43926U);
    EXPECT_EQ(crc32(bytes.subspan(4), crc32(bytes.first(4))), 0xCBF43926U);
    Fnv1a64 h;
    h.update(std::string_view("a"));
    EXPECT_EQ(h.digest(), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(Fnv1a64{}.digest(), 0xcbf29ce484222325ULL);
}
