#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "iscs/image.hpp"
#include "iscs/rng.hpp"
#include "iscs/tensor_io.hpp"

using namespace iscs;

namespace {

// Container bytes assembled by hand: length prefix, header text, payload.
std::vector<std::uint8_t> container(const std::string& header, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> out(8);
    std::uint64_t n = header.size();
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(n >> (8 * i));
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::vector<std::uint8_t> f32_bytes(std::initializer_list<float> values) {
    std::vector<std::uint8_t> out;
    for (float v : values) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    return out;
}

TensorErrorKind parse_error_kind(const std::vector<std::uint8_t>& bytes) {
    try {
        parse_tensor_file(bytes);
    } catch (const TensorFileError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected a TensorFileError";
    return TensorErrorKind::Io;
}

std::string parse_error_tensor(const std::vector<std::uint8_t>& bytes) {
    try {
        parse_tensor_file(bytes);
    } catch (const TensorFileError& e) {
        return e.tensor();
    }
    return "<no error>";
}

} // namespace

TEST(TensorContainer, EmptyHeaderGivesNoTensors) {
    const auto tf = parse_tensor_file(container("{}", {}));
    EXPECT_TRUE(tf.entries.empty());
    EXPECT_TRUE(tf.payload.empty());
}

TEST(TensorContainer, HandBuiltF32TensorReadsBitExactly) {
    const auto bytes = container(R"({"w":{"dtype":"F32","shape":[2,1,1,1],"data_offsets":[0,8]}})",
                                 f32_bytes({1.5F, -0.1F}));
    const auto tf = parse_tensor_file(bytes);
    const auto v = tf.to_doubles("w");
    ASSERT_EQ(v.size(), 2U);
    EXPECT_EQ(v[0], 1.5);
    EXPECT_EQ(v[1], static_cast<double>(-0.1F));
}

TEST(TensorContainer, MetadataIsIgnored) {
    const auto bytes = container(
        R"({"__metadata__":{"format":"pt"},"w":{"dtype":"F32","shape":[1],"data_offsets":[0,4]}})", f32_bytes({2.0F}));
    const auto tf = parse_tensor_file(bytes);
    EXPECT_EQ(tf.entries.size(), 1U);
    EXPECT_EQ(tf.to_doubles("w")[0], 2.0);
}

TEST(TensorContainer, SizeMismatchIsReported) {
    auto payload = f32_bytes({1.0F, 2.0F});
    payload.push_back(0);
    const auto bytes = container(R"({"w":{"dtype":"F32","shape":[2,1,1,1],"data_offsets":[0,9]}})", payload);
    EXPECT_EQ(parse_error_kind(bytes), TensorErrorKind::SizeMismatch);
    EXPECT_EQ(parse_error_tensor(bytes), "w");
}

TEST(TensorContainer, DistinctErrorKinds) {
    EXPECT_EQ(parse_error_kind({1, 2, 3}), TensorErrorKind::Truncated);
    // Header length claims more bytes than the file has.
    EXPECT_EQ(parse_error_kind({100, 0, 0, 0, 0, 0, 0, 0, '{', '}'}), TensorErrorKind::Truncated);
    EXPECT_EQ(parse_error_kind(container("{not json", {})), TensorErrorKind::MalformedJson);
    EXPECT_EQ(parse_error_kind(container(R"({"w":{"dtype":"I8","shape":[1],"data_offsets":[0,1]}})", {0})),
              TensorErrorKind::UnknownDtype);
    EXPECT_EQ(parse_error_kind(container(R"({"w":{"dtype":"F32","shape":[1],"data_offsets":[0,4]}})", {0, 0})),
              TensorErrorKind::OffsetOutOfBounds);
    EXPECT_EQ(parse_error_kind(container(R"({"w":{"dtype":"F32","shape":[0],"data_offsets":[0,0]}})", {})),
              TensorErrorKind::BadShape);
    const auto overlap = container(R"({"a":{"dtype":"F32","shape":[2],"data_offsets":[0,8]},)"
                                   R"("b":{"dtype":"F32","shape":[1],"data_offsets":[4,8]}})",
                                   f32_bytes({1, 2}));
    EXPECT_EQ(parse_error_kind(overlap), TensorErrorKind::OffsetOverlap);
    EXPECT_EQ(parse_error_tensor(overlap), "b");
}

TEST(TensorContainer, RoundTripPreservesContent) {
    Rng rng(11);
    TensorFile tf;
    std::vector<double> a(24), b(5), c(3);
    for (double& x : a) x = rng.normal();
    for (double& x : b) x = rng.normal();
    for (double& x : c) x = rng.normal();
    tf.add("layer.weight", DType::F32, {2, 3, 2, 2}, a);
    tf.add("layer.bias", DType::F64, {5}, b);
    tf.add("half", DType::F16, {3}, c);
    const auto bytes = serialize_tensor_file(tf);
    const auto back = parse_tensor_file(bytes);
    ASSERT_EQ(back.entries.size(), 3U);
    for (const auto& [name, info] : tf.entries) {
        const auto& other = back.info(name);
        EXPECT_EQ(info.dtype, other.dtype);
        EXPECT_EQ(info.shape, other.shape);
        const auto x = tf.bytes(name);
        const auto y = back.bytes(name);
        EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin(), y.end())) << name;
    }
    EXPECT_EQ(serialize_tensor_file(back), bytes);
}

TEST(TensorContainer, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "iscs_tensor_io_test.bin";
    TensorFile tf;
    const std::vector<double> v{1.0, 2.0, 3.0};
    tf.add("x", DType::F64, {3}, v);
    write_tensor_file(path, tf);
    EXPECT_EQ(read_tensor_file(path).to_doubles("x"), v);
    std::filesystem::remove(path);
    EXPECT_THROW(read_tensor_file(path), TensorFileError);
}

TEST(HalfPrecision, PromotionThenDemotionIsBitIdenticalForEveryFiniteValue) {
    for (std::uint32_t bits = 0; bits < 0x10000U; ++bits) {
        const auto h = static_cast<std::uint16_t>(bits);
        const double d = half_to_double(h);
        if (std::isnan(d)) continue;
        ASSERT_EQ(double_to_half(d), h) << std::hex << bits;
    }
}

TEST(HalfPrecision, KnownValues) {
    EXPECT_EQ(half_to_double(0x3C00), 1.0);
    EXPECT_EQ(half_to_double(0xC000), -2.0);
    EXPECT_EQ(half_to_double(0x0001), std::ldexp(1.0, -24));
    EXPECT_EQ(half_to_double(0x7BFF), 65504.0);
    EXPECT_EQ(double_to_half(1.0 + std::ldexp(1.0, -11)), 0x3C00); // tie rounds to even
    EXPECT_EQ(double_to_half(1.0 + 3 * std::ldexp(1.0, -11)), 0x3C02);
}

TEST(KernelExtraction, ShapeAndBias) {
    Rng rng(3);
    std::vector<double> w(320 * 192 * 5 * 5), b(320);
    for (double& x : w) x = rng.uniform(-1, 1);
    for (double& x : b) x = rng.uniform(-1, 1);
    TensorFile tf;
    tf.add("w", DType::F32, {320, 192, 5, 5}, w);
    tf.add("b", DType::F32, {320}, b);
    const auto k = extract_kernel_set(tf, "w", std::string("b"));
    EXPECT_EQ(k.out_channels, 320U);
    EXPECT_EQ(k.in_channels, 192U);
    EXPECT_EQ(k.kernel_size, 5U);
    ASSERT_TRUE(k.bias.has_value());
    EXPECT_EQ((*k.bias)[7], static_cast<double>(static_cast<float>(b[7])));

    const auto no_bias = extract_kernel_set(tf, "w");
    EXPECT_FALSE(no_bias.bias.has_value());
}

TEST(KernelExtraction, Errors) {
    TensorFile tf;
    tf.add("w", DType::F32, {320, 1, 1, 1}, std::vector<double>(320, 1.0));
    tf.add("b319", DType::F32, {319}, std::vector<double>(319, 1.0));
    tf.add("flat", DType::F32, {4}, std::vector<double>(4, 1.0));
    tf.add("nan", DType::F32, {1, 1, 1, 1}, std::vector<double>{NAN});
    auto kind = [&](const std::string& w, std::optional<std::string> b) {
        try {
            extract_kernel_set(tf, w, b);
        } catch (const TensorFileError& e) {
            return e.kind();
        }
        return TensorErrorKind::Io;
    };
    EXPECT_EQ(kind("w", std::string("b319")), TensorErrorKind::BiasLengthMismatch);
    EXPECT_EQ(kind("missing", std::nullopt), TensorErrorKind::MissingTensor);
    EXPECT_EQ(kind("flat", std::nullopt), TensorErrorKind::RankMismatch);
    EXPECT_EQ(kind("nan", std::nullopt), TensorErrorKind::NonFinite);
}

TEST(Pnm, MinimalGrayFile) {
    const std::string text = "P5 2 2 255\n";
    std::vector<std::uint8_t> bytes(text.begin(), text.end());
    for (std::uint8_t v : {1, 2, 3, 4}) bytes.push_back(v);
    const auto img = parse_pnm(bytes);
    EXPECT_EQ(img.width, 2U);
    EXPECT_EQ(img.height, 2U);
    EXPECT_EQ(img.channels, 1U);
    EXPECT_EQ(img.at(1, 1), 4);
}

TEST(Pnm, CommentsBeforeMaxval) {
    const std::string text = "P5\n# made by hand\n1 1\n# another\n255\n";
    std::vector<std::uint8_t> bytes(text.begin(), text.end());
    bytes.push_back(9);
    EXPECT_EQ(parse_pnm(bytes).samples, std::vector<std::uint8_t>{9});
}

TEST(Pnm, RandomRgbRoundTrip) {
    Rng rng(5);
    for (std::size_t w : {1U, 3U, 16U})
        for (std::size_t h : {1U, 7U, 16U})
            for (std::size_t c : {1U, 3U}) {
                Image img(w, h, c);
                for (auto& s : img.samples) s = static_cast<std::uint8_t>(rng.below(256));
                EXPECT_EQ(parse_pnm(serialize_pnm(img)), img);
            }
}

TEST(Pnm, Rejections) {
    auto bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
    EXPECT_THROW(parse_pnm(bytes("P4 1 1\n\x01")), InputError);
    EXPECT_THROW(parse_pnm(bytes("P5 1 1 65535\n\x01\x01")), InputError);
    EXPECT_THROW(parse_pnm(bytes("P5 2 2 255\n\x01")), InputError);
}

TEST(Pnm, PadAndCrop) {
    Image img(3, 2, 1);
    for (std::size_t i = 0; i < 6; ++i) img.samples[i] = static_cast<std::uint8_t>(i);
    const auto padded = pad_to_multiple(img, 4);
    EXPECT_EQ(padded.width, 4U);
    EXPECT_EQ(padded.height, 4U);
    EXPECT_EQ(padded.at(3, 0), img.at(2, 0));
    EXPECT_EQ(padded.at(3, 3), img.at(2, 1));
    EXPECT_EQ(crop(padded, 3, 2), img);
}
