#include "iscs/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace iscs {
namespace {

using nlohmann::json;

std::optional<DType> parse_dtype(const std::string& s) {
    if (s == "F16") return DType::F16;
    if (s == "F32") return DType::F32;
    if (s == "F64") return DType::F64;
    return std::nullopt;
}

std::uint64_t read_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

template <typename T>
T load_le(const std::uint8_t* p) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

template <typename T>
void store_le(std::vector<std::uint8_t>& out, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

[[noreturn]] void fail(TensorErrorKind kind, const std::string& tensor, const std::string& what) {
    throw TensorFileError(kind, tensor, what);
}

} // namespace

std::size_t dtype_size(DType t) noexcept {
    switch (t) {
    case DType::F16: return 2;
    case DType::F32: return 4;
    case DType::F64: return 8;
    }
    return 0;
}

const char* dtype_name(DType t) noexcept {
    switch (t) {
    case DType::F16: return "F16";
    case DType::F32: return "F32";
    case DType::F64: return "F64";
    }
    return "?";
}

TensorFileError::TensorFileError(TensorErrorKind kind, std::string tensor, const std::string& message)
    : InputError(tensor.empty() ? message : "tensor '" + tensor + "': " + message),
      kind_(kind),
      tensor_(std::move(tensor)) {}

std::uint64_t TensorInfo::element_count() const noexcept {
    std::uint64_t n = 1;
    for (auto d : shape) n *= static_cast<std::uint64_t>(d);
    return n;
}

const TensorInfo& TensorFile::info(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) fail(TensorErrorKind::MissingTensor, name, "not found in container");
    return it->second;
}

std::span<const std::uint8_t> TensorFile::bytes(const std::string& name) const {
    const auto& ti = info(name);
    return std::span<const std::uint8_t>(payload).subspan(ti.begin, ti.end - ti.begin);
}

std::vector<double> TensorFile::to_doubles(const std::string& name) const {
    const auto& ti = info(name);
    auto raw = bytes(name);
    const std::size_t n = ti.element_count();
    std::vector<double> out(n);
    const std::size_t es = dtype_size(ti.dtype);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = raw.data() + i * es;
        switch (ti.dtype) {
        case DType::F16: out[i] = half_to_double(load_le<std::uint16_t>(p)); break;
        case DType::F32: out[i] = static_cast<double>(load_le<float>(p)); break;
        case DType::F64: out[i] = load_le<double>(p); break;
        }
    }
    return out;
}

void TensorFile::add(const std::string& name, DType dtype, std::vector<std::int64_t> shape,
                     std::span<const double> values) {
    if (entries.contains(name)) throw InputError("duplicate tensor name '" + name + "'");
    TensorInfo ti{dtype, std::move(shape), payload.size(), 0};
    if (std::any_of(ti.shape.begin(), ti.shape.end(), [](auto d) { return d < 1; }))
        fail(TensorErrorKind::BadShape, name, "every dimension must be >= 1");
    if (ti.element_count() != values.size())
        fail(TensorErrorKind::SizeMismatch, name, "value count does not match shape");
    for (double v : values) {
        switch (dtype) {
        case DType::F16: store_le(payload, double_to_half(v)); break;
        case DType::F32: store_le(payload, static_cast<float>(v)); break;
        case DType::F64: store_le(payload, v); break;
        }
    }
    ti.end = payload.size();
    entries.emplace(name, std::move(ti));
}

TensorFile parse_tensor_file(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) fail(TensorErrorKind::Truncated, "", "file shorter than the 8-byte header length");
    const std::uint64_t header_len = read_u64_le(bytes.data());
    if (header_len > bytes.size() - 8)
        fail(TensorErrorKind::Truncated, "", "header length " + std::to_string(header_len) +
                                                 " exceeds file size");

    const char* hdr = reinterpret_cast<const char*>(bytes.data() + 8);
    json header;
    try {
        header = json::parse(hdr, hdr + header_len);
    } catch (const json::parse_error& e) {
        fail(TensorErrorKind::MalformedJson, "", std::string("header is not valid JSON: ") + e.what());
    }
    if (!header.is_object()) fail(TensorErrorKind::MalformedJson, "", "header must be a JSON object");

    TensorFile tf;
    tf.payload.assign(bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len), bytes.end());

    for (const auto& [name, entry] : header.items()) {
        if (name == "__metadata__") {
            if (!entry.is_object()) fail(TensorErrorKind::MalformedJson, name, "metadata must be an object");
            for (const auto& [k, v] : entry.items())
                if (!v.is_string()) fail(TensorErrorKind::MalformedJson, name, "metadata value for '" + k + "' is not a string");
            continue;
        }
        if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
            !entry.contains("data_offsets"))
            fail(TensorErrorKind::MalformedJson, name, "entry needs dtype, shape and data_offsets");
        const auto& jd = entry["dtype"];
        const auto& js = entry["shape"];
        const auto& jo = entry["data_offsets"];
        if (!jd.is_string()) fail(TensorErrorKind::MalformedJson, name, "dtype must be a string");
        auto dt = parse_dtype(jd.get<std::string>());
        if (!dt) fail(TensorErrorKind::UnknownDtype, name, "unknown dtype '" + jd.get<std::string>() + "'");
        if (!js.is_array()) fail(TensorErrorKind::MalformedJson, name, "shape must be an array");
        if (!jo.is_array() || jo.size() != 2 || !jo[0].is_number_unsigned() || !jo[1].is_number_unsigned())
            fail(TensorErrorKind::MalformedJson, name, "data_offsets must be two non-negative integers");

        TensorInfo ti;
        ti.dtype = *dt;
        for (const auto& d : js) {
            if (!d.is_number_integer()) fail(TensorErrorKind::MalformedJson, name, "shape entries must be integers");
            auto v = d.get<std::int64_t>();
            if (v < 1) fail(TensorErrorKind::BadShape, name, "every dimension must be >= 1");
            ti.shape.push_back(v);
        }
        ti.begin = jo[0].get<std::uint64_t>();
        ti.end = jo[1].get<std::uint64_t>();
        if (ti.end < ti.begin) fail(TensorErrorKind::OffsetOutOfBounds, name, "data_offsets end precedes begin");
        if (ti.end > tf.payload.size())
            fail(TensorErrorKind::OffsetOutOfBounds, name, "data_offsets extend past end of payload");
        if (ti.end - ti.begin != ti.element_count() * dtype_size(ti.dtype))
            fail(TensorErrorKind::SizeMismatch, name,
                 "data_offsets span " + std::to_string(ti.end - ti.begin) + " bytes but shape needs " +
                     std::to_string(ti.element_count() * dtype_size(ti.dtype)));
        tf.entries.emplace(name, std::move(ti));
    }

    std::vector<std::pair<const std::string*, const TensorInfo*>> by_offset;
    for (const auto& [name, ti] : tf.entries) by_offset.emplace_back(&name, &ti);
    std::sort(by_offset.begin(), by_offset.end(),
              [](const auto& a, const auto& b) { return a.second->begin < b.second->begin; });
    for (std::size_t i = 1; i < by_offset.size(); ++i)
        if (by_offset[i].second->begin < by_offset[i - 1].second->end)
            fail(TensorErrorKind::OffsetOverlap, *by_offset[i].first,
                 "bytes overlap tensor '" + *by_offset[i - 1].first + "'");
    return tf;
}

std::vector<std::uint8_t> serialize_tensor_file(const TensorFile& tf) {
    json header = json::object();
    for (const auto& [name, ti] : tf.entries) {
        header[name] = {{"dtype", dtype_name(ti.dtype)}, {"shape", ti.shape},
                        {"data_offsets", {ti.begin, ti.end}}};
    }
    const std::string text = header.dump();
    std::vector<std::uint8_t> out;
    out.reserve(8 + text.size() + tf.payload.size());
    store_le<std::uint64_t>(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    out.insert(out.end(), tf.payload.begin(), tf.payload.end());
    return out;
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(TensorErrorKind::Io, "", "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_tensor_file(bytes);
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& tf) {
    auto bytes = serialize_tensor_file(tf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(TensorErrorKind::Io, "", "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(TensorErrorKind::Io, "", "write failed for '" + path.string() + "'");
}

double half_to_double(std::uint16_t bits) noexcept {
    const bool negative = (bits & 0x8000U) != 0;
    const int exponent = (bits >> 10) & 0x1F;
    const int mantissa = bits & 0x3FF;
    double v;
    if (exponent == 0) {
        v = std::ldexp(static_cast<double>(mantissa), -24);
    } else if (exponent == 31) {
        v = mantissa == 0 ? INFINITY : NAN;
    } else {
        v = std::ldexp(static_cast<double>(mantissa | 0x400), exponent - 25);
    }
    return negative ? -v : v;
}

std::uint16_t double_to_half(double value) noexcept {
    const std::uint16_t sign = std::signbit(value) ? 0x8000U : 0U;
    double a = std::fabs(value);
    if (std::isnan(a)) return sign | 0x7E00U;
    if (a >= 65520.0) return sign | 0x7C00U; // rounds to infinity
    if (a < std::ldexp(1.0, -14)) {
        // Subnormal: quantum 2^-24.
        double q = std::nearbyint(std::ldexp(a, 24));
        return sign | static_cast<std::uint16_t>(q);
    }
    int e;
    double frac = std::frexp(a, &e); // a = frac * 2^e, frac in [0.5, 1)
    double m = std::nearbyint(std::ldexp(frac, 11)); // 11 significant bits
    if (m >= 2048.0) {
        m /= 2.0;
        ++e;
    }
    const int biased = e - 1 + 15;
    if (biased >= 31) return sign | 0x7C00U;
    return sign | static_cast<std::uint16_t>((biased << 10) | (static_cast<int>(m) & 0x3FF));
}

void ConvKernelSet::validate() const {
    if (out_channels < 1 || in_channels < 1 || kernel_size < 1)
        throw InputError("kernel set dimensions must all be >= 1");
    if (weights.size() != out_channels * kernel_length())
        throw InputError("kernel set weight count does not match its shape");
    for (double w : weights)
        if (!std::isfinite(w)) throw InputError("kernel set contains a non-finite weight");
    if (bias) {
        if (bias->size() != out_channels) throw InputError("bias length does not match C_out");
        for (double b : *bias)
            if (!std::isfinite(b)) throw InputError("kernel set contains a non-finite bias");
    }
}

ConvKernelSet extract_kernel_set(const TensorFile& tf, const std::string& weight_name,
                                 const std::optional<std::string>& bias_name) {
    const auto& wi = tf.info(weight_name);
    if (wi.shape.size() != 4)
        fail(TensorErrorKind::RankMismatch, weight_name,
             "expected rank 4 (C_out, C_in, K, K), got rank " + std::to_string(wi.shape.size()));
    if (wi.shape[2] != wi.shape[3])
        fail(TensorErrorKind::RankMismatch, weight_name, "kernel must be square (K x K)");

    ConvKernelSet k;
    k.out_channels = static_cast<std::size_t>(wi.shape[0]);
    k.in_channels = static_cast<std::size_t>(wi.shape[1]);
    k.kernel_size = static_cast<std::size_t>(wi.shape[2]);
    k.weights = tf.to_doubles(weight_name);
    for (double w : k.weights)
        if (!std::isfinite(w)) fail(TensorErrorKind::NonFinite, weight_name, "non-finite weight value");

    if (bias_name) {
        const auto& bi = tf.info(*bias_name);
        if (bi.shape.size() != 1)
            fail(TensorErrorKind::RankMismatch, *bias_name,
                 "expected rank 1, got rank " + std::to_string(bi.shape.size()));
        if (static_cast<std::size_t>(bi.shape[0]) != k.out_channels)
            fail(TensorErrorKind::BiasLengthMismatch, *bias_name,
                 "length " + std::to_string(bi.shape[0]) + " does not match C_out " +
                     std::to_string(k.out_channels));
        k.bias = tf.to_doubles(*bias_name);
        for (double b : *k.bias)
            if (!std::isfinite(b)) fail(TensorErrorKind::NonFinite, *bias_name, "non-finite bias value");
    }
    return k;
}

} // namespace iscs
