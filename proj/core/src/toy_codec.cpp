#include "iscs/toy_codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "iscs/checksum.hpp"
#include "iscs/entropy_model.hpp"
#include "iscs/error.hpp"
#include "iscs/grouping.hpp"
#include "iscs/jacobi.hpp"
#include "iscs/range_coder.hpp"
#include "iscs/rng.hpp"

namespace iscs {
namespace {

constexpr double kBiasWeightMagnitude = 1e-6;
constexpr std::uint8_t kMagic[4] = {'I', 'S', 'C', 'S'};

std::int32_t clamp_symbol(double v) {
    const double r = std::round(v);
    return static_cast<std::int32_t>(std::clamp(r, static_cast<double>(ToyCodecModel::kSymbolMin),
                                                static_cast<double>(ToyCodecModel::kSymbolMax)));
}

void require_gray(const Image& img) {
    if (img.channels != 1) throw InputError("toy codec handles grayscale images only");
}

// Patch at grid position (py, px) as [0, 1] doubles, row-major.
void load_patch(const Image& img, std::size_t p, std::size_t py, std::size_t px, std::span<double> out) {
    for (std::size_t y = 0; y < p; ++y)
        for (std::size_t x = 0; x < p; ++x) out[y * p + x] = img.at(px * p + x, py * p + y) / 255.0;
}

void analyse_patch(const ToyCodecModel& m, std::span<const double> x, std::span<double> z) {
    const std::size_t d = m.patch_dim();
    for (std::size_t c = 0; c < m.channels; ++c) {
        if (c == ToyCodecModel::kBiasChannel) {
            z[c] = m.bias[c];
            continue;
        }
        auto w = m.weights.row(c);
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += w[i] * (x[i] - m.mean[i]);
        z[c] = s + m.bias[c];
    }
}

// Little-endian byte writer / reader for the bitstream header.
class ByteWriter {
public:
    template <typename T>
    void put(T v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    std::vector<std::uint8_t> bytes;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}
    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > b_.size()) throw InputError("bitstream truncated inside header");
        T v;
        std::memcpy(&v, b_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::size_t pos() const noexcept { return pos_; }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

std::vector<std::size_t> identity_permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    return p;
}

std::int32_t most_frequent_symbol(const LatentBlock& latents, std::size_t c) {
    std::map<std::int32_t, std::size_t> counts;
    for (std::size_t p = 0; p < latents.patch_count(); ++p) ++counts[latents.at(p, c)];
    std::int32_t best = 0;
    std::size_t best_count = 0;
    for (const auto& [sym, n] : counts)
        if (n > best_count) {
            best = sym;
            best_count = n;
        }
    return best;
}

} // namespace

double ToyCodecModel::channel_step(std::size_t c) const noexcept {
    return c == kBiasChannel ? static_cast<double>(beta) : static_cast<double>(step);
}

std::int32_t ToyCodecModel::symbol_offset(std::size_t c) const noexcept {
    if (c != kBiasChannel) return 0;
    return clamp_symbol(static_cast<double>(latent_mean[c]) / channel_step(c));
}

double ToyCodecModel::symbol_scale(std::size_t c) const noexcept {
    return static_cast<double>(latent_scale[c]) / channel_step(c);
}

void ToyCodecModel::validate() const {
    const std::size_t d = patch_dim();
    if (patch_size < 1 || channels < 2 || channels > d) throw InputError("toy model needs 2 <= C <= p*p");
    if (mean.size() != d || basis.rows() != channels || basis.cols() != d || eigenvalues.size() != channels ||
        weights.rows() != channels || weights.cols() != d || bias.size() != channels ||
        latent_mean.size() != channels || latent_scale.size() != channels)
        throw InputError("toy model arrays have inconsistent sizes");
    if (!(step > 0.0F) || !std::isfinite(step)) throw InputError("quantizer step must be positive");
    if (!(beta > 0.0F) || !std::isfinite(beta)) throw InputError("planted bias beta must be positive");
    for (float s : latent_scale)
        if (!(s > 0.0F) || !std::isfinite(s)) throw InputError("entropy scales must be positive");
    for (std::size_t c = 2; c < channels; ++c)
        if (eigenvalues[c] > eigenvalues[c - 1]) throw InputError("eigenvalues must be non-increasing");
}

std::uint64_t ToyCodecModel::hash() const {
    Fnv1a64 h;
    h.update(serialize_tensor_file(model_to_tensor_file(*this)));
    return h.digest();
}

ToyCodecModel fit(std::span<const Image> images, const FitOptions& o) {
    const std::size_t p = o.patch_size;
    const std::size_t d = p * p;
    if (p < 1 || o.channels < 2 || o.channels > d) throw InputError("fit needs patch size >= 1 and 2 <= C <= p*p");
    if (!(o.step > 0.0) || !std::isfinite(o.step)) throw InputError("quantizer step must be positive");
    if (!(o.beta > 0.0) || !std::isfinite(o.beta)) throw InputError("planted bias beta must be positive");
    if (images.empty()) throw InputError("fit needs at least one image");

    std::vector<double> patches;
    std::vector<double> buf(d);
    for (const auto& img : images) {
        require_gray(img);
        for (std::size_t py = 0; py < img.height / p; ++py)
            for (std::size_t px = 0; px < img.width / p; ++px) {
                load_patch(img, p, py, px, buf);
                patches.insert(patches.end(), buf.begin(), buf.end());
            }
    }
    const std::size_t n = patches.size() / d;
    if (n < o.channels)
        throw InputError("fit found " + std::to_string(n) + " patches but needs at least C=" +
                         std::to_string(o.channels));

    ToyCodecModel m;
    m.patch_size = p;
    m.channels = o.channels;
    m.step = static_cast<float>(o.step);
    m.beta = static_cast<float>(o.beta);
    m.mean.assign(d, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < d; ++i) m.mean[i] += patches[k * d + i];
    for (double& v : m.mean) v /= static_cast<double>(n);

    Matrix cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < d; ++i) centered[i] = patches[k * d + i] - m.mean[i];
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) cov(i, j) += centered[i] * centered[j];
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) /= static_cast<double>(n);
            cov(j, i) = cov(i, j);
        }
    const auto eig = jacobi_eigen(cov);

    m.basis = Matrix(m.channels, d);
    m.weights = Matrix(m.channels, d);
    m.eigenvalues.assign(m.channels, 0.0);
    m.bias.assign(m.channels, 0.0);
    for (std::size_t c = 1; c < m.channels; ++c) {
        const double lambda = std::max(0.0, eig.values[c - 1]);
        m.eigenvalues[c] = lambda;
        const double gain = std::sqrt(lambda);
        for (std::size_t i = 0; i < d; ++i) {
            m.basis(c, i) = eig.vectors(i, c - 1);
            m.weights(c, i) = gain * eig.vectors(i, c - 1);
        }
    }
    Rng rng(o.seed);
    for (std::size_t i = 0; i < d; ++i)
        m.weights(ToyCodecModel::kBiasChannel, i) = (rng.next() & 1U) ? kBiasWeightMagnitude : -kBiasWeightMagnitude;
    m.bias[ToyCodecModel::kBiasChannel] = static_cast<double>(m.beta);

    // Entropy parameters from the training latents.
    std::vector<double> sum(m.channels, 0.0), sq(m.channels, 0.0), z(m.channels);
    std::vector<double> all(n * m.channels);
    for (std::size_t k = 0; k < n; ++k) {
        analyse_patch(m, std::span<const double>(patches).subspan(k * d, d), z);
        for (std::size_t c = 0; c < m.channels; ++c) {
            all[k * m.channels + c] = z[c];
            sum[c] += z[c];
        }
    }
    m.latent_mean.resize(m.channels);
    m.latent_scale.resize(m.channels);
    for (std::size_t c = 0; c < m.channels; ++c) {
        const double mu = sum[c] / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double dz = all[k * m.channels + c] - mu;
            sq[c] += dz * dz;
        }
        const double sigma = std::max(std::sqrt(sq[c] / static_cast<double>(n)), ToyCodecModel::kScaleFloor);
        m.latent_mean[c] = static_cast<float>(mu);
        m.latent_scale[c] = std::max(static_cast<float>(sigma), static_cast<float>(ToyCodecModel::kScaleFloor));
    }
    m.validate();
    return m;
}

std::vector<double> analysis_transform(const ToyCodecModel& model, const Image& image) {
    require_gray(image);
    const std::size_t p = model.patch_size;
    if (image.width % p != 0 || image.height % p != 0)
        throw InputError("image size " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                         " is not a multiple of the patch size " + std::to_string(p));
    const std::size_t py_n = image.height / p;
    const std::size_t px_n = image.width / p;
    std::vector<double> out(py_n * px_n * model.channels);
    std::vector<double> x(model.patch_dim());
    for (std::size_t py = 0; py < py_n; ++py)
        for (std::size_t px = 0; px < px_n; ++px) {
            load_patch(image, p, py, px, x);
            const std::size_t patch = py * px_n + px;
            analyse_patch(model, x, std::span<double>(out).subspan(patch * model.channels, model.channels));
        }
    return out;
}

LatentBlock quantize(const ToyCodecModel& model, std::span<const double> latents, std::size_t patches_y,
                     std::size_t patches_x) {
    LatentBlock q(patches_y, patches_x, model.channels);
    if (latents.size() != q.symbols.size()) throw InputError("latent count does not match grid");
    for (std::size_t p = 0; p < q.patch_count(); ++p)
        for (std::size_t c = 0; c < model.channels; ++c) {
            const double z = latents[p * model.channels + c];
            q.at(p, c) = c == ToyCodecModel::kBiasChannel
                             ? clamp_symbol(z / model.channel_step(c))
                             : clamp_symbol((z - static_cast<double>(model.latent_mean[c])) / model.channel_step(c));
        }
    return q;
}

LatentBlock encode_latents(const ToyCodecModel& model, const Image& image) {
    const auto z = analysis_transform(model, image);
    return quantize(model, z, image.height / model.patch_size, image.width / model.patch_size);
}

std::vector<double> synthesize_real(const ToyCodecModel& model, const LatentBlock& latents) {
    if (latents.channels != model.channels) throw InputError("latent channel count does not match model");
    const std::size_t p = model.patch_size;
    const std::size_t d = model.patch_dim();
    const std::size_t width = latents.patches_x * p;
    std::vector<double> out(latents.patches_y * p * width, 0.0);
    std::vector<double> xhat(d);
    for (std::size_t py = 0; py < latents.patches_y; ++py)
        for (std::size_t px = 0; px < latents.patches_x; ++px) {
            const std::size_t patch = py * latents.patches_x + px;
            // Bias channel: q_0 * beta * (m / beta), i.e. q_0 copies of the mean patch.
            const double q0 = latents.at(patch, ToyCodecModel::kBiasChannel);
            for (std::size_t i = 0; i < d; ++i) xhat[i] = q0 * model.mean[i];
            for (std::size_t c = 1; c < model.channels; ++c) {
                const double lambda = model.eigenvalues[c];
                if (lambda <= ToyCodecModel::kEigenFloor) continue;
                const double zhat = latents.at(patch, c) * model.channel_step(c) +
                                    static_cast<double>(model.latent_mean[c]);
                const double coef = zhat / std::sqrt(lambda);
                auto v = model.basis.row(c);
                for (std::size_t i = 0; i < d; ++i) xhat[i] += coef * v[i];
            }
            for (std::size_t y = 0; y < p; ++y)
                for (std::size_t x = 0; x < p; ++x) out[(py * p + y) * width + px * p + x] = xhat[y * p + x];
        }
    return out;
}

Image synthesize(const ToyCodecModel& model, const LatentBlock& latents) {
    const auto real = synthesize_real(model, latents);
    Image img(latents.patches_x * model.patch_size, latents.patches_y * model.patch_size, 1);
    for (std::size_t i = 0; i < real.size(); ++i)
        img.samples[i] = static_cast<std::uint8_t>(std::round(std::clamp(real[i], 0.0, 1.0) * 255.0));
    return img;
}

ConvKernelSet export_encoder_weights(const ToyCodecModel& model) {
    ConvKernelSet k;
    k.out_channels = model.channels;
    k.in_channels = 1;
    k.kernel_size = model.patch_size;
    k.weights.assign(model.weights.data().begin(), model.weights.data().end());
    k.bias = model.bias;
    return k;
}

TensorFile model_to_tensor_file(const ToyCodecModel& m) {
    const auto c = static_cast<std::int64_t>(m.channels);
    const auto p = static_cast<std::int64_t>(m.patch_size);
    TensorFile tf;
    tf.add("analysis.weight", DType::F64, {c, 1, p, p}, m.weights.data());
    tf.add("analysis.bias", DType::F64, {c}, m.bias);
    tf.add("analysis.mean", DType::F64, {p, p}, m.mean);
    tf.add("analysis.basis", DType::F64, {c, p * p}, m.basis.data());
    tf.add("analysis.eigenvalues", DType::F64, {c}, m.eigenvalues);
    std::vector<double> mu(m.latent_mean.begin(), m.latent_mean.end());
    std::vector<double> sigma(m.latent_scale.begin(), m.latent_scale.end());
    tf.add("entropy.mean", DType::F32, {c}, mu);
    tf.add("entropy.scale", DType::F32, {c}, sigma);
    const double step = m.step;
    const double beta = m.beta;
    tf.add("codec.step", DType::F32, {1}, std::span<const double>(&step, 1));
    tf.add("codec.beta", DType::F32, {1}, std::span<const double>(&beta, 1));
    return tf;
}

ToyCodecModel model_from_tensor_file(const TensorFile& tf) {
    const auto k = extract_kernel_set(tf, "analysis.weight", std::string("analysis.bias"));
    if (k.in_channels != 1) throw InputError("toy model weights must have C_in = 1");
    ToyCodecModel m;
    m.channels = k.out_channels;
    m.patch_size = k.kernel_size;
    const std::size_t d = m.patch_dim();
    auto load = [&](const char* name, std::size_t expect) {
        auto v = tf.to_doubles(name);
        if (v.size() != expect) throw InputError(std::string("toy model tensor '") + name + "' has the wrong size");
        return v;
    };
    m.weights = Matrix(m.channels, d);
    std::copy(k.weights.begin(), k.weights.end(), m.weights.data().begin());
    m.bias = *k.bias;
    m.mean = load("analysis.mean", d);
    auto basis = load("analysis.basis", m.channels * d);
    m.basis = Matrix(m.channels, d);
    std::copy(basis.begin(), basis.end(), m.basis.data().begin());
    m.eigenvalues = load("analysis.eigenvalues", m.channels);
    for (double v : load("entropy.mean", m.channels)) m.latent_mean.push_back(static_cast<float>(v));
    for (double v : load("entropy.scale", m.channels)) m.latent_scale.push_back(static_cast<float>(v));
    m.step = static_cast<float>(load("codec.step", 1)[0]);
    m.beta = static_cast<float>(load("codec.beta", 1)[0]);
    m.validate();
    return m;
}

void save_model(const std::filesystem::path& path, const ToyCodecModel& model) {
    write_tensor_file(path, model_to_tensor_file(model));
}

ToyCodecModel load_model(const std::filesystem::path& path) {
    return model_from_tensor_file(read_tensor_file(path));
}

std::vector<std::uint8_t> entropy_encode(const LatentBlock& latents, const ToyCodecModel& model, std::size_t width,
                                         std::size_t height, const EncodeOptions& options) {
    const std::size_t p = model.patch_size;
    if (latents.channels != model.channels) throw InputError("latent channel count does not match model");
    if (latents.patches_x != (width + p - 1) / p || latents.patches_y != (height + p - 1) / p)
        throw InputError("latent grid does not cover the stated image size");
    if (width > 0xFFFFFFFFULL || height > 0xFFFFFFFFULL || model.channels > 0xFFFF || p > 0xFF)
        throw InputError("dimensions exceed bitstream field widths");

    const auto perm = options.permutation.value_or(identity_permutation(model.channels));
    invert_permutation(perm); // validates

    std::vector<bool> scalar(model.channels, false);
    BitstreamHeader h;
    if (options.scalar_path) {
        h.flags |= kFlagScalarPath;
        std::vector<std::size_t> chans = options.scalar_channels;
        if (chans.empty()) chans.push_back(ToyCodecModel::kBiasChannel);
        std::sort(chans.begin(), chans.end());
        chans.erase(std::unique(chans.begin(), chans.end()), chans.end());
        for (auto c : chans) {
            if (c >= model.channels) throw InputError("scalar channel out of range");
            scalar[c] = true;
            h.scalars.emplace_back(static_cast<std::uint16_t>(c), most_frequent_symbol(latents, c));
        }
    }
    if (options.permutation) h.flags |= kFlagPermuted;

    ByteWriter w;
    w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
    w.put<std::uint16_t>(kBitstreamVersion);
    w.put<std::uint16_t>(h.flags);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(width));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(height));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(p));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(model.channels));
    w.put<float>(model.step);
    w.put<float>(model.beta);
    w.put<std::uint64_t>(model.hash());
    if (options.permutation) w.put<std::uint64_t>(options.manifest_hash);
    for (std::size_t c = 0; c < model.channels; ++c) {
        w.put<float>(model.latent_mean[c]);
        w.put<float>(model.latent_scale[c]);
    }
    if (options.scalar_path) {
        w.put<std::uint16_t>(static_cast<std::uint16_t>(h.scalars.size()));
        for (const auto& [c, sym] : h.scalars) {
            w.put<std::uint16_t>(c);
            w.put<std::int32_t>(sym);
        }
    }

    const LatentBlock coded = apply_permutation(latents, perm);
    RangeEncoder enc;
    for (std::size_t j = 0; j < model.channels; ++j) {
        const std::size_t c = perm[j];
        if (scalar[c]) continue;
        const GaussianSymbolModel sm(model.symbol_scale(c));
        const std::int32_t offset = model.symbol_offset(c);
        for (std::size_t patch = 0; patch < coded.patch_count(); ++patch) sm.encode(enc, coded.at(patch, j) - offset);
    }
    const auto payload = enc.finish();
    w.bytes.insert(w.bytes.end(), payload.begin(), payload.end());
    w.put<std::uint32_t>(crc32(w.bytes));
    return std::move(w.bytes);
}

BitstreamHeader parse_bitstream_header(std::span<const std::uint8_t> stream) {
    if (stream.size() < 8 || !std::equal(std::begin(kMagic), std::end(kMagic), stream.begin()))
        throw InputError("not an ISCS bitstream (bad magic)");
    ByteReader r(stream.first(stream.size() - 4));
    BitstreamHeader h;
    r.get<std::uint32_t>();
    h.version = r.get<std::uint16_t>();
    if (h.version != kBitstreamVersion) throw InputError("unsupported bitstream version " + std::to_string(h.version));
    h.flags = r.get<std::uint16_t>();
    h.width = r.get<std::uint32_t>();
    h.height = r.get<std::uint32_t>();
    h.patch_size = r.get<std::uint8_t>();
    h.channels = r.get<std::uint16_t>();
    h.step = r.get<float>();
    h.beta = r.get<float>();
    h.model_hash = r.get<std::uint64_t>();
    if (h.flags & kFlagPermuted) h.manifest_hash = r.get<std::uint64_t>();
    for (std::size_t c = 0; c < h.channels; ++c) {
        h.latent_mean.push_back(r.get<float>());
        h.latent_scale.push_back(r.get<float>());
    }
    if (h.flags & kFlagScalarPath) {
        const auto n = r.get<std::uint16_t>();
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = r.get<std::uint16_t>();
            const auto sym = r.get<std::int32_t>();
            h.scalars.emplace_back(c, sym);
        }
    }
    h.header_bytes = r.pos();
    h.payload_bytes = stream.size() - 4 - r.pos();
    return h;
}

DecodedStream entropy_decode(std::span<const std::uint8_t> stream, const ToyCodecModel& model,
                             const DecodeOptions& options) {
    if (stream.size() < 8) throw InputError("bitstream too short");
    // A foreign file is an input error, not corruption.
    if (!std::equal(std::begin(kMagic), std::end(kMagic), stream.begin()))
        throw InputError("not an ISCS bitstream (bad magic)");
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, stream.data() + stream.size() - 4, 4);
    if (crc32(stream.first(stream.size() - 4)) != stored_crc) throw IntegrityError("bitstream CRC mismatch");

    DecodedStream out;
    out.header = parse_bitstream_header(stream);
    const auto& h = out.header;
    if (h.model_hash != model.hash()) throw IntegrityError("bitstream was produced by a different model (hash mismatch)");
    if (h.patch_size != model.patch_size || h.channels != model.channels || h.step != model.step ||
        h.beta != model.beta || h.latent_mean != model.latent_mean || h.latent_scale != model.latent_scale)
        throw IntegrityError("bitstream header parameters disagree with the model");

    std::vector<std::size_t> perm = identity_permutation(model.channels);
    if (h.flags & kFlagPermuted) {
        if (!options.permutation) throw InputError("bitstream is channel-permuted; a manifest is required to decode it");
        if (options.manifest_hash && *options.manifest_hash != *h.manifest_hash)
            throw IntegrityError("bitstream was produced with a different manifest (hash mismatch)");
        perm = *options.permutation;
    }
    if (perm.size() != model.channels) throw InputError("permutation length does not match model channels");

    std::vector<bool> scalar(model.channels, false);
    std::vector<std::int32_t> scalar_value(model.channels, 0);
    for (const auto& [c, sym] : h.scalars) {
        if (c >= model.channels) throw IntegrityError("scalar channel index out of range");
        scalar[c] = true;
        scalar_value[c] = sym;
    }

    const std::size_t p = model.patch_size;
    LatentBlock coded((h.height + p - 1) / p, (h.width + p - 1) / p, model.channels);
    RangeDecoder dec(stream.subspan(h.header_bytes, h.payload_bytes));
    for (std::size_t j = 0; j < model.channels; ++j) {
        const std::size_t c = perm[j];
        if (scalar[c]) {
            for (std::size_t patch = 0; patch < coded.patch_count(); ++patch) coded.at(patch, j) = scalar_value[c];
            continue;
        }
        const GaussianSymbolModel sm(model.symbol_scale(c));
        const std::int32_t offset = model.symbol_offset(c);
        for (std::size_t patch = 0; patch < coded.patch_count(); ++patch) coded.at(patch, j) = sm.decode(dec) + offset;
    }
    if (dec.overrun()) throw IntegrityError("bitstream payload truncated");
    out.latents = apply_permutation(coded, invert_permutation(perm));
    return out;
}

std::vector<std::uint8_t> encode_image(const ToyCodecModel& model, const Image& image, const EncodeOptions& options) {
    require_gray(image);
    const Image padded = pad_to_multiple(image, model.patch_size);
    return entropy_encode(encode_latents(model, padded), model, image.width, image.height, options);
}

Image decode_image(std::span<const std::uint8_t> stream, const ToyCodecModel& model, const DecodeOptions& options) {
    const auto decoded = entropy_decode(stream, model, options);
    return crop(synthesize(model, decoded.latents), decoded.header.width, decoded.header.height);
}

std::vector<double> channel_code_lengths(const ToyCodecModel& model, const LatentBlock& latents) {
    if (latents.channels != model.channels) throw InputError("latent channel count does not match model");
    std::vector<double> bits(model.channels, 0.0);
    for (std::size_t c = 0; c < model.channels; ++c) {
        const GaussianSymbolModel sm(model.symbol_scale(c));
        const std::int32_t offset = model.symbol_offset(c);
        for (std::size_t patch = 0; patch < latents.patch_count(); ++patch)
            bits[c] += sm.code_length_bits(latents.at(patch, c) - offset);
    }
    return bits;
}

} // namespace iscs
