#include "iscs/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "iscs/error.hpp"

namespace iscs {
namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t next_number() {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (++digits > 9) throw InputError("PNM header number too large");
            ++pos_;
        }
        if (digits == 0) throw InputError("PNM header truncated or malformed");
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw InputError("PNM header missing whitespace before raster");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

} // namespace

Image parse_pnm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw InputError("unsupported image format: expected binary PGM (P5) or PPM (P6)");
    const std::size_t channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader reader(bytes);
    const std::size_t width = reader.next_number();
    const std::size_t height = reader.next_number();
    const std::size_t maxval = reader.next_number();
    if (width == 0 || height == 0) throw InputError("image dimensions must be >= 1");
    if (maxval != 255) throw InputError("unsupported PNM maxval " + std::to_string(maxval) + " (need 255)");
    const std::size_t start = reader.raster_start();
    const std::size_t need = width * height * channels;
    if (bytes.size() < start + need) throw InputError("PNM raster truncated");

    Image img(width, height, channels);
    std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(start),
              bytes.begin() + static_cast<std::ptrdiff_t>(start + need), img.samples.begin());
    return img;
}

std::vector<std::uint8_t> serialize_pnm(const Image& img) {
    if (img.channels != 1 && img.channels != 3) throw InputError("PNM supports 1 or 3 channels");
    if (img.samples.size() != img.width * img.height * img.channels)
        throw InputError("image sample count does not match its dimensions");
    const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                               std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.samples.begin(), img.samples.end());
    return out;
}

Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open image '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pnm(bytes);
}

void write_image(const std::filesystem::path& path, const Image& img) {
    auto bytes = serialize_pnm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write image '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image pad_to_multiple(const Image& img, std::size_t block) {
    const std::size_t w = (img.width + block - 1) / block * block;
    const std::size_t h = (img.height + block - 1) / block * block;
    if (w == img.width && h == img.height) return img;
    Image out(w, h, img.channels);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(std::min(x, img.width - 1), std::min(y, img.height - 1), c);
    return out;
}

Image crop(const Image& img, std::size_t width, std::size_t height) {
    if (width > img.width || height > img.height) throw InputError("crop larger than image");
    Image out(width, height, img.channels);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x, y, c);
    return out;
}

} // namespace iscs
