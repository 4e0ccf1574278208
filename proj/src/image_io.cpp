#include "maskfuse/image_io.hpp"

#include "maskfuse/errors.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace maskfuse {

namespace {

struct PngReadResult {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

PngReadResult decode_png(std::span<const std::uint8_t> bytes, png_uint_32 format, char const* what) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw IoError(std::string(what) + ": " + image.message);
    }
    image.format = format;
    PngReadResult out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError(std::string(what) + ": " + msg);
    }
    return out;
}

std::vector<std::uint8_t> encode_png(int width, int height, png_uint_32 format, void const* pixels) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr))
        throw IoError(std::string("png encode: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr))
        throw IoError(std::string("png encode: ") + image.message);
    out.resize(size);
    return out;
}

void write_bytes(std::filesystem::path const& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<char const*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32le(std::span<const std::uint8_t> bytes, std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    return v;
}

void append_floats_le(std::vector<std::uint8_t>& out, std::span<const float> values) {
    for (float f : values) put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

std::vector<float> read_floats_le(std::span<const std::uint8_t> bytes, std::size_t pos, std::size_t n) {
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<float>(get_u32le(bytes, pos + 4 * i));
    return values;
}

constexpr char kBase64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

} // namespace

RgbImage::RgbImage(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw InvalidArgument("image must be at least 1x1");
    pixels.assign(static_cast<std::size_t>(w) * h * 3, 0);
}

RgbImage RgbImage::crop(Rect const& rect) const {
    if (rect.x < 0 || rect.y < 0 || rect.w < 1 || rect.h < 1 || rect.x + rect.w > width || rect.y + rect.h > height)
        throw DimensionError("image crop outside frame");
    RgbImage out(rect.w, rect.h);
    for (int y = 0; y < rect.h; ++y)
        std::memcpy(out.at(0, y), at(rect.x, rect.y + y), static_cast<std::size_t>(rect.w) * 3);
    return out;
}

std::vector<std::uint8_t> read_file_bytes(std::filesystem::path const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RgbImage decode_rgb_png(std::span<const std::uint8_t> bytes) {
    auto png = decode_png(bytes, PNG_FORMAT_RGB, "rgb png");
    RgbImage img;
    img.width = png.width;
    img.height = png.height;
    img.pixels = std::move(png.pixels);
    return img;
}

RgbImage read_rgb_png(std::filesystem::path const& path) { return decode_rgb_png(read_file_bytes(path)); }

std::vector<std::uint8_t> encode_rgb_png(RgbImage const& image) {
    return encode_png(image.width, image.height, PNG_FORMAT_RGB, image.pixels.data());
}

void write_rgb_png(std::filesystem::path const& path, RgbImage const& image) {
    write_bytes(path, encode_rgb_png(image));
}

BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes) {
    auto png = decode_png(bytes, PNG_FORMAT_GRAY, "mask png");
    return BinaryMask::from_bytes(png.width, png.height, png.pixels);
}

BinaryMask read_mask_png(std::filesystem::path const& path) { return decode_mask_png(read_file_bytes(path)); }

std::vector<std::uint8_t> encode_mask_png(BinaryMask const& mask) {
    auto bytes = mask.to_bytes(255);
    return encode_png(mask.width(), mask.height(), PNG_FORMAT_GRAY, bytes.data());
}

void write_mask_png(std::filesystem::path const& path, BinaryMask const& mask) {
    write_bytes(path, encode_mask_png(mask));
}

LabelMap read_label_png(std::filesystem::path const& path, int class_count, Label background_index) {
    auto png = decode_png(read_file_bytes(path), PNG_FORMAT_GRAY, "label png");
    std::vector<Label> labels(png.pixels.begin(), png.pixels.end());
    try {
        return LabelMap(png.width, png.height, class_count, background_index, std::move(labels));
    } catch (InvalidArgument const& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_label_png(std::filesystem::path const& path, LabelMap const& labels) {
    if (labels.class_count() > 256) throw IoError("label PNG holds at most 256 classes");
    std::vector<std::uint8_t> bytes(labels.labels().begin(), labels.labels().end());
    write_bytes(path, encode_png(labels.width(), labels.height(), PNG_FORMAT_GRAY, bytes.data()));
}

std::vector<std::uint8_t> encode_pmap(ProbabilityMap const& map) {
    std::vector<std::uint8_t> out = {'P', 'M', 'A', 'P'};
    out.reserve(16 + map.values().size() * 4);
    put_u32le(out, static_cast<std::uint32_t>(map.width()));
    put_u32le(out, static_cast<std::uint32_t>(map.height()));
    put_u32le(out, 0);
    append_floats_le(out, map.values());
    return out;
}

ProbabilityMap decode_pmap(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "PMAP", 4) != 0) throw IoError("pmap: bad header");
    auto const w = get_u32le(bytes, 4);
    auto const h = get_u32le(bytes, 8);
    auto const n = static_cast<std::size_t>(w) * h;
    if (bytes.size() != 16 + 4 * n)
        throw IoError("pmap: payload is " + std::to_string(bytes.size() - 16) + " bytes, expected " +
                      std::to_string(4 * n));
    return ProbabilityMap(static_cast<int>(w), static_cast<int>(h), read_floats_le(bytes, 16, n));
}

void write_pmap(std::filesystem::path const& path, ProbabilityMap const& map) { write_bytes(path, encode_pmap(map)); }

ProbabilityMap read_pmap(std::filesystem::path const& path) { return decode_pmap(read_file_bytes(path)); }

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        std::uint32_t const v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kBase64Alphabet[(v >> 18) & 63];
        out += kBase64Alphabet[(v >> 12) & 63];
        out += kBase64Alphabet[(v >> 6) & 63];
        out += kBase64Alphabet[v & 63];
    }
    if (i < bytes.size()) {
        std::uint32_t v = bytes[i] << 16;
        if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
        out += kBase64Alphabet[(v >> 18) & 63];
        out += kBase64Alphabet[(v >> 12) & 63];
        out += (i + 1 < bytes.size()) ? kBase64Alphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    static auto const table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kBase64Alphabet[i])] = i;
        return t;
    }();
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t acc = 0;
    int bits = 0;
    std::size_t pad = 0;
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
        auto const c = static_cast<unsigned char>(text[pos]);
        if (c == '=') {
            ++pad;
            continue;
        }
        if (c == '\n' || c == '\r' || c == ' ') continue;
        if (pad > 0 || table[c] < 0) throw ParseError("invalid base64 character", pos);
        acc = (acc << 6) | static_cast<std::uint32_t>(table[c]);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>(acc >> bits));
            acc &= (1u << bits) - 1;
        }
    }
    if (pad > 2 || bits >= 6) throw ParseError("truncated base64 input", text.size());
    return out;
}

std::string encode_float_array_b64(std::span<const float> values) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(values.size() * 4);
    append_floats_le(bytes, values);
    return base64_encode(bytes);
}

std::vector<float> decode_float_array_b64(std::string_view text) {
    auto bytes = base64_decode(text);
    if (bytes.size() % 4 != 0) throw ParseError("float array length is not a multiple of 4 bytes", bytes.size());
    return read_floats_le(bytes, 0, bytes.size() / 4);
}

} // namespace maskfuse
