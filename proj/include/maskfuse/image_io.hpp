#pragma once

#include "maskfuse/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maskfuse {

/// 8-bit interleaved RGB raster; the image every provider receives.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // width * height * 3

    RgbImage() = default;
    RgbImage(int w, int h);

    std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    std::uint8_t const* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    RgbImage crop(Rect const& rect) const;

    friend bool operator==(RgbImage const&, RgbImage const&) = default;
};

// PNG. Any colour type is accepted on read and converted to the requested layout.
RgbImage read_rgb_png(std::filesystem::path const& path);
RgbImage decode_rgb_png(std::span<const std::uint8_t> bytes);
void write_rgb_png(std::filesystem::path const& path, RgbImage const& image);
std::vector<std::uint8_t> encode_rgb_png(RgbImage const& image);

/// Masks on disk: 8-bit grey PNG, 0 background, 255 foreground; any nonzero loads as foreground.
BinaryMask read_mask_png(std::filesystem::path const& path);
BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes);
void write_mask_png(std::filesystem::path const& path, BinaryMask const& mask);
std::vector<std::uint8_t> encode_mask_png(BinaryMask const& mask);

/// Label planes on disk: 8-bit grey PNG holding class indices directly.
LabelMap read_label_png(std::filesystem::path const& path, int class_count, Label background_index);
void write_label_png(std::filesystem::path const& path, LabelMap const& labels);

// Probability maps: "PMAP" magic, u32 width, u32 height, u32 reserved, then
// width*height little-endian float32 values.
std::vector<std::uint8_t> encode_pmap(ProbabilityMap const& map);
ProbabilityMap decode_pmap(std::span<const std::uint8_t> bytes);
void write_pmap(std::filesystem::path const& path, ProbabilityMap const& map);
ProbabilityMap read_pmap(std::filesystem::path const& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Raw little-endian float32 array, as carried in the probability-map wire format.
std::string encode_float_array_b64(std::span<const float> values);
std::vector<float> decode_float_array_b64(std::string_view text);

std::vector<std::uint8_t> read_file_bytes(std::filesystem::path const& path);

} // namespace maskfuse
