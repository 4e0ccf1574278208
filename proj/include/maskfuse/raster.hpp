#pragma once

// Rasters shared by every pipeline: bit-packed binary masks, per-pixel
// probability maps, class label planes and exact Euclidean distance fields.
//
// Coordinates are (x right, y down) with the origin at the top-left pixel.
// Storage is row-major: index = y * width + x.

#include <cstdint>
#include <span>
#include <vector>

namespace maskfuse {

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
    bool contains(int px, int py) const { return px >= x && py >= y && px < x + w && py < y + h; }
    friend bool operator==(Rect const&, Rect const&) = default;
};

class BinaryMask {
  public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    /// Builds from one byte per pixel; any nonzero byte is foreground.
    static BinaryMask from_bytes(int width, int height, std::span<const std::uint8_t> bytes);
    static BinaryMask filled(int width, int height, Rect const& rect);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return static_cast<std::size_t>(width_) * height_; }

    bool get(int x, int y) const { return test(index(x, y)); }
    void set(int x, int y, bool value = true) { assign(index(x, y), value); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void assign(std::size_t i, bool value);

    std::size_t count() const;
    bool empty() const { return count() == 0; }
    bool same_shape(BinaryMask const& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    std::vector<std::uint8_t> to_bytes(std::uint8_t on = 1) const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> words() { return words_; }

    friend bool operator==(BinaryMask const&, BinaryMask const&) = default;

  private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint64_t> words_;
};

class ProbabilityMap {
  public:
    ProbabilityMap() = default;
    ProbabilityMap(int width, int height, float fill = 0.0f);
    /// Throws InvalidArgument when a value falls outside [0, 1] (NaN included).
    ProbabilityMap(int width, int height, std::vector<float> values);

    int width() const { return width_; }
    int height() const { return height_; }
    float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int x, int y, float v);
    std::span<const float> values() const { return values_; }

    friend bool operator==(ProbabilityMap const&, ProbabilityMap const&) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
};

using Label = std::uint16_t;

class LabelMap {
  public:
    LabelMap() = default;
    LabelMap(int width, int height, int class_count, Label background_index);
    LabelMap(int width, int height, int class_count, Label background_index, std::vector<Label> labels);

    int width() const { return width_; }
    int height() const { return height_; }
    int class_count() const { return class_count_; }
    Label background_index() const { return background_; }

    Label at(int x, int y) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int x, int y, Label label);
    std::span<const Label> labels() const { return labels_; }

    /// Pixels carrying `label`.
    BinaryMask mask_of(Label label) const;

    friend bool operator==(LabelMap const&, LabelMap const&) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    int class_count_ = 0;
    Label background_ = 0;
    std::vector<Label> labels_;
};

/// Exact Euclidean distances, kept as integer squared distances so that
/// comparisons against brute force are exact.
class DistanceField {
  public:
    DistanceField(int width, int height, std::vector<std::int64_t> squared);

    int width() const { return width_; }
    int height() const { return height_; }
    std::int64_t squared(int x, int y) const { return squared_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const;
    std::span<const std::int64_t> squared_values() const { return squared_; }

  private:
    int width_;
    int height_;
    std::vector<std::int64_t> squared_;
};

BinaryMask mask_union(std::span<const BinaryMask> masks);
BinaryMask mask_intersection(BinaryMask const& a, BinaryMask const& b);
BinaryMask mask_difference(BinaryMask const& a, BinaryMask const& b);

/// |a ∩ b| / |a ∪ b|; two empty masks score 1.
double iou(BinaryMask const& a, BinaryMask const& b);

/// Distance from each region pixel to the nearest non-region pixel. Everything
/// beyond the image frame counts as non-region.
DistanceField distance_transform(BinaryMask const& region);

/// Share of mask pixels whose probability is strictly above `threshold`.
double fraction_above(BinaryMask const& mask, ProbabilityMap const& prob, double threshold);

/// 4-connected components; labels are 1..count in row-major discovery order, 0 off-mask.
struct Components {
    int count = 0;
    std::vector<int> labels;
};
Components connected_components(BinaryMask const& mask);

/// One-pixel 4-neighbourhood erosion; the frame counts as background.
BinaryMask erode(BinaryMask const& mask);

BinaryMask crop(BinaryMask const& mask, Rect const& rect);
/// Writes `tile` into `target` at `rect` (bits inside rect are overwritten).
void paste(BinaryMask& target, BinaryMask const& tile, Rect const& rect);

} // namespace maskfuse
