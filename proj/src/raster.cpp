#include "maskfuse/raster.hpp"

#include "maskfuse/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace maskfuse {

namespace {

void require_positive_size(int width, int height) {
    if (width < 1 || height < 1) {
        throw InvalidArgument("raster size must be at least 1x1, got " + std::to_string(width) + "x" +
                              std::to_string(height));
    }
}

void require_same_shape(BinaryMask const& a, BinaryMask const& b, char const* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": mask sizes differ (" + std::to_string(a.width()) + "x" +
                             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                             std::to_string(b.height()) + ")");
    }
}

std::size_t popcount(std::span<const std::uint64_t> words) {
    std::size_t n = 0;
    for (auto w : words) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    auto q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

// ---------------------------------------------------------------- BinaryMask

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    require_positive_size(width, height);
    words_.assign((size() + 63) / 64, 0);
}

BinaryMask BinaryMask::from_bytes(int width, int height, std::span<const std::uint8_t> bytes) {
    BinaryMask mask(width, height);
    if (bytes.size() != mask.size()) {
        throw DimensionError("mask byte plane has " + std::to_string(bytes.size()) + " entries, expected " +
                             std::to_string(mask.size()));
    }
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] != 0) mask.assign(i, true);
    }
    return mask;
}

BinaryMask BinaryMask::filled(int width, int height, Rect const& rect) {
    BinaryMask mask(width, height);
    int const x0 = std::max(rect.x, 0), y0 = std::max(rect.y, 0);
    int const x1 = std::min(rect.x + rect.w, width), y1 = std::min(rect.y + rect.h, height);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) mask.set(x, y);
    return mask;
}

void BinaryMask::assign(std::size_t i, bool value) {
    auto const bit = std::uint64_t{1} << (i & 63);
    if (value)
        words_[i >> 6] |= bit;
    else
        words_[i >> 6] &= ~bit;
}

std::size_t BinaryMask::count() const { return popcount(words_); }

std::vector<std::uint8_t> BinaryMask::to_bytes(std::uint8_t on) const {
    std::vector<std::uint8_t> out(size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (test(i)) out[i] = on;
    return out;
}

// ------------------------------------------------------------ ProbabilityMap

ProbabilityMap::ProbabilityMap(int width, int height, float fill) : width_(width), height_(height) {
    require_positive_size(width, height);
    if (!(fill >= 0.0f && fill <= 1.0f)) throw InvalidArgument("probability fill outside [0,1]");
    values_.assign(static_cast<std::size_t>(width) * height, fill);
}

ProbabilityMap::ProbabilityMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
    require_positive_size(width, height);
    if (values_.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionError("probability plane has " + std::to_string(values_.size()) + " values, expected " +
                             std::to_string(static_cast<std::size_t>(width) * height));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] >= 0.0f && values_[i] <= 1.0f)) {
            throw InvalidArgument("probability value " + std::to_string(values_[i]) + " at index " +
                                  std::to_string(i) + " outside [0,1]");
        }
    }
}

void ProbabilityMap::set(int x, int y, float v) {
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidArgument("probability value outside [0,1]");
    values_[static_cast<std::size_t>(y) * width_ + x] = v;
}

// ------------------------------------------------------------------ LabelMap

LabelMap::LabelMap(int width, int height, int class_count, Label background_index)
    : LabelMap(width, height, class_count, background_index,
               std::vector<Label>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0),
                                  background_index)) {}

LabelMap::LabelMap(int width, int height, int class_count, Label background_index, std::vector<Label> labels)
    : width_(width), height_(height), class_count_(class_count), background_(background_index),
      labels_(std::move(labels)) {
    require_positive_size(width, height);
    if (class_count < 1) throw InvalidArgument("label map needs at least one class");
    if (background_index >= class_count) throw InvalidArgument("background index out of range");
    if (labels_.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionError("label plane has " + std::to_string(labels_.size()) + " entries, expected " +
                             std::to_string(static_cast<std::size_t>(width) * height));
    }
    for (auto l : labels_) {
        if (l >= class_count) {
            throw InvalidArgument("label " + std::to_string(l) + " not below class count " +
                                  std::to_string(class_count));
        }
    }
}

void LabelMap::set(int x, int y, Label label) {
    if (label >= class_count_) throw InvalidArgument("label out of range");
    labels_[static_cast<std::size_t>(y) * width_ + x] = label;
}

BinaryMask LabelMap::mask_of(Label label) const {
    BinaryMask mask(width_, height_);
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) mask.assign(i, true);
    return mask;
}

// ------------------------------------------------------------- DistanceField

DistanceField::DistanceField(int width, int height, std::vector<std::int64_t> squared)
    : width_(width), height_(height), squared_(std::move(squared)) {
    require_positive_size(width, height);
    if (squared_.size() != static_cast<std::size_t>(width) * height)
        throw DimensionError("distance field size mismatch");
}

double DistanceField::at(int x, int y) const { return std::sqrt(static_cast<double>(squared(x, y))); }

// ---------------------------------------------------------------- operations

BinaryMask mask_union(std::span<const BinaryMask> masks) {
    if (masks.empty()) throw InvalidArgument("mask_union: empty mask list");
    BinaryMask out = masks.front();
    for (auto const& m : masks.subspan(1)) {
        require_same_shape(out, m, "mask_union");
        auto dst = out.words();
        auto src = m.words();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
    }
    return out;
}

BinaryMask mask_intersection(BinaryMask const& a, BinaryMask const& b) {
    require_same_shape(a, b, "mask_intersection");
    BinaryMask out = a;
    auto dst = out.words();
    auto src = b.words();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= src[i];
    return out;
}

BinaryMask mask_difference(BinaryMask const& a, BinaryMask const& b) {
    require_same_shape(a, b, "mask_difference");
    BinaryMask out = a;
    auto dst = out.words();
    auto src = b.words();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= ~src[i];
    return out;
}

double iou(BinaryMask const& a, BinaryMask const& b) {
    require_same_shape(a, b, "iou");
    std::size_t inter = 0, uni = 0;
    auto wa = a.words();
    auto wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) {
        inter += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
        uni += static_cast<std::size_t>(std::popcount(wa[i] | wb[i]));
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Meijster, Roerdink & Hesselink two-pass exact EDT on a grid padded by one
// background pixel on every side, so the frame acts as non-region.
DistanceField distance_transform(BinaryMask const& region) {
    int const w = region.width(), h = region.height();
    int const pw = w + 2, ph = h + 2;
    auto inside = [&](int px, int py) {
        return px >= 1 && py >= 1 && px <= w && py <= h && region.get(px - 1, py - 1);
    };

    // Column pass: g = vertical distance to the nearest background pixel.
    std::vector<std::int64_t> g(static_cast<std::size_t>(pw) * ph, 0);
    for (int x = 0; x < pw; ++x) {
        for (int y = 1; y < ph; ++y) {
            auto& cell = g[static_cast<std::size_t>(y) * pw + x];
            cell = inside(x, y) ? g[static_cast<std::size_t>(y - 1) * pw + x] + 1 : 0;
        }
        for (int y = ph - 2; y >= 0; --y) {
            auto& cell = g[static_cast<std::size_t>(y) * pw + x];
            cell = std::min(cell, g[static_cast<std::size_t>(y + 1) * pw + x] + 1);
        }
    }

    std::vector<std::int64_t> out(region.size(), 0);
    std::vector<int> s(pw), t(pw);
    std::vector<std::int64_t> gsq(pw);
    for (int y = 1; y <= h; ++y) {
        for (int x = 0; x < pw; ++x) {
            auto const v = g[static_cast<std::size_t>(y) * pw + x];
            gsq[x] = v * v;
        }
        auto f = [&](std::int64_t x, int i) { return (x - i) * (x - i) + gsq[i]; };
        auto sep = [&](int i, int u) {
            return floor_div(static_cast<std::int64_t>(u) * u - static_cast<std::int64_t>(i) * i + gsq[u] - gsq[i],
                             2 * static_cast<std::int64_t>(u - i));
        };

        int q = 0;
        s[0] = 0;
        t[0] = 0;
        for (int u = 1; u < pw; ++u) {
            while (q >= 0 && f(t[q], s[q]) > f(t[q], u)) --q;
            if (q < 0) {
                q = 0;
                s[0] = u;
            } else {
                auto const wpos = 1 + sep(s[q], u);
                if (wpos < pw) {
                    ++q;
                    s[q] = u;
                    t[q] = static_cast<int>(wpos);
                }
            }
        }
        for (int u = pw - 1; u >= 0; --u) {
            if (u >= 1 && u <= w) out[static_cast<std::size_t>(y - 1) * w + (u - 1)] = f(u, s[q]);
            if (u == t[q]) --q;
        }
    }
    return DistanceField(w, h, std::move(out));
}

double fraction_above(BinaryMask const& mask, ProbabilityMap const& prob, double threshold) {
    if (mask.width() != prob.width() || mask.height() != prob.height())
        throw DimensionError("fraction_above: mask and probability map sizes differ");
    std::size_t total = 0, above = 0;
    auto values = prob.values();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask.test(i)) continue;
        ++total;
        if (values[i] > threshold) ++above;
    }
    if (total == 0) throw InvalidArgument("fraction_above: empty mask");
    return static_cast<double>(above) / static_cast<double>(total);
}

Components connected_components(BinaryMask const& mask) {
    int const w = mask.width(), h = mask.height();
    Components comps;
    comps.labels.assign(mask.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (!mask.test(start) || comps.labels[start] != 0) continue;
        int const id = ++comps.count;
        comps.labels[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            auto const i = stack.back();
            stack.pop_back();
            int const x = static_cast<int>(i % w), y = static_cast<int>(i / w);
            auto visit = [&](int nx, int ny) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
                auto const j = static_cast<std::size_t>(ny) * w + nx;
                if (mask.test(j) && comps.labels[j] == 0) {
                    comps.labels[j] = id;
                    stack.push_back(j);
                }
            };
            visit(x - 1, y);
            visit(x + 1, y);
            visit(x, y - 1);
            visit(x, y + 1);
        }
    }
    return comps;
}

BinaryMask erode(BinaryMask const& mask) {
    int const w = mask.width(), h = mask.height();
    BinaryMask out(w, h);
    auto on = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && mask.get(x, y); };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (on(x, y) && on(x - 1, y) && on(x + 1, y) && on(x, y - 1) && on(x, y + 1)) out.set(x, y);
    return out;
}

BinaryMask crop(BinaryMask const& mask, Rect const& rect) {
    if (rect.x < 0 || rect.y < 0 || rect.w < 1 || rect.h < 1 || rect.x + rect.w > mask.width() ||
        rect.y + rect.h > mask.height())
        throw DimensionError("crop: rectangle outside mask");
    BinaryMask out(rect.w, rect.h);
    for (int y = 0; y < rect.h; ++y)
        for (int x = 0; x < rect.w; ++x)
            if (mask.get(rect.x + x, rect.y + y)) out.set(x, y);
    return out;
}

void paste(BinaryMask& target, BinaryMask const& tile, Rect const& rect) {
    if (tile.width() != rect.w || tile.height() != rect.h)
        throw DimensionError("paste: tile size does not match its rectangle");
    if (rect.x < 0 || rect.y < 0 || rect.x + rect.w > target.width() || rect.y + rect.h > target.height())
        throw DimensionError("paste: rectangle outside target");
    for (int y = 0; y < rect.h; ++y)
        for (int x = 0; x < rect.w; ++x) target.set(rect.x + x, rect.y + y, tile.get(x, y));
}

} // namespace maskfuse
