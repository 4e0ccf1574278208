#pragma once

#include "maskfuse/clicks.hpp"
#include "maskfuse/raster.hpp"

#include <span>
#include <vector>

namespace maskfuse {

/// n*n positive clicks at cell centres: x_j = floor((j + 0.5) * width / n), row-major.
ClickSet grid_clicks(int width, int height, int n);

struct WindowPlan {
    std::vector<Rect> rects; // row-major
    int image_w = 0;
    int image_h = 0;
    int window = 0;
    int stride = 0;
};

/// Square windows at stride multiples; the last row/column is clamped flush
/// with the image edge so the union covers every pixel.
WindowPlan plan_windows(int width, int height, int window, int stride);

/// Window plan in native pixels for a provider that resizes its input so the
/// long side equals `long_side`: window and stride are scaled by
/// max(width, height) / long_side, and the window is clamped to the short side.
WindowPlan plan_windows_for_resize(int width, int height, int window, int stride, int long_side);

/// Per-pixel mean of every window covering the pixel.
ProbabilityMap aggregate_windows(std::span<const ProbabilityMap> partials, WindowPlan const& plan);

struct TilePlan {
    std::vector<Rect> rects; // row-major, disjoint, exact partition
    int image_w = 0;
    int image_h = 0;
    int tile = 0;
};

/// cap x cap tiles; remainder tiles along the right/bottom edges keep their natural size.
TilePlan plan_tiles(int width, int height, int cap);
std::vector<BinaryMask> split_tiles(BinaryMask const& mask, TilePlan const& plan);
BinaryMask merge_tiles(std::span<const BinaryMask> tile_masks, TilePlan const& plan);

/// Nearest-neighbour resampling with centre alignment: source index floor((i + 0.5) * src / dst).
ProbabilityMap resize_nearest(ProbabilityMap const& map, int width, int height);
BinaryMask resize_nearest(BinaryMask const& mask, int width, int height);

} // namespace maskfuse
