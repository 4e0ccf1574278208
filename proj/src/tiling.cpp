#include "maskfuse/tiling.hpp"

#include "maskfuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace maskfuse {

namespace {

std::vector<int> axis_offsets(int dim, int window, int stride) {
    std::vector<int> offsets;
    for (int p = 0; p + window < dim; p += stride) offsets.push_back(p);
    offsets.push_back(dim - window);
    return offsets;
}

int centre_index(int i, int src, int dst) {
    return static_cast<int>((2LL * i + 1) * src / (2LL * dst));
}

} // namespace

ClickSet grid_clicks(int width, int height, int n) {
    if (n < 1) throw InvalidArgument("grid_clicks: grid side must be >= 1");
    if (width < 1 || height < 1) throw InvalidArgument("grid_clicks: image must be at least 1x1");
    ClickSet clicks;
    clicks.positives.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        int const y = centre_index(j, height, n);
        for (int i = 0; i < n; ++i) clicks.positives.push_back({centre_index(i, width, n), y, Polarity::Positive});
    }
    return clicks;
}

WindowPlan plan_windows(int width, int height, int window, int stride) {
    if (window < 1 || stride < 1) throw InvalidArgument("plan_windows: window and stride must be >= 1");
    if (width < 1 || height < 1) throw InvalidArgument("plan_windows: image must be at least 1x1");
    if (window > std::min(width, height)) {
        throw InvalidArgument("plan_windows: window " + std::to_string(window) + " larger than image " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
    WindowPlan plan{{}, width, height, window, stride};
    auto const xs = axis_offsets(width, window, stride);
    auto const ys = axis_offsets(height, window, stride);
    for (int y : ys)
        for (int x : xs) plan.rects.push_back({x, y, window, window});
    return plan;
}

WindowPlan plan_windows_for_resize(int width, int height, int window, int stride, int long_side) {
    if (long_side < 1) throw InvalidArgument("plan_windows_for_resize: long side must be >= 1");
    double const scale = static_cast<double>(std::max(width, height)) / long_side;
    int const native_window = std::clamp(static_cast<int>(std::lround(window * scale)), 1, std::min(width, height));
    int const native_stride = std::max(1, static_cast<int>(std::lround(stride * scale)));
    return plan_windows(width, height, native_window, native_stride);
}

ProbabilityMap aggregate_windows(std::span<const ProbabilityMap> partials, WindowPlan const& plan) {
    if (partials.size() != plan.rects.size()) {
        throw DimensionError("aggregate_windows: " + std::to_string(partials.size()) + " partial maps for " +
                             std::to_string(plan.rects.size()) + " windows");
    }
    auto const n = static_cast<std::size_t>(plan.image_w) * plan.image_h;
    std::vector<double> sum(n, 0.0);
    std::vector<int> cover(n, 0);
    for (std::size_t k = 0; k < partials.size(); ++k) {
        auto const& r = plan.rects[k];
        auto const& p = partials[k];
        if (p.width() != r.w || p.height() != r.h)
            throw DimensionError("aggregate_windows: partial " + std::to_string(k) + " does not match its window");
        for (int y = 0; y < r.h; ++y) {
            for (int x = 0; x < r.w; ++x) {
                auto const i = static_cast<std::size_t>(r.y + y) * plan.image_w + (r.x + x);
                sum[i] += p.at(x, y);
                ++cover[i];
            }
        }
    }
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (cover[i] == 0) throw DimensionError("aggregate_windows: window plan leaves a pixel uncovered");
        values[i] = static_cast<float>(sum[i] / cover[i]);
    }
    return ProbabilityMap(plan.image_w, plan.image_h, std::move(values));
}

TilePlan plan_tiles(int width, int height, int cap) {
    if (cap < 1) throw InvalidArgument("plan_tiles: tile cap must be >= 1");
    if (width < 1 || height < 1) throw InvalidArgument("plan_tiles: image must be at least 1x1");
    TilePlan plan{{}, width, height, cap};
    for (int y = 0; y < height; y += cap)
        for (int x = 0; x < width; x += cap)
            plan.rects.push_back({x, y, std::min(cap, width - x), std::min(cap, height - y)});
    return plan;
}

std::vector<BinaryMask> split_tiles(BinaryMask const& mask, TilePlan const& plan) {
    if (mask.width() != plan.image_w || mask.height() != plan.image_h)
        throw DimensionError("split_tiles: mask does not match the tile plan");
    std::vector<BinaryMask> tiles;
    tiles.reserve(plan.rects.size());
    for (auto const& r : plan.rects) tiles.push_back(crop(mask, r));
    return tiles;
}

BinaryMask merge_tiles(std::span<const BinaryMask> tile_masks, TilePlan const& plan) {
    if (tile_masks.size() != plan.rects.size()) {
        throw DimensionError("merge_tiles: " + std::to_string(tile_masks.size()) + " masks for " +
                             std::to_string(plan.rects.size()) + " tiles");
    }
    BinaryMask out(plan.image_w, plan.image_h);
    for (std::size_t k = 0; k < tile_masks.size(); ++k) paste(out, tile_masks[k], plan.rects[k]);
    return out;
}

ProbabilityMap resize_nearest(ProbabilityMap const& map, int width, int height) {
    if (map.width() == width && map.height() == height) return map;
    std::vector<float> values(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        int const sy = centre_index(y, map.height(), height);
        for (int x = 0; x < width; ++x)
            values[static_cast<std::size_t>(y) * width + x] = map.at(centre_index(x, map.width(), width), sy);
    }
    return ProbabilityMap(width, height, std::move(values));
}

BinaryMask resize_nearest(BinaryMask const& mask, int width, int height) {
    if (mask.width() == width && mask.height() == height) return mask;
    BinaryMask out(width, height);
    for (int y = 0; y < height; ++y) {
        int const sy = centre_index(y, mask.height(), height);
        for (int x = 0; x < width; ++x)
            if (mask.get(centre_index(x, mask.width(), width), sy)) out.set(x, y);
    }
    return out;
}

} // namespace maskfuse
