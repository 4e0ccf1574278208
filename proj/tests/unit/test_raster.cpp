#include "maskfuse/errors.hpp"
#include "maskfuse/raster.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace maskfuse;

namespace {

BinaryMask left_half(int w, int h) { return BinaryMask::filled(w, h, {0, 0, w / 2, h}); }
BinaryMask top_half(int w, int h) { return BinaryMask::filled(w, h, {0, 0, w, h / 2}); }

} // namespace

TEST_CASE("mask construction") {
    CHECK_THROWS_AS(BinaryMask(0, 3), InvalidArgument);
    CHECK_THROWS_AS(BinaryMask(3, -1), InvalidArgument);

    BinaryMask m(70, 3); // spans word boundaries
    CHECK(m.empty());
    m.set(69, 2);
    m.set(64, 0);
    CHECK(m.count() == 2);
    CHECK(m.get(69, 2));
    CHECK_FALSE(m.get(68, 2));
    m.set(69, 2, false);
    CHECK(m.count() == 1);

    std::vector<std::uint8_t> bytes = {0, 7, 0, 255};
    auto const b = BinaryMask::from_bytes(2, 2, bytes);
    CHECK(b.to_bytes(255) == std::vector<std::uint8_t>{0, 255, 0, 255});
    CHECK_THROWS_AS(BinaryMask::from_bytes(3, 2, bytes), DimensionError);
}

TEST_CASE("union") {
    auto const a = left_half(4, 4);
    BinaryMask const one[] = {a};
    CHECK(mask_union(one) == a);

    BinaryMask const halves[] = {left_half(4, 4), BinaryMask::filled(4, 4, {2, 0, 2, 4})};
    CHECK(mask_union(halves).count() == 16);

    CHECK_THROWS_AS(mask_union(std::span<const BinaryMask>{}), InvalidArgument);
    BinaryMask const mismatched[] = {BinaryMask(4, 4), BinaryMask(4, 5)};
    CHECK_THROWS_AS(mask_union(mismatched), DimensionError);

    std::mt19937_64 rng(11);
    std::vector<BinaryMask> many;
    for (int i = 0; i < 100; ++i) many.push_back(oracle::random_mask(rng, 16, 16, 0.03));
    auto const merged = mask_union(many);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            bool any = false;
            for (auto const& m : many) any = any || m.get(x, y);
            CHECK(merged.get(x, y) == any);
        }
    }

    // associative and idempotent
    BinaryMask const ab[] = {many[0], many[1]};
    BinaryMask const ab_c[] = {mask_union(ab), many[2]};
    BinaryMask const bc[] = {many[1], many[2]};
    BinaryMask const a_bc[] = {many[0], mask_union(bc)};
    CHECK(mask_union(ab_c) == mask_union(a_bc));
    BinaryMask const aa[] = {many[3], many[3]};
    CHECK(mask_union(aa) == many[3]);
}

TEST_CASE("difference and intersection") {
    std::mt19937_64 rng(12);
    auto const a = oracle::random_mask(rng, 13, 9, 0.5);
    auto const b = oracle::random_mask(rng, 13, 9, 0.5);
    CHECK(mask_difference(a, a).empty());

    BinaryMask full = BinaryMask::filled(5, 5, {0, 0, 5, 5});
    CHECK(mask_difference(full, BinaryMask(5, 5)) == full);

    auto const d = mask_difference(a, b);
    auto const i = mask_intersection(a, b);
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 13; ++x) {
            CHECK(d.get(x, y) == (a.get(x, y) && !b.get(x, y)));
            CHECK(i.get(x, y) == (a.get(x, y) && b.get(x, y)));
        }
    }
    CHECK(i.count() + d.count() == a.count());
    CHECK_THROWS_AS(mask_difference(a, BinaryMask(9, 13)), DimensionError);
}

TEST_CASE("iou") {
    auto const a = left_half(4, 4);
    auto const b = top_half(4, 4);
    CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, BinaryMask::filled(4, 4, {2, 0, 2, 4})) == 0.0);
    CHECK(iou(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);
    CHECK_THROWS_AS(iou(a, BinaryMask(4, 3)), DimensionError);

    std::mt19937_64 rng(13);
    for (int k = 0; k < 50; ++k) {
        auto const p = oracle::random_mask(rng, 10, 7, 0.4);
        auto const q = oracle::random_mask(rng, 10, 7, 0.4);
        CHECK(iou(p, q) == iou(q, p));
        CHECK(std::abs(iou(p, q) - oracle::iou(oracle::bytes_of(p), oracle::bytes_of(q))) < 1e-15);
    }
}

TEST_CASE("distance transform") {
    auto const empty = distance_transform(BinaryMask(3, 3));
    for (auto v : empty.squared_values()) CHECK(v == 0);

    BinaryMask centre(3, 3);
    centre.set(1, 1);
    auto const c = distance_transform(centre);
    CHECK(c.squared(1, 1) == 1);
    CHECK(c.at(1, 1) == 1.0);
    CHECK(c.squared(0, 0) == 0);

    auto const full = distance_transform(BinaryMask::filled(3, 3, {0, 0, 3, 3}));
    CHECK(full.squared(1, 1) == 4);
    CHECK(full.at(1, 1) == 2.0);
    CHECK(full.squared(0, 0) == 1);
    CHECK(full.squared(1, 0) == 1);

    // A single row: the frame bounds distances from above and below.
    auto const row = distance_transform(BinaryMask::filled(9, 1, {0, 0, 9, 1}));
    for (int x = 0; x < 9; ++x) CHECK(row.squared(x, 0) == 1);

    // Diagonal neighbours do not count as axis distance: 5x5 block centre is 3 from the frame.
    auto const block = distance_transform(BinaryMask::filled(5, 5, {0, 0, 5, 5}));
    CHECK(block.squared(2, 2) == 9);
}

TEST_CASE("distance transform matches brute force") {
    std::mt19937_64 rng(14);
    for (int k = 0; k < 200; ++k) {
        int const w = 1 + static_cast<int>(rng() % 12);
        int const h = 1 + static_cast<int>(rng() % 12);
        auto const m = k % 2 ? oracle::random_mask(rng, w, h, 0.3 + 0.6 * (k % 7) / 7.0)
                             : oracle::random_blobs(rng, w, h, 2);
        auto const field = distance_transform(m);
        auto const expect = oracle::edt_squared(oracle::bytes_of(m), w, h);
        REQUIRE(field.squared_values().size() == expect.size());
        CHECK(std::equal(expect.begin(), expect.end(), field.squared_values().begin()));
    }

    // Wide rasters cross word boundaries in the packed storage.
    auto const wide = oracle::random_blobs(rng, 150, 6, 3);
    auto const expect = oracle::edt_squared(oracle::bytes_of(wide), 150, 6);
    auto const field = distance_transform(wide);
    auto const got = field.squared_values();
    CHECK(std::equal(expect.begin(), expect.end(), got.begin()));
}

TEST_CASE("fraction above") {
    auto const full = BinaryMask::filled(4, 4, {0, 0, 4, 4});
    CHECK(fraction_above(full, ProbabilityMap(4, 4, 0.9f), 0.5) == 1.0);
    CHECK(fraction_above(full, ProbabilityMap(4, 4, 0.1f), 0.5) == 0.0);
    CHECK(fraction_above(full, ProbabilityMap(4, 4, 0.5f), 0.5) == 0.0); // strict

    ProbabilityMap split(4, 4, 0.1f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 2; ++x) split.set(x, y, 0.9f);
    CHECK(fraction_above(full, split, 0.5) == 0.5);

    CHECK_THROWS_AS(fraction_above(BinaryMask(4, 4), split, 0.5), InvalidArgument);
    CHECK_THROWS_AS(fraction_above(BinaryMask(4, 5), split, 0.5), DimensionError);

    // Invariant under a strictly increasing transform of map and threshold.
    std::mt19937_64 rng(15);
    for (int k = 0; k < 30; ++k) {
        auto const m = oracle::random_mask(rng, 8, 8, 0.6);
        if (m.empty()) continue;
        auto const v = oracle::random_prob(rng, 64);
        std::vector<float> sq(v.size());
        std::transform(v.begin(), v.end(), sq.begin(), [](float x) { return x * x; });
        CHECK(fraction_above(m, ProbabilityMap(8, 8, v), 0.5) ==
              fraction_above(m, ProbabilityMap(8, 8, sq), 0.25));
    }
}

TEST_CASE("probability and label maps validate their values") {
    CHECK_THROWS_AS(ProbabilityMap(1, 2, std::vector<float>{0.2f, 1.5f}), InvalidArgument);
    CHECK_THROWS_AS(ProbabilityMap(1, 1, std::vector<float>{std::nanf("")}), InvalidArgument);
    CHECK_THROWS_AS(ProbabilityMap(2, 2, std::vector<float>{0.2f}), DimensionError);
    ProbabilityMap p(2, 2);
    CHECK_THROWS_AS(p.set(0, 0, -0.1f), InvalidArgument);

    CHECK_THROWS_AS(LabelMap(2, 1, 2, 0, {0, 2}), InvalidArgument);
    CHECK_THROWS_AS(LabelMap(2, 1, 2, 3), InvalidArgument);
    LabelMap l(3, 1, 3, 0, {0, 2, 2});
    CHECK(l.mask_of(2).count() == 2);
    CHECK_THROWS_AS(l.set(0, 0, 3), InvalidArgument);
}

TEST_CASE("components, erosion, crop and paste") {
    BinaryMask m(6, 4);
    for (int x = 0; x < 3; ++x) m.set(x, 0);
    m.set(4, 2);
    m.set(5, 3); // diagonal to (4,2): separate under 4-connectivity
    auto const comps = connected_components(m);
    CHECK(comps.count == 3);
    CHECK(comps.labels[0] == 1);
    CHECK(comps.labels[2 * 6 + 4] == 2);
    CHECK(comps.labels[3 * 6 + 5] == 3);

    std::mt19937_64 rng(16);
    for (int k = 0; k < 40; ++k) {
        auto const r = oracle::random_mask(rng, 9, 9, 0.45);
        CHECK(connected_components(r).count == oracle::component_count(oracle::bytes_of(r), 9, 9));
    }

    auto const eroded = erode(BinaryMask::filled(5, 5, {0, 0, 5, 5}));
    CHECK(eroded == BinaryMask::filled(5, 5, {1, 1, 3, 3}));

    auto const src = oracle::random_mask(rng, 20, 11, 0.5);
    Rect const r{3, 2, 9, 7};
    auto const tile = crop(src, r);
    CHECK(tile.width() == 9);
    CHECK(tile.get(0, 0) == src.get(3, 2));
    BinaryMask back(20, 11);
    paste(back, tile, r);
    CHECK(mask_intersection(back, BinaryMask::filled(20, 11, r)) == back);
    CHECK(crop(back, r) == tile);
    CHECK_THROWS_AS(crop(src, {15, 0, 9, 2}), DimensionError);
}
