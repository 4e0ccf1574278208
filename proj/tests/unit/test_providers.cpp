#include "maskfuse/providers.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <set>

using namespace maskfuse;

namespace {

SceneShape rect_shape(Label cls, Rect r) {
    SceneShape s;
    s.cls = cls;
    s.kind = SceneShape::Kind::Rect;
    s.rect = r;
    return s;
}

SceneShape disk_shape(Label cls, int cx, int cy, int radius) {
    SceneShape s;
    s.cls = cls;
    s.kind = SceneShape::Kind::Disk;
    s.cx = cx;
    s.cy = cy;
    s.radius = radius;
    return s;
}

} // namespace

TEST_CASE("palette is injective and decodes back") {
    std::set<std::array<std::uint8_t, 3>> seen;
    for (int l = 0; l < kPaletteSize; ++l) seen.insert(palette_color(static_cast<Label>(l)));
    CHECK(seen.size() == static_cast<std::size_t>(kPaletteSize));
    CHECK(palette_color(0) == std::array<std::uint8_t, 3>{0, 0, 0});

    RgbImage img(3, 1);
    auto const c = palette_color(7);
    std::copy(c.begin(), c.end(), img.at(1, 0));
    img.at(2, 0)[0] = 5; // not a palette colour
    auto const labels = decode_palette(img);
    CHECK(labels.at(0, 0) == 0);
    CHECK(labels.at(1, 0) == 7);
    CHECK(labels.at(2, 0) == 0);
}

TEST_CASE("make_scene") {
    SceneSpec spec;
    spec.width = 20;
    spec.height = 20;
    spec.class_count = 2;
    spec.shapes = {disk_shape(1, 10, 10, 4)};
    auto const scene = make_scene(spec);
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) {
            bool const inside = (x - 10) * (x - 10) + (y - 10) * (y - 10) <= 16;
            CHECK(scene.gt.at(x, y) == (inside ? 1 : 0));
            CHECK(scene.maps[1].at(x, y) == (inside ? 1.0f : 0.0f));
            CHECK(scene.maps[0].at(x, y) == (inside ? 0.0f : 1.0f));
        }
    }
    CHECK(scene.proposals.proposals.size() == 1);
    CHECK(scene.proposals.proposals[0] == scene.gt.mask_of(1));
    auto const decoded = decode_palette(scene.image);
    CHECK(std::equal(decoded.labels().begin(), decoded.labels().end(), scene.gt.labels().begin()));

    // Later shapes occlude earlier ones.
    SceneSpec overlap;
    overlap.width = 10;
    overlap.height = 10;
    overlap.class_count = 3;
    overlap.shapes = {rect_shape(1, {0, 0, 6, 6}), rect_shape(2, {3, 3, 6, 6})};
    overlap.distractor_count = 3;
    overlap.seed = 9;
    auto const o = make_scene(overlap);
    CHECK(o.gt.at(4, 4) == 2);
    CHECK(o.gt.at(1, 1) == 1);
    CHECK(o.proposals.proposals[0].count() == 36 - 9);
    CHECK(o.proposals.proposals.size() == 5);
    for (std::size_t k = 2; k < 5; ++k) {
        auto const& d = o.proposals.proposals[k];
        auto const bg = mask_intersection(d, o.gt.mask_of(0)).count();
        CHECK(2 * bg > d.count());
    }

    // Deterministic.
    auto const again = make_scene(overlap);
    CHECK(again.image == o.image);
    CHECK(again.proposals.proposals == o.proposals.proposals);

    // Blur keeps values in range and smooths the edge.
    overlap.noise_radius = 1;
    auto const blurred = make_scene(overlap);
    CHECK(blurred.maps[2].at(3, 3) > 0.0f);
    CHECK(blurred.maps[2].at(3, 3) < 1.0f);

    SceneSpec bad = spec;
    bad.shapes = {rect_shape(1, {15, 15, 10, 10})};
    CHECK_THROWS_AS(make_scene(bad), InvalidArgument);
    bad.shapes = {rect_shape(5, {0, 0, 2, 2})};
    CHECK_THROWS_AS(make_scene(bad), InvalidArgument);
}

TEST_CASE("oracle segmenter") {
    BinaryMask gt(12, 6);
    auto const a = BinaryMask::filled(12, 6, {0, 0, 4, 4});
    auto const b = BinaryMask::filled(12, 6, {6, 1, 5, 5});
    BinaryMask const parts[] = {a, b};
    gt = mask_union(parts);

    ClickSet inside_a;
    inside_a.add({1, 1, Polarity::Positive});
    CHECK(oracle_segment(gt, inside_a, OracleBehavior::Ideal) == a);

    ClickSet a_not_b = inside_a;
    a_not_b.add({8, 3, Polarity::Negative});
    CHECK(oracle_segment(gt, a_not_b, OracleBehavior::Ideal) == a);
    a_not_b.add({7, 2, Polarity::Positive});
    CHECK(oracle_segment(gt, a_not_b, OracleBehavior::Ideal) == a);

    CHECK(oracle_segment(gt, ClickSet{}, OracleBehavior::Ideal).empty());
    ClickSet negative_only;
    negative_only.add({1, 1, Polarity::Negative});
    CHECK(oracle_segment(gt, negative_only, OracleBehavior::Ideal).empty());

    ClickSet outside;
    outside.add({12, 0, Polarity::Positive});
    CHECK_THROWS_AS(oracle_segment(gt, outside, OracleBehavior::Ideal), InvalidArgument);

    // Erode1: interior click erodes, boundary click does not.
    CHECK(oracle_segment(gt, inside_a, OracleBehavior::Erode1) == erode(a));
    ClickSet edge;
    edge.add({0, 0, Polarity::Positive});
    CHECK(oracle_segment(gt, edge, OracleBehavior::Erode1) == a);

    // One interior positive click recovers any single component exactly.
    Rng rng(61);
    for (int k = 0; k < 30; ++k) {
        auto const m = oracle::random_blobs(rng, 16, 16, 1);
        ClickSet c;
        for (int i = 0; i < 256; ++i)
            if (m.test(static_cast<std::size_t>(i))) {
                c.add({i % 16, i / 16, Polarity::Positive});
                break;
            }
        CHECK(iou(oracle_segment(m, c, OracleBehavior::Ideal), m) == 1.0);
    }
}

TEST_CASE("oracle segmenter over label planes separates classes") {
    LabelMap labels(6, 1, 3, 0, {1, 1, 2, 2, 0, 1});
    ClickSet c;
    c.add({0, 0, Polarity::Positive});
    CHECK(oracle_segment(labels, c, OracleBehavior::Ideal).to_bytes() == std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0});
    ClickSet bg;
    bg.add({4, 0, Polarity::Positive});
    CHECK(oracle_segment(labels, bg, OracleBehavior::Ideal).empty());
}

TEST_CASE("oracle providers read the scene from the image") {
    SceneSpec spec;
    spec.width = 30;
    spec.height = 20;
    spec.class_count = 3;
    spec.shapes = {rect_shape(1, {2, 2, 8, 8}), disk_shape(2, 20, 10, 5)};
    auto const scene = make_scene(spec);

    ProviderHandle const handle;
    auto prob = make_probability_provider(handle);
    std::vector<std::string> const classes = {"background", "field", "pond"};
    auto const maps = prob->probability_maps(scene.image, classes, 448);
    REQUIRE(maps.maps.size() == 3);
    for (int c = 0; c < 3; ++c) CHECK(maps.maps[static_cast<std::size_t>(c)] == scene.maps[static_cast<std::size_t>(c)]);

    OracleOptions opts;
    opts.distractors = 4;
    auto proposals = make_proposal_provider(handle, opts);
    auto const props = proposals->propose(scene.image, 29);
    CHECK(props.size() == 2 + 4);
    CHECK(props[0] == scene.gt.mask_of(1));
    CHECK(proposals->propose(scene.image, 29) == props);

    opts.exact_proposals = false;
    CHECK(make_proposal_provider(handle, opts)->propose(scene.image, 29).size() == 4);

    auto seg = make_segmenter(handle);
    ClickSet c;
    c.add({20, 10, Polarity::Positive});
    CHECK(seg->segment(scene.image, c) == scene.gt.mask_of(2));

    auto sugg = make_click_suggester(handle);
    auto const text = sugg->suggest(scene.image, "the pond", 6);
    auto const clicks = parse_clicks_text(text);
    CHECK(clicks.positives.size() == 2);
    CHECK(seg->segment(scene.image, clicks) == mask_union(std::vector{scene.gt.mask_of(1), scene.gt.mask_of(2)}));
    CHECK(parse_clicks_text(sugg->suggest(scene.image, "q", 1)).size() == 1);
    auto greedy = make_click_suggester(handle, OracleOptions{.honor_click_budget = false});
    CHECK(parse_clicks_text(greedy->suggest(scene.image, "q", 1)).size() == 2);
}

TEST_CASE("provider handles") {
    ProviderHandle h;
    CHECK_NOTHROW(h.validate());
    h.endpoint = "http://x";
    CHECK_THROWS_AS(h.validate(), InvalidArgument);
    h.backend = Backend::Http;
    CHECK_NOTHROW(h.validate());
    h.endpoint.clear();
    CHECK_THROWS_AS(h.validate(), InvalidArgument);
    h.endpoint = "http://x";
    h.timeout_s = 0;
    CHECK_THROWS_AS(h.validate(), InvalidArgument);

    for (auto c : {Capability::ProbabilityMap, Capability::MaskProposals, Capability::PromptableSegment,
                   Capability::ClickSuggest})
        CHECK(capability_from_string(to_string(c)) == c);
    CHECK(to_string(Capability::PromptableSegment) == "promptable-segment");
    CHECK(backend_from_string("http") == Backend::Http);
    CHECK_THROWS_AS(backend_from_string("grpc"), InvalidArgument);
}
