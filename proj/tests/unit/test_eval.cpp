#include "maskfuse/eval.hpp"

#include "../support/corpus.hpp"
#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace maskfuse;

TEST_CASE("accumulate") {
    LabelMap gt(2, 1, 2, 0, {0, 1});
    LabelMap pred(2, 1, 2, 0, {1, 1});
    ConfusionMatrix const zero(2);
    auto const cm = accumulate(zero, gt, pred);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.at(0, 0) == 0);
    CHECK(cm.at(1, 0) == 0);
    CHECK(zero.total() == 0); // input untouched

    auto const diag = accumulate(zero, gt, gt);
    CHECK(diag.at(0, 0) == 1);
    CHECK(diag.at(1, 1) == 1);
    CHECK(diag.total() == 2);

    CHECK_THROWS_AS(accumulate(zero, gt, LabelMap(1, 2, 2, 0)), DimensionError);
    CHECK_THROWS_AS(accumulate(ConfusionMatrix(3), gt, pred), DimensionError);
    CHECK_THROWS_AS(ConfusionMatrix(0), InvalidArgument);

    // Batches: order-independent, equal to the concatenated image.
    LabelMap g2(2, 1, 2, 0, {1, 0});
    LabelMap p2(2, 1, 2, 0, {1, 0});
    LabelMap gcat(4, 1, 2, 0, {0, 1, 1, 0});
    LabelMap pcat(4, 1, 2, 0, {1, 1, 1, 0});
    auto const ab = accumulate(accumulate(zero, gt, pred), g2, p2);
    auto const ba = accumulate(accumulate(zero, g2, p2), gt, pred);
    CHECK(ab == ba);
    CHECK(ab == accumulate(zero, gcat, pcat));
    CHECK(accumulate(zero, gt, pred) + accumulate(zero, g2, p2) == ab);
}

TEST_CASE("miou and fg_iou") {
    ConfusionMatrix perfect(3);
    perfect.add(0, 0, 5);
    perfect.add(2, 2, 7);
    CHECK(miou(perfect) == 1.0);
    CHECK(std::isnan(class_iou(perfect)[1])); // absent class, excluded

    ConfusionMatrix off(2);
    off.add(0, 1, 3);
    off.add(1, 0, 2);
    CHECK(miou(off) == 0.0);

    ConfusionMatrix bin(2);
    bin.add(1, 1, 4); // TP
    bin.add(0, 1, 2); // FP
    bin.add(1, 0, 2); // FN
    bin.add(0, 0, 10);
    CHECK(fg_iou(bin, 1) == 0.5);
    CHECK(class_iou(bin)[0] == doctest::Approx(10.0 / 14.0));
    CHECK(miou(bin) == doctest::Approx((0.5 + 10.0 / 14.0) / 2));
    CHECK_THROWS_AS(fg_iou(bin, 2), InvalidArgument);
    CHECK_THROWS_AS(fg_iou(bin, -1), InvalidArgument);

    CHECK(std::isnan(miou(ConfusionMatrix(2))));
    CHECK(fg_iou(ConfusionMatrix(2), 1) == 1.0);
}

TEST_CASE("fg_iou agrees with mask iou") {
    std::mt19937_64 rng(71);
    for (int k = 0; k < 200; ++k) {
        int const w = 1 + static_cast<int>(rng() % 20), h = 1 + static_cast<int>(rng() % 20);
        auto const a = oracle::random_mask(rng, w, h, (k % 10) / 10.0);
        auto const b = oracle::random_mask(rng, w, h, (k % 7) / 7.0);
        auto const cm = accumulate(ConfusionMatrix(2), a, b);
        CHECK(std::abs(fg_iou(cm, 1) - iou(a, b)) <= 1e-12);
        CHECK(std::abs(fg_iou(cm, 1) - oracle::iou(oracle::bytes_of(a), oracle::bytes_of(b))) <= 1e-12);
    }
}

TEST_CASE("manifest parsing") {
    CHECK(parse_manifest("", "/data", "x").empty());
    CHECK(parse_manifest("\n  \n", "/data", "x").empty());

    auto const recs = parse_manifest(
        R"({"image": "a.png", "gt_mask": "a_gt.png", "task": "ovss", "classes": "c.txt"}
{"image": "/abs/b.png", "gt_mask": "b.png", "task": "refer", "question": "the lake", "group": "g1", "dataset": "lakes"}
)",
        "/data", "default");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].image == "/data/a.png");
    CHECK(recs[0].classes == std::filesystem::path("/data/c.txt"));
    CHECK(recs[0].dataset == "default");
    CHECK(recs[1].image == "/abs/b.png");
    CHECK(recs[1].task == Task::Refer);
    CHECK(recs[1].question == "the lake");
    CHECK(recs[1].group == "g1");
    CHECK(recs[1].dataset == "lakes");

    auto line_of = [](std::string const& text) -> std::size_t {
        try {
            parse_manifest(text, "/", "d");
        } catch (ManifestError const& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("{\"image\": \"a\", \"gt_mask\": \"b\", \"task\": \"ovss\", \"classes\": \"c\"}\n"
                  "{\"image\": \"a\", \"task\": \"ovss\", \"classes\": \"c\"}\n") == 2);
    CHECK(line_of("not json\n") == 1);
    CHECK(line_of("{\"image\": \"a\", \"gt_mask\": \"b\", \"task\": \"ovss\"}") == 1);
    CHECK(line_of("{\"image\": \"a\", \"gt_mask\": \"b\", \"task\": \"refer\"}") == 1);
    CHECK(line_of("{\"image\": \"a\", \"gt_mask\": \"b\", \"task\": \"draw\"}") == 1);

    // Missing files surface at first use, not at load.
    auto const dir = corpus::scratch("manifest");
    corpus::write_text(dir / "set.jsonl", R"({"image": "nope.png", "gt_mask": "nope.png", "task": "refer", "question": "q"})");
    auto const loaded = load_manifest(dir / "set.jsonl");
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].dataset == "set");
    CHECK(loaded[0].image == dir / "nope.png");
    CHECK_THROWS(load_manifest(dir / "absent.jsonl"));
}

TEST_CASE("report round trip") {
    Report r;
    r.task = "ovss";
    r.config = {{"grid_n", 29}};
    r.providers = {{"probability-map", "oracle"}};
    DatasetResult d;
    d.name = "scenes";
    d.class_names = {"background", "road", "water"};
    d.confusion = ConfusionMatrix(3);
    d.confusion.add(0, 0, 10);
    d.confusion.add(1, 1, 2);
    d.confusion.add(1, 0, 1);
    d.items = 2;
    r.datasets.push_back(d);
    r.items.push_back({0, "a.png", "scenes", true, "", "pred/0.png", ""});
    r.items.push_back({1, "b.png", "scenes", false, "backend down", "", ""});
    r.wall_clock_s = 1.234567;

    auto const dir = corpus::scratch("report");
    write_report(dir / "report.json", r);
    auto const back = read_report(dir / "report.json");
    CHECK(back == report_to_json(r));
    auto const& ds = back["datasets"]["scenes"];
    CHECK(ds["miou"].get<double>() == round4(miou(d.confusion)));
    CHECK(ds["per_class"][1]["iou"].get<double>() == round4(2.0 / 3.0));
    CHECK(ds["per_class"][2]["iou"].is_null());
    CHECK(ds["fg_iou"].is_null());
    CHECK(back["wall_clock_s"].get<double>() == 1.2346);
    CHECK(back["failures"].size() == 1);
    CHECK(back["summary"]["failed"] == 1);

    write_class_csv(dir / "class_iou.csv", r);
    CHECK(corpus::read_text(dir / "class_iou.csv") ==
          "dataset,class,iou\nscenes,background,0.9091\nscenes,road,0.6667\nscenes,water,\n");

    // Deterministic: same inputs, same bytes.
    write_report(dir / "again.json", r);
    CHECK(corpus::read_text(dir / "again.json") == corpus::read_text(dir / "report.json"));
    CHECK(round4(0.123449) == 0.1234);
    CHECK(round4(0.12345) == 0.1235);
}
