#include "maskfuse/pipelines.hpp"

#include "maskfuse/tiling.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace maskfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Per-item outcome before the merge barrier.
struct Outcome {
    bool ok = false;
    bool skipped = false; // reported but not a failure (e.g. empty ground truth)
    std::string error;
    std::string raw_text;
    std::string prediction;
    std::optional<Capability> failed_capability;
};

/// Runs `body(i)` for every index on a bounded pool. Exceptions become failed
/// outcomes; with `fail_fast` the first failure stops new items from starting.
template <class Body>
std::vector<Outcome> run_pool(std::size_t n, int workers, bool fail_fast, Body&& body) {
    std::vector<Outcome> out(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    auto worker = [&] {
        for (;;) {
            auto const i = next.fetch_add(1);
            if (i >= n) return;
            auto& o = out[i];
            if (stop) {
                o.error = "not run: stopped after an earlier failure";
                continue;
            }
            try {
                body(i, o);
                if (o.error.empty() && !o.skipped) o.ok = true;
            } catch (ProviderError const& e) {
                o.error = e.what();
                o.failed_capability = e.capability();
            } catch (std::exception const& e) {
                o.error = e.what();
            }
            if (!o.ok && !o.skipped && fail_fast) stop = true;
        }
    };
    auto const count = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    }
    return out;
}

fs::path out_path(RunConfig const& config, std::string const& sub) {
    auto p = fs::path(config.output_dir) / sub;
    fs::create_directories(p);
    return p;
}

std::string index_name(std::size_t i, char const* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu%s", i, ext);
    return buf;
}

Report base_report(std::string task, RunConfig const& config, Providers const* providers) {
    Report r;
    r.task = std::move(task);
    r.config = config_to_json(config);
    if (providers) r.providers = providers->provenance();
    return r;
}

/// Fills report items and the exit code from per-item outcomes.
RunResult finish(Report report, std::vector<ManifestRecord> const& manifest, std::vector<Outcome> const& outcomes,
                 RunConfig const& config, std::ostream& log) {
    RunResult result;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::map<std::string, std::set<std::string>> by_capability;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto const& o = outcomes[i];
        ItemResult item;
        item.index = i;
        item.image = manifest[i].image.string();
        item.dataset = manifest[i].dataset;
        item.ok = o.ok;
        item.error = o.error;
        item.raw_text = o.raw_text;
        item.prediction = o.prediction;
        report.items.push_back(std::move(item));
        if (o.skipped) {
            ++skipped;
            log << "item " << i << " skipped: " << o.error << '\n';
        } else if (!o.ok) {
            ++failed;
            log << "item " << i << " failed: " << o.error << '\n';
            if (o.failed_capability) by_capability[std::string(to_string(*o.failed_capability))].insert(o.error);
        }
    }
    for (auto const& [cap, errors] : by_capability)
        for (auto const& e : errors) result.diagnostics.push_back(cap + ": " + e);
    report.extra["skipped"] = skipped;

    bool const all_failed = !outcomes.empty() && failed + skipped == outcomes.size() && failed > 0;
    if (failed > 0 && (config.strict || config.fail_fast)) result.exit_code = 1;
    if (all_failed) result.exit_code = 1;
    if (failed > 0) result.diagnostics.push_back(std::to_string(failed) + " of " + std::to_string(outcomes.size()) +
                                                 " items failed");
    log << report.task << ": " << outcomes.size() - failed - skipped << " ok, " << failed << " failed, " << skipped
        << " skipped\n";
    result.report = std::move(report);
    return result;
}

/// Dataset entries in order of first appearance in the manifest.
DatasetResult& dataset_entry(Report& report, std::string const& name, std::vector<std::string> const& classes,
                             int foreground) {
    for (auto& d : report.datasets)
        if (d.name == name) return d;
    DatasetResult d;
    d.name = name;
    d.class_names = classes;
    if (!classes.empty()) d.confusion = ConfusionMatrix(static_cast<int>(classes.size()));
    d.foreground = foreground;
    report.datasets.push_back(std::move(d));
    return report.datasets.back();
}

std::vector<std::string> const kBinaryClasses = {"background", "foreground"};

template <class Clock = std::chrono::steady_clock>
void stamp(Report& report, RunConfig const& config, typename Clock::time_point start) {
    if (config.record_timing) report.wall_clock_s = std::chrono::duration<double>(Clock::now() - start).count();
}

void require(bool cond, std::string const& what) {
    if (!cond) throw InvalidArgument(what);
}

ProbabilityMap fit_map(ProbabilityMap const& map, int w, int h) {
    if (map.width() == w && map.height() == h) return map;
    return resize_nearest(map, w, h);
}

std::vector<ProbabilityMap> class_maps(ProviderMaps const& got, std::size_t classes, int w, int h) {
    if (got.maps.size() != classes)
        throw DimensionError("probability provider returned " + std::to_string(got.maps.size()) + " maps for " +
                             std::to_string(classes) + " classes");
    std::vector<ProbabilityMap> out;
    out.reserve(classes);
    for (auto const& m : got.maps) out.push_back(fit_map(m, w, h));
    return out;
}

void fill_disk(RgbImage& img, int cx, int cy, std::array<std::uint8_t, 3> const& color) {
    for (int dy = -kDotRadius; dy <= kDotRadius; ++dy) {
        for (int dx = -kDotRadius; dx <= kDotRadius; ++dx) {
            if (dx * dx + dy * dy > kDotRadius * kDotRadius) continue;
            int const x = cx + dx, y = cy + dy;
            if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
            std::copy(color.begin(), color.end(), img.at(x, y));
        }
    }
}

} // namespace

json Providers::provenance() const {
    json out = json::object();
    if (probability) out[std::string(to_string(Capability::ProbabilityMap))] = probability->provenance();
    if (proposals) out[std::string(to_string(Capability::MaskProposals))] = proposals->provenance();
    if (segmenter) out[std::string(to_string(Capability::PromptableSegment))] = segmenter->provenance();
    if (suggester) out[std::string(to_string(Capability::ClickSuggest))] = suggester->provenance();
    return out;
}

Providers make_providers(RunConfig const& config) {
    Providers p;
    p.probability = make_probability_provider(config.probability, config.oracle);
    p.proposals = make_proposal_provider(config.proposals, config.oracle);
    p.segmenter = make_segmenter(config.segment, config.oracle);
    p.suggester = make_click_suggester(config.clicks, config.oracle);
    return p;
}

LabelMap segment_ovss(RgbImage const& image, ClassPrompts const& prompts, Providers& providers,
                      RunConfig const& config) {
    int const w = image.width, h = image.height;
    auto const& names = prompts.names();

    std::vector<ProbabilityMap> maps;
    if (config.window <= 0) {
        maps = class_maps(providers.probability->probability_maps(image, names, config.clip_long_side), names.size(),
                          w, h);
    } else {
        auto const plan = plan_windows_for_resize(w, h, config.window, config.stride, config.clip_long_side);
        std::vector<std::vector<ProbabilityMap>> partials(names.size());
        for (auto const& r : plan.rects) {
            auto got = class_maps(providers.probability->probability_maps(image.crop(r), names, config.window),
                                  names.size(), r.w, r.h);
            for (std::size_t c = 0; c < names.size(); ++c) partials[c].push_back(std::move(got[c]));
        }
        for (auto const& p : partials) maps.push_back(aggregate_windows(p, plan));
    }
    auto const labels = pixel_argmax(maps, prompts);

    ProposalSet proposals;
    proposals.source_grid = config.grid_n;
    auto const tiles = plan_tiles(w, h, config.tile_cap);
    for (auto const& r : tiles.rects) {
        for (auto const& m : providers.proposals->propose(image.crop(r), config.grid_n)) {
            if (m.width() != r.w || m.height() != r.h)
                throw DimensionError("mask proposal does not match its tile size");
            if (tiles.rects.size() == 1) {
                proposals.proposals.push_back(m);
                continue;
            }
            BinaryMask full(w, h);
            paste(full, m, r);
            proposals.proposals.push_back(std::move(full));
        }
    }
    return compose_multiclass(proposals, labels, prompts, config.uncovered);
}

BinaryMask segment_with_clicks(RgbImage const& image, ClickSet const& clicks, PromptableSegmenter& segmenter,
                               int tile_cap) {
    auto check = [](BinaryMask m, int w, int h) {
        if (m.width() != w || m.height() != h) throw DimensionError("segmenter returned a mask of the wrong size");
        return m;
    };
    if (image.width <= tile_cap && image.height <= tile_cap)
        return check(segmenter.segment(image, clicks), image.width, image.height);

    auto const plan = plan_tiles(image.width, image.height, tile_cap);
    std::vector<BinaryMask> parts;
    for (auto const& r : plan.rects) {
        ClickSet local;
        for (auto const* list : {&clicks.positives, &clicks.negatives})
            for (auto const& c : *list)
                if (r.contains(c.x, c.y)) local.add({c.x - r.x, c.y - r.y, c.polarity});
        if (local.positives.empty())
            parts.emplace_back(r.w, r.h);
        else
            parts.push_back(check(segmenter.segment(image.crop(r), local), r.w, r.h));
    }
    return merge_tiles(parts, plan);
}

RunResult run_ovss(RunConfig const& config, std::vector<ManifestRecord> const& manifest, Providers& providers,
                   std::ostream& log) {
    auto const start = std::chrono::steady_clock::now();
    struct Item {
        std::vector<std::string> classes;
        std::optional<ConfusionMatrix> cm;
    };
    std::vector<Item> items(manifest.size());
    auto const pred_dir = manifest.empty() ? fs::path() : out_path(config, "pred");

    auto outcomes = run_pool(manifest.size(), config.workers, config.fail_fast, [&](std::size_t i, Outcome& o) {
        auto const& rec = manifest[i];
        require(rec.task == Task::Ovss, "record is not an ovss record");
        require(rec.classes.has_value(), "ovss record has no class list");
        auto const prompts = ClassPrompts::load(*rec.classes);
        auto const image = read_rgb_png(rec.image);
        auto const gt = read_label_png(rec.gt_mask, prompts.size(), prompts.background_index());
        if (gt.width() != image.width || gt.height() != image.height)
            throw DimensionError("ground truth and image sizes differ");
        auto const pred = segment_ovss(image, prompts, providers, config);
        auto const path = pred_dir / index_name(i, ".png");
        write_label_png(path, pred);
        o.prediction = path.string();
        items[i] = {prompts.names(), accumulate(ConfusionMatrix(prompts.size()), gt, pred)};
    });

    auto report = base_report("ovss", config, &providers);
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        auto& d = dataset_entry(report, manifest[i].dataset, items[i].classes, -1);
        ++d.items;
        if (!outcomes[i].ok) {
            ++d.failed;
            continue;
        }
        if (d.class_names.empty()) {
            d.class_names = items[i].classes;
            d.confusion = *items[i].cm;
            continue;
        }
        if (d.class_names != items[i].classes) {
            outcomes[i].ok = false;
            outcomes[i].error = "class list differs from the rest of dataset '" + d.name + "'";
            ++d.failed;
            continue;
        }
        d.confusion += *items[i].cm;
    }
    stamp(report, config, start);
    return finish(std::move(report), manifest, outcomes, config, log);
}

RunResult run_refer(RunConfig const& config, std::vector<ManifestRecord> const& manifest, Providers& providers,
                    std::ostream& log) {
    auto const start = std::chrono::steady_clock::now();
    struct Item {
        BinaryMask gt;
        BinaryMask pred;
    };
    std::vector<Item> items(manifest.size());
    auto const pred_dir = manifest.empty() ? fs::path() : out_path(config, "pred");
    ClickParseOptions const parse{config.strict, static_cast<std::size_t>(config.clicks_max)};

    auto outcomes = run_pool(manifest.size(), config.workers, config.fail_fast, [&](std::size_t i, Outcome& o) {
        auto const& rec = manifest[i];
        require(rec.task == Task::Refer || rec.task == Task::Reason, "record is not a refer/reason record");
        require(rec.question.has_value(), "record has no question");
        auto const image = read_rgb_png(rec.image);
        auto gt = read_mask_png(rec.gt_mask);
        if (gt.width() != image.width || gt.height() != image.height)
            throw DimensionError("ground truth and image sizes differ");
        auto const raw = providers.suggester->suggest(image, *rec.question, config.clicks_max);
        ClickSet clicks;
        try {
            clicks = parse_clicks_any(raw, parse);
        } catch (Error const& e) {
            o.error = std::string("click answer rejected: ") + e.what();
            o.raw_text = raw;
            std::ofstream(out_path(config, "failed") / index_name(i, ".txt"), std::ios::binary) << raw;
            return;
        }
        auto pred = segment_with_clicks(image, clicks, *providers.segmenter, config.tile_cap);
        auto const path = pred_dir / index_name(i, ".png");
        write_mask_png(path, pred);
        o.prediction = path.string();
        items[i] = {std::move(gt), std::move(pred)};
    });

    auto report = base_report("refer", config, &providers);
    // Grouped items vote once per group; the vote is scored against the first member's ground truth.
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    std::vector<std::pair<std::string, std::string>> group_order;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        auto& d = dataset_entry(report, manifest[i].dataset, kBinaryClasses, 1);
        ++d.items;
        if (!outcomes[i].ok) {
            ++d.failed;
            continue;
        }
        if (manifest[i].group) {
            auto key = std::make_pair(manifest[i].dataset, *manifest[i].group);
            auto [it, inserted] = groups.try_emplace(key);
            if (inserted) group_order.push_back(key);
            it->second.push_back(i);
            continue;
        }
        d.confusion = accumulate(d.confusion, items[i].gt, items[i].pred);
    }

    json group_json = json::array();
    for (auto const& key : group_order) {
        auto const& members = groups[key];
        auto& d = dataset_entry(report, key.first, kBinaryClasses, 1);
        std::vector<BinaryMask> preds;
        bool sizes_match = true;
        for (auto i : members) {
            sizes_match = sizes_match && items[i].pred.same_shape(items[members.front()].pred);
            preds.push_back(items[i].pred);
        }
        if (!sizes_match) {
            for (auto i : members) {
                outcomes[i].ok = false;
                outcomes[i].error = "group '" + key.second + "' mixes image sizes";
                ++d.failed;
            }
            continue;
        }
        auto const voted = ensemble_vote(preds, config.vote_ge);
        auto const path = out_path(config, "pred") / ("group_" + key.first + "_" + key.second + ".png");
        write_mask_png(path, voted);
        d.confusion = accumulate(d.confusion, items[members.front()].gt, voted);
        group_json.push_back({{"dataset", key.first},
                              {"group", key.second},
                              {"members", members},
                              {"prediction", path.string()}});
    }
    report.extra["groups"] = group_json;
    stamp(report, config, start);
    return finish(std::move(report), manifest, outcomes, config, log);
}

RunResult run_clickgen(RunConfig const& config, std::vector<ManifestRecord> const& manifest, Providers& providers,
                       std::ostream& log) {
    auto const start = std::chrono::steady_clock::now();
    std::vector<std::optional<ClickSequence>> sequences(manifest.size());
    ClickGenOptions const options{config.T, config.tau, config.mode};

    auto outcomes = run_pool(manifest.size(), config.workers, config.fail_fast, [&](std::size_t i, Outcome& o) {
        auto const& rec = manifest[i];
        auto const gt = read_mask_png(rec.gt_mask);
        if (gt.empty()) {
            o.skipped = true;
            o.error = "empty ground-truth mask";
            return;
        }
        auto const image = read_rgb_png(rec.image);
        if (gt.width() != image.width || gt.height() != image.height)
            throw DimensionError("ground truth and image sizes differ");
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(i)};
        Rng rng(seq);
        auto segment = [&](ClickSet const& c) {
            return segment_with_clicks(image, c, *providers.segmenter, config.tile_cap);
        };
        sequences[i] = generate_click_sequence(gt, segment, options, rng);
    });

    auto const dir = out_path(config, "");
    std::ofstream clicks_out(dir / "clicks.jsonl", std::ios::binary);
    std::ofstream traces_out(dir / "traces.jsonl", std::ios::binary);
    if (!clicks_out || !traces_out) throw IoError("cannot write click exports under " + dir.string());
    auto pairs = [](std::vector<Click> const& cs) {
        json a = json::array();
        for (auto const& c : cs) a.push_back({c.x, c.y});
        return a;
    };
    double clicks_sum = 0, iou_sum = 0;
    std::size_t done = 0;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (!sequences[i]) continue;
        auto const& s = *sequences[i];
        auto const& rec = manifest[i];
        json line = {{"image", rec.image.string()},
                     {"prompt", rec.question.value_or("")},
                     {"clicks", {{"positive", pairs(s.clicks.positives)}, {"negative", pairs(s.clicks.negatives)}}},
                     {"final_iou", round4(s.trace.final_iou)},
                     {"steps", s.trace.steps.size()}};
        clicks_out << line.dump() << '\n';

        json steps = json::array();
        for (auto const& st : s.trace.steps)
            steps.push_back({{"x", st.click.x},
                             {"y", st.click.y},
                             {"polarity", st.click.polarity == Polarity::Positive ? "positive" : "negative"},
                             {"iou", round4(st.iou_after)}});
        json trace = {{"index", i},
                      {"image", rec.image.string()},
                      {"gt_mask", rec.gt_mask.string()},
                      {"steps", steps},
                      {"final_iou", round4(s.trace.final_iou)},
                      {"terminated_by", s.trace.terminated_by == Termination::Threshold ? "threshold" : "budget"}};
        traces_out << trace.dump() << '\n';
        clicks_sum += static_cast<double>(s.trace.steps.size());
        iou_sum += s.trace.final_iou;
        ++done;
    }

    auto report = base_report("clickgen", config, &providers);
    report.extra["mean_clicks"] = done ? json(round4(clicks_sum / done)) : json(nullptr);
    report.extra["mean_final_iou"] = done ? json(round4(iou_sum / done)) : json(nullptr);
    report.extra["exports"] = {{"clicks", (dir / "clicks.jsonl").string()}, {"traces", (dir / "traces.jsonl").string()}};
    stamp(report, config, start);
    return finish(std::move(report), manifest, outcomes, config, log);
}

RunResult run_eval(RunConfig const& config, std::vector<ManifestRecord> const& manifest, std::ostream& log) {
    auto const start = std::chrono::steady_clock::now();
    struct Item {
        std::vector<std::string> classes;
        std::optional<ConfusionMatrix> cm;
        int foreground = -1;
    };
    std::vector<Item> items(manifest.size());
    auto outcomes = run_pool(manifest.size(), config.workers, config.fail_fast, [&](std::size_t i, Outcome& o) {
        auto const& rec = manifest[i];
        require(rec.prediction.has_value(), "record has no prediction");
        o.prediction = rec.prediction->string();
        if (rec.task == Task::Ovss) {
            require(rec.classes.has_value(), "ovss record has no class list");
            auto const prompts = ClassPrompts::load(*rec.classes);
            auto const gt = read_label_png(rec.gt_mask, prompts.size(), prompts.background_index());
            auto const pred = read_label_png(*rec.prediction, prompts.size(), prompts.background_index());
            items[i] = {prompts.names(), accumulate(ConfusionMatrix(prompts.size()), gt, pred), -1};
        } else {
            auto const gt = read_mask_png(rec.gt_mask);
            auto const pred = read_mask_png(*rec.prediction);
            items[i] = {kBinaryClasses, accumulate(ConfusionMatrix(2), gt, pred), 1};
        }
    });

    auto report = base_report("eval", config, nullptr);
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        auto const& it = items[i];
        auto& d = dataset_entry(report, manifest[i].dataset, it.classes, it.foreground);
        ++d.items;
        if (!outcomes[i].ok) {
            ++d.failed;
            continue;
        }
        if (d.class_names.empty()) {
            d.class_names = it.classes;
            d.confusion = *it.cm;
            d.foreground = it.foreground;
            continue;
        }
        if (d.class_names != it.classes || d.foreground != it.foreground) {
            outcomes[i].ok = false;
            outcomes[i].error = "class list differs from the rest of dataset '" + d.name + "'";
            ++d.failed;
            continue;
        }
        d.confusion += *it.cm;
    }
    stamp(report, config, start);
    return finish(std::move(report), manifest, outcomes, config, log);
}

void save_report(RunConfig const& config, RunResult const& result) {
    auto const dir = out_path(config, "");
    write_report(dir / "report.json", result.report);
    if (!result.report.datasets.empty()) write_class_csv(dir / "class_iou.csv", result.report);
}

RgbImage render_overlay(RgbImage const& image, BinaryMask const* mask, ClickSet const& clicks) {
    RgbImage out = image;
    if (mask) {
        if (mask->width() != image.width || mask->height() != image.height)
            throw DimensionError("overlay mask and image sizes differ");
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                if (!mask->get(x, y)) continue;
                auto* p = out.at(x, y);
                for (int c = 0; c < 3; ++c) p[c] = static_cast<std::uint8_t>((p[c] + kTintColor[c]) / 2);
            }
        }
    }
    for (auto const& c : clicks.positives) fill_disk(out, c.x, c.y, kPositiveColor);
    for (auto const& c : clicks.negatives) fill_disk(out, c.x, c.y, kNegativeColor);
    return out;
}

std::vector<fs::path> run_viz(RunConfig const& config, fs::path const& input, Providers& providers,
                              std::ostream& log) {
    std::ifstream in(input);
    if (!in) throw IoError("cannot open " + input.string());
    auto const dir = out_path(config, "viz");
    std::vector<fs::path> written;

    if (input.extension() == ".jsonl") {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto const doc = json::parse(line, nullptr, false);
            if (doc.is_discarded() || !doc.contains("image") || !doc.contains("steps"))
                throw IoError(input.string() + " line " + std::to_string(line_no) + ": not a trace record");
            auto const image = read_rgb_png(doc["image"].get<std::string>());
            auto const index = doc.value("index", line_no - 1);
            ClickSet clicks;
            std::size_t step = 0;
            for (auto const& s : doc["steps"]) {
                ++step;
                auto const pol = s.at("polarity").get<std::string>() == "negative" ? Polarity::Negative
                                                                                   : Polarity::Positive;
                clicks.add({s.at("x").get<int>(), s.at("y").get<int>(), pol});
                auto const mask = segment_with_clicks(image, clicks, *providers.segmenter, config.tile_cap);
                char name[64];
                std::snprintf(name, sizeof name, "%06zu_step%02zu.png", static_cast<std::size_t>(index), step);
                write_rgb_png(dir / name, render_overlay(image, &mask, clicks));
                written.push_back(dir / name);
            }
        }
    } else {
        auto const doc = json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.contains("items")) throw IoError(input.string() + ": not a report");
        for (auto const& item : doc["items"]) {
            if (!item.contains("prediction")) continue;
            auto const image = read_rgb_png(item.at("image").get<std::string>());
            auto const mask = read_mask_png(item["prediction"].get<std::string>());
            auto const path = dir / index_name(item.at("index").get<std::size_t>(), ".png");
            write_rgb_png(path, render_overlay(image, &mask, {}));
            written.push_back(path);
        }
    }
    log << "viz: wrote " << written.size() << " overlays to " << dir.string() << '\n';
    return written;
}

} // namespace maskfuse
