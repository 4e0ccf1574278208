#include "maskfuse/clicks.hpp"
#include "maskfuse/config.hpp"
#include "maskfuse/contrastive.hpp"
#include "maskfuse/eval.hpp"
#include "maskfuse/pipelines.hpp"
#include "maskfuse/providers.hpp"
#include "maskfuse/raster.hpp"
#include "maskfuse/tiling.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace maskfuse;

namespace {

using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

void require_2d(py::buffer_info const& b, char const* what) {
    if (b.ndim != 2) throw InvalidArgument(std::string(what) + " must be a 2-D array");
}

BinaryMask to_mask(MaskArray const& a) {
    auto const b = a.request();
    require_2d(b, "mask");
    int const h = static_cast<int>(b.shape[0]), w = static_cast<int>(b.shape[1]);
    return BinaryMask::from_bytes(w, h, {static_cast<std::uint8_t const*>(b.ptr), static_cast<std::size_t>(w) * h});
}

MaskArray from_mask(BinaryMask const& m) {
    MaskArray out({m.height(), m.width()});
    auto const bytes = m.to_bytes();
    std::copy(bytes.begin(), bytes.end(), out.mutable_data());
    return out;
}

ProbabilityMap to_prob(FloatArray const& a) {
    auto const b = a.request();
    require_2d(b, "probability map");
    auto const* p = static_cast<float const*>(b.ptr);
    return {static_cast<int>(b.shape[1]), static_cast<int>(b.shape[0]),
            std::vector<float>(p, p + b.shape[0] * b.shape[1])};
}

using Pairs = std::vector<std::pair<int, int>>;

py::dict clicks_to_dict(ClickSet const& s) {
    Pairs pos, neg;
    for (auto const& c : s.positives) pos.emplace_back(c.x, c.y);
    for (auto const& c : s.negatives) neg.emplace_back(c.x, c.y);
    py::dict d;
    d["positive"] = pos;
    d["negative"] = neg;
    return d;
}

ClickSet clicks_from(Pairs const& positive, Pairs const& negative) {
    ClickSet s;
    for (auto [x, y] : positive) s.add({x, y, Polarity::Positive});
    for (auto [x, y] : negative) s.add({x, y, Polarity::Negative});
    return s;
}

std::vector<std::tuple<int, int, int, int>> rect_tuples(std::vector<Rect> const& rects) {
    std::vector<std::tuple<int, int, int, int>> out;
    for (auto const& r : rects) out.emplace_back(r.x, r.y, r.w, r.h);
    return out;
}

ConfusionMatrix confusion_from(py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> const& a) {
    auto const b = a.request();
    if (b.ndim != 2 || b.shape[0] != b.shape[1]) throw InvalidArgument("confusion matrix must be square");
    int const m = static_cast<int>(b.shape[0]);
    ConfusionMatrix cm(m);
    auto const* p = static_cast<std::uint64_t const*>(b.ptr);
    for (int g = 0; g < m; ++g)
        for (int q = 0; q < m; ++q) cm.add(g, q, p[g * m + q]);
    return cm;
}

/// Runs one subcommand in-process; returns (exit_code, report JSON text, log).
std::tuple<int, std::string, std::string> run_command(std::string const& command, std::string const& manifest,
                                                      std::string const& config_json) {
    auto config = config_from_json(nlohmann::json::parse(config_json));
    validate(config);
    std::ostringstream log;
    RunResult result;
    if (command == "eval") {
        result = run_eval(config, load_manifest(manifest), log);
    } else {
        auto providers = make_providers(config);
        auto const records = load_manifest(manifest);
        if (command == "ovss") result = run_ovss(config, records, providers, log);
        else if (command == "refer") result = run_refer(config, records, providers, log);
        else if (command == "clickgen") result = run_clickgen(config, records, providers, log);
        else throw InvalidArgument("unknown command '" + command + "'");
    }
    save_report(config, result);
    for (auto const& d : result.diagnostics) log << d << '\n';
    return {result.exit_code, report_to_json(result.report).dump(), log.str()};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Training-free remote-sensing segmentation toolkit";

    auto base = py::register_exception<Error>(m, "MaskfuseError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ClickParseError", base.ptr());
    py::register_exception<ProtocolViolation>(m, "ClickBudgetError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ManifestError>(m, "ManifestError", base.ptr());
    py::register_exception<ProviderError>(m, "ProviderError", base.ptr());

    m.def(
        "select_masks",
        [](FloatArray const& prob, std::vector<MaskArray> const& proposals) {
            ProposalSet set;
            for (auto const& p : proposals) set.proposals.push_back(to_mask(p));
            return from_mask(select_masks(to_prob(prob), set));
        },
        py::arg("prob"), py::arg("proposals"),
        "Union of proposals with more than half their pixels above 0.5 in `prob`.");

    m.def(
        "distance_transform",
        [](MaskArray const& mask) {
            auto const field = distance_transform(to_mask(mask));
            auto const sq = field.squared_values();
            auto const b = mask.request();
            py::array_t<std::int64_t> out({b.shape[0], b.shape[1]});
            std::copy(sq.begin(), sq.end(), out.mutable_data());
            return out;
        },
        py::arg("mask"), "Squared Euclidean distance of each foreground pixel to the nearest background pixel.");

    m.def(
        "iou", [](MaskArray const& a, MaskArray const& b) { return iou(to_mask(a), to_mask(b)); }, py::arg("a"),
        py::arg("b"));

    m.def(
        "grid_clicks",
        [](int width, int height, int n) {
            Pairs out;
            for (auto const& c : grid_clicks(width, height, n).positives) out.emplace_back(c.x, c.y);
            return out;
        },
        py::arg("width"), py::arg("height"), py::arg("n") = 29);

    m.def(
        "plan_windows",
        [](int width, int height, int window, int stride) {
            return rect_tuples(plan_windows(width, height, window, stride).rects);
        },
        py::arg("width"), py::arg("height"), py::arg("window") = 224, py::arg("stride") = 112);
    m.def(
        "plan_tiles", [](int width, int height, int cap) { return rect_tuples(plan_tiles(width, height, cap).rects); },
        py::arg("width"), py::arg("height"), py::arg("cap") = 1024);

    m.def(
        "parse_clicks",
        [](std::string const& text, bool strict, std::size_t max_clicks) {
            return clicks_to_dict(parse_clicks_any(text, {strict, max_clicks}));
        },
        py::arg("text"), py::arg("strict") = false, py::arg("max_clicks") = 6,
        "Parses either the bracketed text form or a JSON list of {x, y} objects.");
    m.def(
        "serialize_clicks",
        [](Pairs const& positive, Pairs const& negative) { return serialize_clicks_text(clicks_from(positive, negative)); },
        py::arg("positive"), py::arg("negative") = Pairs{});

    m.def(
        "generate_clicks",
        [](MaskArray const& gt, std::uint64_t seed, int max_clicks, double tau, bool argmax, bool erode) {
            auto const mask = to_mask(gt);
            auto const behavior = erode ? OracleBehavior::Erode1 : OracleBehavior::Ideal;
            Rng rng(seed);
            auto const seq = generate_click_sequence(
                mask, [&](ClickSet const& c) { return oracle_segment(mask, c, behavior); },
                {max_clicks, tau, argmax ? SampleMode::Argmax : SampleMode::Sample}, rng);
            py::list steps;
            for (auto const& s : seq.trace.steps)
                steps.append(py::make_tuple(s.click.x, s.click.y,
                                            s.click.polarity == Polarity::Positive ? "positive" : "negative",
                                            s.iou_after));
            py::dict d = clicks_to_dict(seq.clicks);
            d["steps"] = steps;
            d["final_iou"] = seq.trace.final_iou;
            d["terminated_by"] = seq.trace.terminated_by == Termination::Threshold ? "threshold" : "budget";
            return d;
        },
        py::arg("gt"), py::arg("seed") = 0, py::arg("max_clicks") = 6, py::arg("tau") = 0.98,
        py::arg("argmax") = false, py::arg("erode") = false,
        "Click sequence for `gt` against the oracle segmenter.");

    m.def(
        "confusion",
        [](py::array_t<std::int32_t, py::array::c_style | py::array::forcecast> const& gt,
           py::array_t<std::int32_t, py::array::c_style | py::array::forcecast> const& pred, int classes) {
            auto const g = gt.request(), p = pred.request();
            require_2d(g, "gt");
            if (g.shape != p.shape) throw DimensionError("gt and prediction shapes differ");
            auto const* gv = static_cast<std::int32_t const*>(g.ptr);
            auto const* pv = static_cast<std::int32_t const*>(p.ptr);
            ConfusionMatrix cm(classes);
            for (py::ssize_t i = 0; i < g.size; ++i) {
                if (gv[i] < 0 || gv[i] >= classes || pv[i] < 0 || pv[i] >= classes)
                    throw InvalidArgument("label outside [0, classes)");
                cm.add(gv[i], pv[i]);
            }
            py::array_t<std::uint64_t> out({classes, classes});
            for (int a = 0; a < classes; ++a)
                for (int b = 0; b < classes; ++b) out.mutable_at(a, b) = cm.at(a, b);
            return out;
        },
        py::arg("gt"), py::arg("pred"), py::arg("classes"), "Rows are ground truth, columns are prediction.");
    m.def(
        "class_iou", [](py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> const& cm) {
            return class_iou(confusion_from(cm));
        },
        py::arg("cm"));
    m.def(
        "miou", [](py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> const& cm) {
            return miou(confusion_from(cm));
        },
        py::arg("cm"));
    m.def(
        "fg_iou",
        [](py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> const& cm, int fg) {
            return fg_iou(confusion_from(cm), fg);
        },
        py::arg("cm"), py::arg("fg") = 1);

    m.def(
        "default_config", [] { return config_to_json(RunConfig{}).dump(); },
        "Default configuration as a JSON object string.");
    m.def("_run", &run_command, py::arg("command"), py::arg("manifest"), py::arg("config_json"),
          py::call_guard<py::gil_scoped_release>());
}
