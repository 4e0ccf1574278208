#include "maskfuse/eval.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace maskfuse {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(int classes) : m_(classes) {
    if (classes < 1) throw InvalidArgument("confusion matrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(classes) * classes, 0);
}

std::uint64_t ConfusionMatrix::row_sum(int c) const {
    std::uint64_t s = 0;
    for (int p = 0; p < m_; ++p) s += at(c, p);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(int c) const {
    std::uint64_t s = 0;
    for (int g = 0; g < m_; ++g) s += at(g, c);
    return s;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

ConfusionMatrix& ConfusionMatrix::operator+=(ConfusionMatrix const& other) {
    if (other.m_ != m_) throw DimensionError("confusion matrices have different class counts");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

ConfusionMatrix accumulate(ConfusionMatrix const& cm, LabelMap const& gt, LabelMap const& pred) {
    if (gt.width() != pred.width() || gt.height() != pred.height())
        throw DimensionError("accumulate: gt and prediction sizes differ");
    if (gt.class_count() != cm.classes() || pred.class_count() != cm.classes())
        throw DimensionError("accumulate: class count differs from the confusion matrix");
    ConfusionMatrix out = cm;
    auto g = gt.labels();
    auto p = pred.labels();
    for (std::size_t i = 0; i < g.size(); ++i) out.add(g[i], p[i]);
    return out;
}

ConfusionMatrix accumulate(ConfusionMatrix const& cm, BinaryMask const& gt, BinaryMask const& pred) {
    if (!gt.same_shape(pred)) throw DimensionError("accumulate: gt and prediction sizes differ");
    if (cm.classes() != 2) throw DimensionError("accumulate: binary masks need a 2-class confusion matrix");
    ConfusionMatrix out = cm;
    for (std::size_t i = 0; i < gt.size(); ++i) out.add(gt.test(i) ? 1 : 0, pred.test(i) ? 1 : 0);
    return out;
}

std::vector<double> class_iou(ConfusionMatrix const& cm) {
    std::vector<double> out(static_cast<std::size_t>(cm.classes()));
    for (int c = 0; c < cm.classes(); ++c) {
        auto const d = cm.at(c, c);
        auto const uni = cm.row_sum(c) + cm.col_sum(c) - d;
        out[c] = uni == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(d) / static_cast<double>(uni);
    }
    return out;
}

double miou(ConfusionMatrix const& cm) {
    double sum = 0;
    int n = 0;
    for (double v : class_iou(cm)) {
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

double fg_iou(ConfusionMatrix const& cm, int fg) {
    if (fg < 0 || fg >= cm.classes()) throw InvalidArgument("fg_iou: foreground index out of range");
    double const v = class_iou(cm)[fg];
    return std::isnan(v) ? 1.0 : v;
}

// ------------------------------------------------------------------ manifest

std::string_view to_string(Task t) {
    switch (t) {
    case Task::Ovss: return "ovss";
    case Task::Refer: return "refer";
    case Task::Reason: return "reason";
    }
    return "unknown";
}

std::vector<ManifestRecord> parse_manifest(std::string_view text, std::filesystem::path const& base_dir,
                                           std::string const& default_dataset) {
    std::vector<ManifestRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto const end = std::min(text.find('\n', pos), text.size());
        auto const line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        auto doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) throw ManifestError(line_no, "not a JSON object");

        auto str = [&](char const* key, bool required) -> std::optional<std::string> {
            auto it = doc.find(key);
            if (it == doc.end() || it->is_null()) {
                if (required) throw ManifestError(line_no, std::string("missing '") + key + "'");
                return std::nullopt;
            }
            if (!it->is_string()) throw ManifestError(line_no, std::string("'") + key + "' must be a string");
            return it->get<std::string>();
        };
        auto resolve = [&](std::string const& p) {
            std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };

        ManifestRecord r;
        r.image = resolve(*str("image", true));
        r.gt_mask = resolve(*str("gt_mask", true));
        auto const task = *str("task", true);
        if (task == "ovss") r.task = Task::Ovss;
        else if (task == "refer") r.task = Task::Refer;
        else if (task == "reason") r.task = Task::Reason;
        else throw ManifestError(line_no, "unknown task '" + task + "'");
        if (auto c = str("classes", false)) r.classes = resolve(*c);
        r.question = str("question", false);
        r.group = str("group", false);
        if (auto p = str("prediction", false)) r.prediction = resolve(*p);
        r.dataset = str("dataset", false).value_or(default_dataset);

        if (r.task == Task::Ovss && !r.classes) throw ManifestError(line_no, "ovss records need 'classes'");
        if (r.task != Task::Ovss && !r.question)
            throw ManifestError(line_no, std::string(to_string(r.task)) + " records need 'question'");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ManifestRecord> load_manifest(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path(), path.stem().string());
}

// -------------------------------------------------------------------- report

double round4(double v) { return std::round(v * 1e4) / 1e4; }

namespace {

json metric(double v) { return std::isnan(v) ? json(nullptr) : json(round4(v)); }

} // namespace

json report_to_json(Report const& report) {
    json datasets = json::object();
    for (auto const& d : report.datasets) {
        json per_class = json::array();
        auto const ious = class_iou(d.confusion);
        for (std::size_t c = 0; c < ious.size(); ++c) {
            auto const name = c < d.class_names.size() ? d.class_names[c] : std::to_string(c);
            per_class.push_back({{"class", name}, {"iou", metric(ious[c])}});
        }
        json entry = {{"miou", metric(miou(d.confusion))},
                      {"fg_iou", d.foreground >= 0 ? metric(fg_iou(d.confusion, d.foreground)) : json(nullptr)},
                      {"per_class", per_class},
                      {"items", d.items},
                      {"failed", d.failed},
                      {"pixels", d.confusion.total()},
                      {"background_in_mean", true}};
        datasets[d.name] = entry;
    }

    json items = json::array();
    json failures = json::array();
    for (auto const& it : report.items) {
        json j = {{"index", it.index}, {"image", it.image}, {"dataset", it.dataset}, {"ok", it.ok}};
        if (!it.prediction.empty()) j["prediction"] = it.prediction;
        if (!it.ok) {
            j["error"] = it.error;
            json f = {{"index", it.index}, {"image", it.image}, {"error", it.error}};
            if (!it.raw_text.empty()) f["raw_text"] = it.raw_text;
            failures.push_back(f);
        }
        items.push_back(j);
    }

    json doc = {{"task", report.task},   {"config", report.config}, {"providers", report.providers},
                {"datasets", datasets},  {"items", items},          {"failures", failures},
                {"summary", {{"items", report.items.size()}, {"failed", failures.size()}}}};
    for (auto const& [k, v] : report.extra.items()) doc[k] = v;
    if (report.wall_clock_s) doc["wall_clock_s"] = round4(*report.wall_clock_s);
    return doc;
}

void write_report(std::filesystem::path const& path, Report const& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report " + path.string());
    out << report_to_json(report).dump(2) << '\n';
}

void write_class_csv(std::filesystem::path const& path, Report const& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "dataset,class,iou\n";
    for (auto const& d : report.datasets) {
        auto const ious = class_iou(d.confusion);
        for (std::size_t c = 0; c < ious.size(); ++c) {
            auto const name = c < d.class_names.size() ? d.class_names[c] : std::to_string(c);
            out << d.name << ',' << name << ',';
            if (!std::isnan(ious[c])) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.4f", ious[c]);
                out << buf;
            }
            out << '\n';
        }
    }
}

json read_report(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report " + path.string());
    auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw IoError("report " + path.string() + " is not valid JSON");
    return doc;
}

} // namespace maskfuse
