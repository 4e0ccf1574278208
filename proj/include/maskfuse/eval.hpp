#pragma once

#include "maskfuse/errors.hpp"
#include "maskfuse/raster.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace maskfuse {

/// Pixel counts, rows = ground truth, columns = prediction.
class ConfusionMatrix {
  public:
    explicit ConfusionMatrix(int classes);

    int classes() const { return m_; }
    std::uint64_t at(int gt, int pred) const { return counts_[static_cast<std::size_t>(gt) * m_ + pred]; }
    std::uint64_t row_sum(int c) const;
    std::uint64_t col_sum(int c) const;
    std::uint64_t total() const;

    ConfusionMatrix& operator+=(ConfusionMatrix const& other);
    friend ConfusionMatrix operator+(ConfusionMatrix a, ConfusionMatrix const& b) { return a += b; }
    friend bool operator==(ConfusionMatrix const&, ConfusionMatrix const&) = default;

    void add(int gt, int pred, std::uint64_t n = 1) { counts_[static_cast<std::size_t>(gt) * m_ + pred] += n; }

  private:
    int m_;
    std::vector<std::uint64_t> counts_;
};

/// Returns `cm` plus one count per pixel of (gt, pred).
ConfusionMatrix accumulate(ConfusionMatrix const& cm, LabelMap const& gt, LabelMap const& pred);
/// Binary variant: class 1 is foreground.
ConfusionMatrix accumulate(ConfusionMatrix const& cm, BinaryMask const& gt, BinaryMask const& pred);

/// d / (row + col - d) per class; NaN for classes absent from both gt and prediction.
std::vector<double> class_iou(ConfusionMatrix const& cm);
/// Mean IoU over classes present in gt or prediction; NaN when none is.
double miou(ConfusionMatrix const& cm);
/// IoU of one class; 1 when that class is absent from both sides.
double fg_iou(ConfusionMatrix const& cm, int fg);

// ------------------------------------------------------------------ manifest

enum class Task { Ovss, Refer, Reason };
std::string_view to_string(Task t);

struct ManifestRecord {
    std::filesystem::path image;
    std::filesystem::path gt_mask;
    Task task = Task::Ovss;
    std::optional<std::filesystem::path> classes;
    std::optional<std::string> question;
    std::optional<std::string> group;
    std::optional<std::filesystem::path> prediction; // used by `eval`
    std::string dataset;
};

class ManifestError : public Error {
  public:
    ManifestError(std::size_t line, std::string const& what)
        : Error("manifest line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// JSON-lines manifest. Relative paths resolve against the manifest's directory;
/// `dataset` defaults to the manifest's file stem. Files are not opened here.
std::vector<ManifestRecord> load_manifest(std::filesystem::path const& path);
std::vector<ManifestRecord> parse_manifest(std::string_view text, std::filesystem::path const& base_dir,
                                           std::string const& default_dataset);

// -------------------------------------------------------------------- report

struct DatasetResult {
    std::string name;
    std::vector<std::string> class_names;
    ConfusionMatrix confusion{1};
    int foreground = -1; // class scored by fg_iou, -1 if not a binary task
    int items = 0;
    int failed = 0;
};

struct ItemResult {
    std::size_t index = 0;
    std::string image;
    std::string dataset;
    bool ok = true;
    std::string error;
    std::string prediction; // path of the written prediction, if any
    std::string raw_text;   // archived provider answer for failed click parses
};

struct Report {
    std::string task;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json providers = nlohmann::json::object();
    std::vector<DatasetResult> datasets;
    std::vector<ItemResult> items;
    std::optional<double> wall_clock_s;
    nlohmann::json extra = nlohmann::json::object();
};

/// Metric values rounded to 4 decimals; absent metrics as null.
nlohmann::json report_to_json(Report const& report);
void write_report(std::filesystem::path const& path, Report const& report);
/// dataset,class,iou rows.
void write_class_csv(std::filesystem::path const& path, Report const& report);
nlohmann::json read_report(std::filesystem::path const& path);

double round4(double v);

} // namespace maskfuse
