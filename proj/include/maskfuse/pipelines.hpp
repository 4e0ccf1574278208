#pragma once

// End-to-end subcommands. Each takes a parsed config and manifest, drives the
// configured providers over every record with a bounded worker pool, and
// assembles a report after all items finish.

#include "maskfuse/clicks.hpp"
#include "maskfuse/config.hpp"
#include "maskfuse/contrastive.hpp"
#include "maskfuse/eval.hpp"
#include "maskfuse/image_io.hpp"
#include "maskfuse/providers.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace maskfuse {

struct Providers {
    std::unique_ptr<ProbabilityMapProvider> probability;
    std::unique_ptr<MaskProposalProvider> proposals;
    std::unique_ptr<PromptableSegmenter> segmenter;
    std::unique_ptr<ClickSuggester> suggester;

    nlohmann::json provenance() const;
};

Providers make_providers(RunConfig const& config);

struct RunResult {
    Report report;
    int exit_code = 0; // 0 success, 1 failed items under strict/fail-fast or nothing succeeded
    std::vector<std::string> diagnostics;
};

/// Multi-class segmentation of one image: sliding-window class maps,
/// per-pixel argmax, tiled proposals, dominant-class composition.
LabelMap segment_ovss(RgbImage const& image, ClassPrompts const& prompts, Providers& providers,
                      RunConfig const& config);

/// Click-prompted segmentation; images beyond `tile_cap` are split into tiles,
/// each tile prompted with the clicks that fall inside it.
BinaryMask segment_with_clicks(RgbImage const& image, ClickSet const& clicks, PromptableSegmenter& segmenter,
                               int tile_cap);

RunResult run_ovss(RunConfig const& config, std::vector<ManifestRecord> const& manifest, Providers& providers,
                   std::ostream& log);
RunResult run_refer(RunConfig const& config, std::vector<ManifestRecord> const& manifest, Providers& providers,
                    std::ostream& log);
/// Writes `clicks.jsonl` (training export) and `traces.jsonl` under the output dir.
RunResult run_clickgen(RunConfig const& config, std::vector<ManifestRecord> const& manifest, Providers& providers,
                       std::ostream& log);
/// Scores each record's `prediction` file against its ground truth.
RunResult run_eval(RunConfig const& config, std::vector<ManifestRecord> const& manifest, std::ostream& log);

/// Writes report.json (and class_iou.csv) into the config's output dir.
void save_report(RunConfig const& config, RunResult const& result);

// ---------------------------------------------------------------------- viz

inline constexpr std::array<std::uint8_t, 3> kPositiveColor = {0, 255, 0};
inline constexpr std::array<std::uint8_t, 3> kNegativeColor = {255, 0, 0};
inline constexpr std::array<std::uint8_t, 3> kTintColor = {30, 144, 255};
inline constexpr int kDotRadius = 2;

/// Mask pixels become (pixel + tint) / 2 per channel; clicks are filled disks
/// of radius 2, positives first, then negatives.
RgbImage render_overlay(RgbImage const& image, BinaryMask const* mask, ClickSet const& clicks);

/// Renders overlays for a `traces.jsonl` (one PNG per step, masks re-predicted
/// with the configured segmenter) or a `report.json` (one PNG per predicted item).
/// Returns the written files.
std::vector<std::filesystem::path> run_viz(RunConfig const& config, std::filesystem::path const& input,
                                           Providers& providers, std::ostream& log);

} // namespace maskfuse
