#pragma once

// Mask selection and multi-class composition over category-agnostic proposals.
//
// A contrastive model scores each pixel against each text prompt; a promptable
// segmenter proposes regions from a click grid. The functions here decide which
// proposals survive (single class) and which class each proposal carries
// (multi-class), then paint the result into one label plane.

#include "maskfuse/raster.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace maskfuse {

struct ProposalSet {
    std::vector<BinaryMask> proposals;
    int source_grid = 0; // grid side used to elicit the proposals, 0 if unknown
};

class ClassPrompts {
  public:
    ClassPrompts(std::vector<std::string> names, Label background_index = 0);

    /// One name per line; an optional first line `#background=<index>`.
    static ClassPrompts parse(std::string_view text);
    static ClassPrompts load(std::filesystem::path const& path);

    std::vector<std::string> const& names() const { return names_; }
    int size() const { return static_cast<int>(names_.size()); }
    Label background_index() const { return background_; }

  private:
    std::vector<std::string> names_;
    Label background_;
};

/// Patch-token embeddings plus the image-level <CLS> embedding.
struct TokenMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<float> values; // rows * cols, row-major
    std::vector<float> cls;    // cols
};

/// Proposals with more than half of their pixels strictly above 0.5, merged.
/// An empty proposal set (or no qualifying proposal) yields an all-zero mask of
/// the probability map's size.
BinaryMask select_masks(ProbabilityMap const& prob, ProposalSet const& proposals);

/// Per-pixel argmax over the class maps; ties go to the lowest class index.
LabelMap pixel_argmax(std::span<const ProbabilityMap> maps, ClassPrompts const& prompts);

/// Class with the most pixels of `labels` under `mask`; ties go to the lowest index.
Label dominant_class(BinaryMask const& mask, LabelMap const& labels);

enum class UncoveredPolicy {
    Background,  // pixels outside every painted proposal stay background
    PixelArgmax, // fall back to the per-pixel class map
};

/// Paints every proposal with its dominant class, largest area first so that
/// finer proposals overwrite coarser ones. Background-dominated proposals paint nothing.
LabelMap compose_multiclass(ProposalSet const& proposals, LabelMap const& labels, ClassPrompts const& prompts,
                            UncoveredPolicy uncovered = UncoveredPolicy::Background);

/// Subtracts `scale * cls` from every token row.
TokenMatrix debias_tokens(TokenMatrix const& tokens, double scale);

} // namespace maskfuse
