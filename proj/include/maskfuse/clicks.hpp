#pragma once

#include "maskfuse/errors.hpp"
#include "maskfuse/raster.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maskfuse {

enum class Polarity { Positive, Negative };

struct Click {
    int x = 0;
    int y = 0;
    Polarity polarity = Polarity::Positive;

    friend bool operator==(Click const&, Click const&) = default;
};

/// Positive and negative clicks, each list in generation order.
struct ClickSet {
    std::vector<Click> positives;
    std::vector<Click> negatives;

    void add(Click const& c) { (c.polarity == Polarity::Positive ? positives : negatives).push_back(c); }
    std::size_t size() const { return positives.size() + negatives.size(); }
    bool empty() const { return size() == 0; }

    friend bool operator==(ClickSet const&, ClickSet const&) = default;
};

enum class Termination { Threshold, Budget };

struct TraceStep {
    Click click;
    double iou_after = 0.0;
};

struct ClickTrace {
    std::vector<TraceStep> steps;
    double final_iou = 0.0;
    Termination terminated_by = Termination::Budget;
};

/// `Positive: [(x, y), ...], Negative: [(x, y), ...]`
std::string serialize_clicks_text(ClickSet const& clicks);

struct ClickParseOptions {
    bool strict = false;     // enforce the total-click budget below
    std::size_t max_clicks = 6;
};

/// Raised when a well-formed click answer breaks the click budget.
class ProtocolViolation : public Error {
  public:
    using Error::Error;
};

/// Whitespace-tolerant parser for the text form; text before the `Positive`
/// key and after the last list is ignored. The `Negative` list may be absent.
ClickSet parse_clicks_text(std::string_view text, ClickParseOptions const& options = {});

/// Extracts the first JSON array of `{"x": .., "y": ..}` objects (after any
/// `<think>...</think>` blocks); every entry becomes a positive click.
ClickSet parse_clicks_json(std::string_view text, ClickParseOptions const& options = {});

/// Text form if a `Positive` key is present, JSON array otherwise.
ClickSet parse_clicks_any(std::string_view text, ClickParseOptions const& options = {});

using Rng = std::mt19937_64;

enum class SampleMode { Sample, Argmax };

/// Draws the next corrective click from the distance transform of the error
/// region `e_plus ∪ e_minus`. Positive when the pixel lies in `e_plus`.
Click sample_click(BinaryMask const& e_plus, BinaryMask const& e_minus, Rng& rng, SampleMode mode);

struct ClickGenOptions {
    int max_clicks = 6;   // T
    double tau = 0.98;    // IoU at which the loop stops
    SampleMode mode = SampleMode::Sample;
};

/// Segmentation failure inside the click loop, tagged with the 1-based step.
class ClickGenerationError : public Error {
  public:
    ClickGenerationError(int step, std::string const& what)
        : Error("click generation step " + std::to_string(step) + ": " + what), step_(step) {}
    int step() const { return step_; }

  private:
    int step_;
};

struct ClickSequence {
    ClickSet clicks;
    std::vector<Click> order; // all clicks in generation order
    ClickTrace trace;
};

using SegmentFn = std::function<BinaryMask(ClickSet const&)>;

/// Iteratively converts a ground-truth mask into a click sequence by
/// prompting `segment` and clicking into the largest remaining error.
/// An empty click set predicts the empty mask without calling `segment`.
ClickSequence generate_click_sequence(BinaryMask const& gt, SegmentFn const& segment, ClickGenOptions const& options,
                                      Rng& rng);

/// Pixel is foreground when at least half of the masks have it set
/// (strictly more than half when `ties_foreground` is false).
BinaryMask ensemble_vote(std::span<const BinaryMask> masks, bool ties_foreground = true);

} // namespace maskfuse
