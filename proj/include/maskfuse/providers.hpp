#pragma once

// Boundary to the external foundation models. Four capabilities, each behind
// an abstract interface with two backends: a deterministic oracle that reads
// a palette-coded synthetic scene straight out of the image, and an HTTP
// client (see http_client.hpp).

#include "maskfuse/clicks.hpp"
#include "maskfuse/contrastive.hpp"
#include "maskfuse/errors.hpp"
#include "maskfuse/image_io.hpp"
#include "maskfuse/raster.hpp"

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maskfuse {

enum class Capability { ProbabilityMap, MaskProposals, PromptableSegment, ClickSuggest };
enum class Backend { Oracle, Http };

std::string_view to_string(Capability c);
std::string_view to_string(Backend b);
Capability capability_from_string(std::string_view s);
Backend backend_from_string(std::string_view s);

struct ProviderHandle {
    Capability capability = Capability::ProbabilityMap;
    Backend backend = Backend::Oracle;
    std::string endpoint{};      // base URL, http backend only
    double timeout_s = 30.0;
    int concurrency_limit = 4;
    int max_retries = 2;
    double backoff_s = 0.2;      // first retry delay, doubled per retry
    std::string bearer_token{};

    /// Throws InvalidArgument unless endpoint is present iff backend is http and timeout > 0.
    void validate() const;
};

class ProviderError : public Error {
  public:
    enum class Kind { Timeout, Transport, Status, Schema };

    ProviderError(Kind kind, Capability capability, std::string endpoint, std::string const& detail, int status = 0);

    Kind kind() const { return kind_; }
    Capability capability() const { return capability_; }
    std::string const& endpoint() const { return endpoint_; }
    int status() const { return status_; }

  private:
    Kind kind_;
    Capability capability_;
    std::string endpoint_;
    int status_;
};

std::string_view to_string(ProviderError::Kind k);

/// Class maps at the provider's working resolution (which may differ from the image).
struct ProviderMaps {
    int width = 0;
    int height = 0;
    std::vector<ProbabilityMap> maps;
};

class ProbabilityMapProvider {
  public:
    virtual ~ProbabilityMapProvider() = default;
    virtual ProviderMaps probability_maps(RgbImage const& image, std::span<const std::string> classes,
                                          int long_side) = 0;
    virtual std::string provenance() const = 0;
};

class MaskProposalProvider {
  public:
    virtual ~MaskProposalProvider() = default;
    virtual std::vector<BinaryMask> propose(RgbImage const& image, int grid_n) = 0;
    virtual std::string provenance() const = 0;
};

class PromptableSegmenter {
  public:
    virtual ~PromptableSegmenter() = default;
    virtual BinaryMask segment(RgbImage const& image, ClickSet const& clicks) = 0;
    virtual std::string provenance() const = 0;
};

class ClickSuggester {
  public:
    virtual ~ClickSuggester() = default;
    /// Raw model answer; parsing is the caller's job.
    virtual std::string suggest(RgbImage const& image, std::string_view question, int max_clicks) = 0;
    virtual std::string provenance() const = 0;
};

// ------------------------------------------------------------ synthetic scenes

/// Fixed colour for each class label; label 0 is black.
inline constexpr int kPaletteSize = 64;
std::array<std::uint8_t, 3> palette_color(Label label);
/// Inverse of the palette; colours not in the palette decode to label 0.
LabelMap decode_palette(RgbImage const& image);

struct SceneShape {
    enum class Kind { Rect, Disk };
    Label cls = 1;
    Kind kind = Kind::Rect;
    Rect rect;          // Rect geometry
    int cx = 0, cy = 0; // Disk centre
    int radius = 0;     // Disk radius: pixels with (x-cx)^2 + (y-cy)^2 <= r^2
};

struct SceneSpec {
    int width = 64;
    int height = 64;
    int class_count = 2; // including background (label 0)
    std::vector<SceneShape> shapes; // later shapes occlude earlier ones
    std::uint64_t seed = 0;
    int noise_radius = 0;   // box-blur radius applied to the indicator maps
    int distractor_count = 0;
};

struct Scene {
    RgbImage image;       // palette rendering of gt
    LabelMap gt;
    std::vector<ProbabilityMap> maps; // one per class
    ProposalSet proposals;            // visible part of each shape, then distractors
};

Scene make_scene(SceneSpec const& spec);

/// Random rectangles whose pixels are more than half label 0 in `gt`.
std::vector<BinaryMask> background_distractors(LabelMap const& gt, int count, Rng& rng);

/// Random, well-formed scene: `shape_count` rects/disks with classes in [1, class_count).
SceneSpec random_scene_spec(Rng& rng, int width, int height, int class_count, int shape_count);

// ------------------------------------------------------------ oracle segmenter

enum class OracleBehavior {
    Ideal,  // exact ground-truth components
    Erode1, // components eroded by one pixel unless a positive click touches their boundary
};

/// Union of ground-truth components holding a positive click, minus those
/// holding a negative click. Components are 4-connected.
BinaryMask oracle_segment(BinaryMask const& gt, ClickSet const& clicks, OracleBehavior behavior);
/// Same over a label plane: components are 4-connected same-label, non-background regions.
BinaryMask oracle_segment(LabelMap const& gt, ClickSet const& clicks, OracleBehavior behavior);

struct OracleOptions {
    std::uint64_t seed = 0;
    int distractors = 5;
    bool exact_proposals = true;
    OracleBehavior behavior = OracleBehavior::Ideal;
    bool honor_click_budget = true;
};

std::unique_ptr<ProbabilityMapProvider> make_probability_provider(ProviderHandle const& handle,
                                                                  OracleOptions const& oracle = {});
std::unique_ptr<MaskProposalProvider> make_proposal_provider(ProviderHandle const& handle,
                                                             OracleOptions const& oracle = {});
std::unique_ptr<PromptableSegmenter> make_segmenter(ProviderHandle const& handle, OracleOptions const& oracle = {});
std::unique_ptr<ClickSuggester> make_click_suggester(ProviderHandle const& handle, OracleOptions const& oracle = {});

} // namespace maskfuse
