#pragma once

// JSON documents exchanged with model-serving endpoints. All calls are POST;
// images and masks travel as base64 PNG, probability maps as base64 raw
// little-endian float32 arrays. Shared by the HTTP client and by servers
// implementing the other side.
//
//   /v1/probability-map  {image_png_b64, classes, long_side}   -> {width, height, maps}
//   /v1/mask-proposals   {image_png_b64, grid_n}               -> {masks}
//   /v1/segment          {image_png_b64, positive, negative}   -> {mask_png_b64}
//   /v1/clicks           {image_png_b64, question, max_clicks} -> {raw_text}
//
// Responses may add a "model" string naming the serving model.

#include "maskfuse/clicks.hpp"
#include "maskfuse/errors.hpp"
#include "maskfuse/image_io.hpp"
#include "maskfuse/raster.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace maskfuse::protocol {

inline constexpr std::string_view kProbabilityMapPath = "/v1/probability-map";
inline constexpr std::string_view kMaskProposalsPath = "/v1/mask-proposals";
inline constexpr std::string_view kSegmentPath = "/v1/segment";
inline constexpr std::string_view kClicksPath = "/v1/clicks";

class SchemaError : public Error {
  public:
    using Error::Error;
};

struct ProbabilityMapRequest {
    RgbImage image;
    std::vector<std::string> classes;
    int long_side = 0;
};
struct ProbabilityMapResponse {
    int width = 0;
    int height = 0;
    std::vector<ProbabilityMap> maps;
    std::string model;
};

struct MaskProposalRequest {
    RgbImage image;
    int grid_n = 0;
};
struct MaskProposalResponse {
    std::vector<BinaryMask> masks;
    std::string model;
};

struct SegmentRequest {
    RgbImage image;
    ClickSet clicks;
};
struct SegmentResponse {
    BinaryMask mask;
    std::string model;
};

struct ClicksRequest {
    RgbImage image;
    std::string question;
    int max_clicks = 0;
};
struct ClicksResponse {
    std::string raw_text;
    std::string model;
};

nlohmann::json to_json(ProbabilityMapRequest const& r);
nlohmann::json to_json(ProbabilityMapResponse const& r);
nlohmann::json to_json(MaskProposalRequest const& r);
nlohmann::json to_json(MaskProposalResponse const& r);
nlohmann::json to_json(SegmentRequest const& r);
nlohmann::json to_json(SegmentResponse const& r);
nlohmann::json to_json(ClicksRequest const& r);
nlohmann::json to_json(ClicksResponse const& r);

// Decoders throw SchemaError on any missing field, wrong type or bad payload.
ProbabilityMapRequest parse_probability_map_request(nlohmann::json const& j);
ProbabilityMapResponse parse_probability_map_response(nlohmann::json const& j);
MaskProposalRequest parse_mask_proposal_request(nlohmann::json const& j);
MaskProposalResponse parse_mask_proposal_response(nlohmann::json const& j);
SegmentRequest parse_segment_request(nlohmann::json const& j);
SegmentResponse parse_segment_response(nlohmann::json const& j);
ClicksRequest parse_clicks_request(nlohmann::json const& j);
ClicksResponse parse_clicks_response(nlohmann::json const& j);

} // namespace maskfuse::protocol
