#include "maskfuse/protocol.hpp"

namespace maskfuse::protocol {

using nlohmann::json;

namespace {

json const& field(json const& j, char const* key) {
    if (!j.is_object()) throw SchemaError("expected a JSON object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
    return *it;
}

std::string string_field(json const& j, char const* key) {
    auto const& v = field(j, key);
    if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

int int_field(json const& j, char const* key) {
    auto const& v = field(j, key);
    if (!v.is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

std::string optional_model(json const& j) {
    auto it = j.find("model");
    return (it != j.end() && it->is_string()) ? it->get<std::string>() : std::string{};
}

template <class Fn> auto decode(char const* what, Fn&& fn) {
    try {
        return fn();
    } catch (SchemaError const&) {
        throw;
    } catch (std::exception const& e) {
        throw SchemaError(std::string(what) + ": " + e.what());
    }
}

std::string image_b64(RgbImage const& image) { return base64_encode(encode_rgb_png(image)); }

RgbImage image_field(json const& j) {
    auto const text = string_field(j, "image_png_b64");
    return decode("image_png_b64", [&] { return decode_rgb_png(base64_decode(text)); });
}

BinaryMask mask_from_b64(std::string const& text) {
    return decode("mask png", [&] { return decode_mask_png(base64_decode(text)); });
}

json points(std::vector<Click> const& clicks) {
    json arr = json::array();
    for (auto const& c : clicks) arr.push_back({c.x, c.y});
    return arr;
}

void read_points(json const& j, char const* key, Polarity polarity, ClickSet& out) {
    auto const& arr = field(j, key);
    if (!arr.is_array()) throw SchemaError(std::string("field '") + key + "' must be an array");
    for (auto const& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer() ||
            p[0].get<long long>() < 0 || p[1].get<long long>() < 0)
            throw SchemaError(std::string("field '") + key + "' must hold [x, y] pairs of non-negative integers");
        out.add({p[0].get<int>(), p[1].get<int>(), polarity});
    }
}

} // namespace

json to_json(ProbabilityMapRequest const& r) {
    return {{"image_png_b64", image_b64(r.image)}, {"classes", r.classes}, {"long_side", r.long_side}};
}

json to_json(ProbabilityMapResponse const& r) {
    json maps = json::array();
    for (auto const& m : r.maps) maps.push_back(encode_float_array_b64(m.values()));
    json j = {{"width", r.width}, {"height", r.height}, {"maps", maps}};
    if (!r.model.empty()) j["model"] = r.model;
    return j;
}

json to_json(MaskProposalRequest const& r) { return {{"image_png_b64", image_b64(r.image)}, {"grid_n", r.grid_n}}; }

json to_json(MaskProposalResponse const& r) {
    json masks = json::array();
    for (auto const& m : r.masks) masks.push_back(base64_encode(encode_mask_png(m)));
    json j = {{"masks", masks}};
    if (!r.model.empty()) j["model"] = r.model;
    return j;
}

json to_json(SegmentRequest const& r) {
    return {{"image_png_b64", image_b64(r.image)},
            {"positive", points(r.clicks.positives)},
            {"negative", points(r.clicks.negatives)}};
}

json to_json(SegmentResponse const& r) {
    json j = {{"mask_png_b64", base64_encode(encode_mask_png(r.mask))}};
    if (!r.model.empty()) j["model"] = r.model;
    return j;
}

json to_json(ClicksRequest const& r) {
    return {{"image_png_b64", image_b64(r.image)}, {"question", r.question}, {"max_clicks", r.max_clicks}};
}

json to_json(ClicksResponse const& r) {
    json j = {{"raw_text", r.raw_text}};
    if (!r.model.empty()) j["model"] = r.model;
    return j;
}

ProbabilityMapRequest parse_probability_map_request(json const& j) {
    ProbabilityMapRequest r;
    r.image = image_field(j);
    auto const& classes = field(j, "classes");
    if (!classes.is_array()) throw SchemaError("field 'classes' must be an array");
    for (auto const& c : classes) {
        if (!c.is_string()) throw SchemaError("field 'classes' must hold strings");
        r.classes.push_back(c.get<std::string>());
    }
    r.long_side = int_field(j, "long_side");
    return r;
}

ProbabilityMapResponse parse_probability_map_response(json const& j) {
    ProbabilityMapResponse r;
    r.width = int_field(j, "width");
    r.height = int_field(j, "height");
    if (r.width < 1 || r.height < 1) throw SchemaError("declared map size must be positive");
    auto const& maps = field(j, "maps");
    if (!maps.is_array()) throw SchemaError("field 'maps' must be an array");
    auto const expected = static_cast<std::size_t>(r.width) * r.height;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        if (!maps[i].is_string()) throw SchemaError("field 'maps' must hold base64 strings");
        auto values = decode("maps", [&] { return decode_float_array_b64(maps[i].get<std::string>()); });
        if (values.size() != expected)
            throw SchemaError("map " + std::to_string(i) + " has " + std::to_string(values.size()) +
                              " values, declared size needs " + std::to_string(expected));
        r.maps.push_back(decode("maps", [&] { return ProbabilityMap(r.width, r.height, std::move(values)); }));
    }
    r.model = optional_model(j);
    return r;
}

MaskProposalRequest parse_mask_proposal_request(json const& j) {
    return {image_field(j), int_field(j, "grid_n")};
}

MaskProposalResponse parse_mask_proposal_response(json const& j) {
    MaskProposalResponse r;
    auto const& masks = field(j, "masks");
    if (!masks.is_array()) throw SchemaError("field 'masks' must be an array");
    for (auto const& m : masks) {
        if (!m.is_string()) throw SchemaError("field 'masks' must hold base64 strings");
        r.masks.push_back(mask_from_b64(m.get<std::string>()));
    }
    r.model = optional_model(j);
    return r;
}

SegmentRequest parse_segment_request(json const& j) {
    SegmentRequest r;
    r.image = image_field(j);
    read_points(j, "positive", Polarity::Positive, r.clicks);
    read_points(j, "negative", Polarity::Negative, r.clicks);
    return r;
}

SegmentResponse parse_segment_response(json const& j) {
    return {mask_from_b64(string_field(j, "mask_png_b64")), optional_model(j)};
}

ClicksRequest parse_clicks_request(json const& j) {
    return {image_field(j), string_field(j, "question"), int_field(j, "max_clicks")};
}

ClicksResponse parse_clicks_response(json const& j) { return {string_field(j, "raw_text"), optional_model(j)}; }

} // namespace maskfuse::protocol
