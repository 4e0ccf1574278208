#include "maskfuse/providers.hpp"

#include "maskfuse/http_client.hpp"

#include <algorithm>
#include <map>

namespace maskfuse {

namespace {

constexpr std::array<std::pair<Capability, std::string_view>, 4> kCapabilityNames = {{
    {Capability::ProbabilityMap, "probability-map"},
    {Capability::MaskProposals, "mask-proposals"},
    {Capability::PromptableSegment, "promptable-segment"},
    {Capability::ClickSuggest, "click-suggest"},
}};

std::uint64_t image_hash(RgbImage const& image) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(static_cast<std::uint64_t>(image.width));
    mix(static_cast<std::uint64_t>(image.height));
    for (auto b : image.pixels) mix(b);
    return h;
}

/// 4-connected same-label regions, skipping the background label.
Components label_components(LabelMap const& labels) {
    int const w = labels.width(), h = labels.height();
    auto plane = labels.labels();
    Components comps;
    comps.labels.assign(plane.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < plane.size(); ++start) {
        if (plane[start] == labels.background_index() || comps.labels[start] != 0) continue;
        int const id = ++comps.count;
        Label const cls = plane[start];
        comps.labels[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            auto const i = stack.back();
            stack.pop_back();
            int const x = static_cast<int>(i % w), y = static_cast<int>(i / w);
            auto visit = [&](int nx, int ny) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
                auto const j = static_cast<std::size_t>(ny) * w + nx;
                if (plane[j] == cls && comps.labels[j] == 0) {
                    comps.labels[j] = id;
                    stack.push_back(j);
                }
            };
            visit(x - 1, y);
            visit(x + 1, y);
            visit(x, y - 1);
            visit(x, y + 1);
        }
    }
    return comps;
}

BinaryMask component_mask(Components const& comps, int id, int w, int h) {
    BinaryMask m(w, h);
    for (std::size_t i = 0; i < comps.labels.size(); ++i)
        if (comps.labels[i] == id) m.assign(i, true);
    return m;
}

bool on_boundary(Components const& comps, int w, int h, int x, int y) {
    int const id = comps.labels[static_cast<std::size_t>(y) * w + x];
    auto same = [&](int nx, int ny) {
        return nx >= 0 && ny >= 0 && nx < w && ny < h && comps.labels[static_cast<std::size_t>(ny) * w + nx] == id;
    };
    return !(same(x - 1, y) && same(x + 1, y) && same(x, y - 1) && same(x, y + 1));
}

BinaryMask select_components(Components const& comps, int w, int h, ClickSet const& clicks, OracleBehavior behavior) {
    auto check = [&](Click const& c) {
        if (c.x < 0 || c.y < 0 || c.x >= w || c.y >= h) {
            throw InvalidArgument("oracle_segment: click (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                                  ") outside " + std::to_string(w) + "x" + std::to_string(h) + " image");
        }
        return comps.labels[static_cast<std::size_t>(c.y) * w + c.x];
    };
    std::vector<bool> keep(static_cast<std::size_t>(comps.count) + 1, false);
    std::vector<bool> exact(keep.size(), false);
    for (auto const& c : clicks.positives) {
        int const id = check(c);
        if (id == 0) continue;
        keep[id] = true;
        if (on_boundary(comps, w, h, c.x, c.y)) exact[id] = true;
    }
    for (auto const& c : clicks.negatives) {
        int const id = check(c);
        if (id != 0) keep[id] = false;
    }

    BinaryMask out(w, h);
    for (int id = 1; id <= comps.count; ++id) {
        if (!keep[id]) continue;
        auto part = component_mask(comps, id, w, h);
        if (behavior == OracleBehavior::Erode1 && !exact[id]) part = erode(part);
        BinaryMask const both[] = {out, part};
        out = mask_union(both);
    }
    return out;
}

void validate_shape(SceneShape const& s, SceneSpec const& spec) {
    if (s.cls >= spec.class_count) throw InvalidArgument("scene shape class out of range");
    if (s.kind == SceneShape::Kind::Rect) {
        auto const& r = s.rect;
        if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > spec.width || r.y + r.h > spec.height)
            throw InvalidArgument("scene rect outside the image or degenerate");
    } else {
        if (s.radius < 0 || s.cx - s.radius < 0 || s.cy - s.radius < 0 || s.cx + s.radius >= spec.width ||
            s.cy + s.radius >= spec.height)
            throw InvalidArgument("scene disk outside the image or negative radius");
    }
}

bool shape_covers(SceneShape const& s, int x, int y) {
    if (s.kind == SceneShape::Kind::Rect) return s.rect.contains(x, y);
    long long const dx = x - s.cx, dy = y - s.cy;
    return dx * dx + dy * dy <= static_cast<long long>(s.radius) * s.radius;
}

ProbabilityMap box_blur(ProbabilityMap const& map, int radius) {
    if (radius <= 0) return map;
    int const w = map.width(), h = map.height();
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0;
            int n = 0;
            for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy)
                for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx, ++n)
                    sum += map.at(xx, yy);
            out[static_cast<std::size_t>(y) * w + x] = std::clamp(static_cast<float>(sum / n), 0.0f, 1.0f);
        }
    }
    return ProbabilityMap(w, h, std::move(out));
}

// ------------------------------------------------------------- oracle backends

class OracleProbabilityMaps final : public ProbabilityMapProvider {
  public:
    ProviderMaps probability_maps(RgbImage const& image, std::span<const std::string> classes, int) override {
        auto const labels = decode_palette(image);
        ProviderMaps out{image.width, image.height, {}};
        for (std::size_t c = 0; c < classes.size(); ++c) {
            ProbabilityMap m(image.width, image.height);
            auto plane = labels.labels();
            for (std::size_t i = 0; i < plane.size(); ++i)
                if (plane[i] == c) m.set(static_cast<int>(i % image.width), static_cast<int>(i / image.width), 1.0f);
            out.maps.push_back(std::move(m));
        }
        return out;
    }
    std::string provenance() const override { return "oracle"; }
};

class OracleProposals final : public MaskProposalProvider {
  public:
    explicit OracleProposals(OracleOptions options) : options_(options) {}

    std::vector<BinaryMask> propose(RgbImage const& image, int) override {
        auto const labels = decode_palette(image);
        std::vector<BinaryMask> out;
        if (options_.exact_proposals) {
            auto const comps = label_components(labels);
            for (int id = 1; id <= comps.count; ++id)
                out.push_back(component_mask(comps, id, image.width, image.height));
        }
        Rng rng(options_.seed ^ image_hash(image));
        auto distractors = background_distractors(labels, options_.distractors, rng);
        std::move(distractors.begin(), distractors.end(), std::back_inserter(out));
        return out;
    }
    std::string provenance() const override { return "oracle"; }

  private:
    OracleOptions options_;
};

class OracleSegmenter final : public PromptableSegmenter {
  public:
    explicit OracleSegmenter(OracleBehavior behavior) : behavior_(behavior) {}
    BinaryMask segment(RgbImage const& image, ClickSet const& clicks) override {
        return oracle_segment(decode_palette(image), clicks, behavior_);
    }
    std::string provenance() const override {
        return behavior_ == OracleBehavior::Ideal ? "oracle:ideal" : "oracle:erode1";
    }

  private:
    OracleBehavior behavior_;
};

/// One positive click per foreground component, at the component's deepest pixel.
class OracleClickSuggester final : public ClickSuggester {
  public:
    explicit OracleClickSuggester(bool honor_budget) : honor_budget_(honor_budget) {}

    std::string suggest(RgbImage const& image, std::string_view, int max_clicks) override {
        auto const labels = decode_palette(image);
        auto const comps = label_components(labels);
        ClickSet clicks;
        for (int id = 1; id <= comps.count; ++id) {
            if (honor_budget_ && static_cast<int>(clicks.size()) >= max_clicks) break;
            auto const field = distance_transform(component_mask(comps, id, image.width, image.height));
            auto const sq = field.squared_values();
            auto const best = static_cast<std::size_t>(std::max_element(sq.begin(), sq.end()) - sq.begin());
            clicks.add({static_cast<int>(best % image.width), static_cast<int>(best / image.width),
                        Polarity::Positive});
        }
        return serialize_clicks_text(clicks);
    }
    std::string provenance() const override { return "oracle"; }

  private:
    bool honor_budget_;
};

} // namespace

std::string_view to_string(Capability c) {
    for (auto const& [cap, name] : kCapabilityNames)
        if (cap == c) return name;
    return "unknown";
}

std::string_view to_string(Backend b) { return b == Backend::Oracle ? "oracle" : "http"; }

Capability capability_from_string(std::string_view s) {
    for (auto const& [cap, name] : kCapabilityNames)
        if (name == s) return cap;
    throw InvalidArgument("unknown capability '" + std::string(s) + "'");
}

Backend backend_from_string(std::string_view s) {
    if (s == "oracle") return Backend::Oracle;
    if (s == "http") return Backend::Http;
    throw InvalidArgument("unknown provider backend '" + std::string(s) + "'");
}

void ProviderHandle::validate() const {
    std::string const name(to_string(capability));
    if ((backend == Backend::Http) != !endpoint.empty())
        throw InvalidArgument(name + ": an endpoint is required for, and only for, the http backend");
    if (!(timeout_s > 0)) throw InvalidArgument(name + ": timeout must be positive");
    if (concurrency_limit < 1) throw InvalidArgument(name + ": concurrency limit must be >= 1");
    if (max_retries < 0) throw InvalidArgument(name + ": retry count must be >= 0");
}

ProviderError::ProviderError(Kind kind, Capability capability, std::string endpoint, std::string const& detail,
                             int status)
    : Error(std::string(to_string(capability)) + " @ " + (endpoint.empty() ? "oracle" : endpoint) + ": " +
            std::string(maskfuse::to_string(kind)) + (status ? " " + std::to_string(status) : "") + ": " + detail),
      kind_(kind), capability_(capability), endpoint_(std::move(endpoint)), status_(status) {}

std::string_view to_string(ProviderError::Kind k) {
    switch (k) {
    case ProviderError::Kind::Timeout: return "timeout";
    case ProviderError::Kind::Transport: return "transport error";
    case ProviderError::Kind::Status: return "http status";
    case ProviderError::Kind::Schema: return "schema violation";
    }
    return "error";
}

std::array<std::uint8_t, 3> palette_color(Label label) {
    if (label >= kPaletteSize) throw InvalidArgument("label beyond the synthetic palette");
    if (label == 0) return {0, 0, 0};
    return {static_cast<std::uint8_t>(32 + (label * 37) % 224), static_cast<std::uint8_t>(32 + (label * 91) % 224),
            static_cast<std::uint8_t>(32 + (label * 151) % 224)};
}

LabelMap decode_palette(RgbImage const& image) {
    static auto const lookup = [] {
        std::map<std::array<std::uint8_t, 3>, Label> m;
        for (int l = 0; l < kPaletteSize; ++l) m[palette_color(static_cast<Label>(l))] = static_cast<Label>(l);
        return m;
    }();
    LabelMap out(image.width, image.height, kPaletteSize, 0);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            auto const* p = image.at(x, y);
            auto it = lookup.find({p[0], p[1], p[2]});
            if (it != lookup.end()) out.set(x, y, it->second);
        }
    }
    return out;
}

std::vector<BinaryMask> background_distractors(LabelMap const& gt, int count, Rng& rng) {
    int const w = gt.width(), h = gt.height();
    std::vector<BinaryMask> out;
    for (int k = 0; k < count; ++k) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            int const rw = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, w / 2)));
            int const rh = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, h / 2)));
            int const rx = static_cast<int>(rng() % static_cast<std::uint64_t>(w - rw + 1));
            int const ry = static_cast<int>(rng() % static_cast<std::uint64_t>(h - rh + 1));
            long long background = 0;
            for (int y = ry; y < ry + rh; ++y)
                for (int x = rx; x < rx + rw; ++x) background += gt.at(x, y) == 0;
            if (2 * background > static_cast<long long>(rw) * rh) {
                out.push_back(BinaryMask::filled(w, h, {rx, ry, rw, rh}));
                break;
            }
        }
    }
    return out;
}

Scene make_scene(SceneSpec const& spec) {
    if (spec.width < 1 || spec.height < 1) throw InvalidArgument("scene must be at least 1x1");
    if (spec.class_count < 1 || spec.class_count > kPaletteSize) throw InvalidArgument("scene class count out of range");
    for (auto const& s : spec.shapes) validate_shape(s, spec);

    int const w = spec.width, h = spec.height;
    LabelMap gt(w, h, spec.class_count, 0);
    std::vector<int> owner(static_cast<std::size_t>(w) * h, -1);
    for (std::size_t k = 0; k < spec.shapes.size(); ++k) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (shape_covers(spec.shapes[k], x, y)) {
                    gt.set(x, y, spec.shapes[k].cls);
                    owner[static_cast<std::size_t>(y) * w + x] = static_cast<int>(k);
                }
            }
        }
    }

    Scene scene{RgbImage(w, h), gt, {}, {}};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto const c = palette_color(gt.at(x, y));
            std::copy(c.begin(), c.end(), scene.image.at(x, y));
        }
    }
    for (int c = 0; c < spec.class_count; ++c) {
        ProbabilityMap m(w, h);
        auto plane = gt.labels();
        for (std::size_t i = 0; i < plane.size(); ++i)
            if (plane[i] == c) m.set(static_cast<int>(i % w), static_cast<int>(i / w), 1.0f);
        scene.maps.push_back(box_blur(m, spec.noise_radius));
    }
    for (std::size_t k = 0; k < spec.shapes.size(); ++k) {
        BinaryMask visible(w, h);
        for (std::size_t i = 0; i < owner.size(); ++i)
            if (owner[i] == static_cast<int>(k)) visible.assign(i, true);
        if (!visible.empty()) scene.proposals.proposals.push_back(std::move(visible));
    }
    Rng rng(spec.seed);
    for (auto& d : background_distractors(gt, spec.distractor_count, rng))
        scene.proposals.proposals.push_back(std::move(d));
    return scene;
}

SceneSpec random_scene_spec(Rng& rng, int width, int height, int class_count, int shape_count) {
    if (class_count < 2) throw InvalidArgument("random scene needs at least one foreground class");
    auto uniform = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    SceneSpec spec;
    spec.width = width;
    spec.height = height;
    spec.class_count = class_count;
    spec.seed = rng();
    int const small = std::min(width, height);
    for (int k = 0; k < shape_count; ++k) {
        SceneShape s;
        s.cls = static_cast<Label>(1 + k % (class_count - 1));
        if (rng() % 2 == 0) {
            s.kind = SceneShape::Kind::Rect;
            s.rect.w = uniform(std::max(1, width / 10), std::max(1, width / 4));
            s.rect.h = uniform(std::max(1, height / 10), std::max(1, height / 4));
            s.rect.x = uniform(0, width - s.rect.w);
            s.rect.y = uniform(0, height - s.rect.h);
        } else {
            s.kind = SceneShape::Kind::Disk;
            s.radius = uniform(std::max(1, small / 20), std::max(1, small / 8));
            s.cx = uniform(s.radius, width - 1 - s.radius);
            s.cy = uniform(s.radius, height - 1 - s.radius);
        }
        spec.shapes.push_back(s);
    }
    return spec;
}

BinaryMask oracle_segment(BinaryMask const& gt, ClickSet const& clicks, OracleBehavior behavior) {
    return select_components(connected_components(gt), gt.width(), gt.height(), clicks, behavior);
}

BinaryMask oracle_segment(LabelMap const& gt, ClickSet const& clicks, OracleBehavior behavior) {
    return select_components(label_components(gt), gt.width(), gt.height(), clicks, behavior);
}

std::unique_ptr<ProbabilityMapProvider> make_probability_provider(ProviderHandle const& handle,
                                                                  OracleOptions const&) {
    handle.validate();
    if (handle.backend == Backend::Http) return std::make_unique<HttpProbabilityMapProvider>(handle);
    return std::make_unique<OracleProbabilityMaps>();
}

std::unique_ptr<MaskProposalProvider> make_proposal_provider(ProviderHandle const& handle,
                                                             OracleOptions const& oracle) {
    handle.validate();
    if (handle.backend == Backend::Http) return std::make_unique<HttpMaskProposalProvider>(handle);
    return std::make_unique<OracleProposals>(oracle);
}

std::unique_ptr<PromptableSegmenter> make_segmenter(ProviderHandle const& handle, OracleOptions const& oracle) {
    handle.validate();
    if (handle.backend == Backend::Http) return std::make_unique<HttpSegmenter>(handle);
    return std::make_unique<OracleSegmenter>(oracle.behavior);
}

std::unique_ptr<ClickSuggester> make_click_suggester(ProviderHandle const& handle, OracleOptions const& oracle) {
    handle.validate();
    if (handle.backend == Backend::Http) return std::make_unique<HttpClickSuggester>(handle);
    return std::make_unique<OracleClickSuggester>(oracle.honor_click_budget);
}

} // namespace maskfuse
