#include "maskfuse/contrastive.hpp"

#include "maskfuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace maskfuse {

namespace {

constexpr double kPixelThreshold = 0.5;
constexpr double kSelectionThreshold = 0.5;

std::string trim(std::string_view s) {
    auto const b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto const e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

void require_same_size(BinaryMask const& m, int w, int h, char const* op) {
    if (m.width() != w || m.height() != h) throw DimensionError(std::string(op) + ": raster sizes differ");
}

} // namespace

ClassPrompts::ClassPrompts(std::vector<std::string> names, Label background_index)
    : names_(std::move(names)), background_(background_index) {
    if (names_.empty()) throw InvalidArgument("class prompt list is empty");
    if (background_ >= names_.size()) throw InvalidArgument("background index out of range");
    std::set<std::string> seen;
    for (auto const& n : names_) {
        if (n.empty()) throw InvalidArgument("empty class name");
        if (!seen.insert(n).second) throw InvalidArgument("duplicate class name '" + n + "'");
    }
}

ClassPrompts ClassPrompts::parse(std::string_view text) {
    std::vector<std::string> names;
    long background = 0;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= text.size()) {
        auto const end = std::min(text.find('\n', pos), text.size());
        auto line = trim(text.substr(pos, end - pos));
        if (first && line.rfind("#background=", 0) == 0) {
            auto const value = line.substr(12);
            char* stop = nullptr;
            background = std::strtol(value.c_str(), &stop, 10);
            if (value.empty() || *stop != '\0' || background < 0)
                throw ParseError("bad background index '" + value + "'", pos + 12);
        } else if (!line.empty()) {
            names.push_back(std::move(line));
        }
        first = false;
        pos = end + 1;
    }
    if (background >= static_cast<long>(names.size()))
        throw ParseError("background index " + std::to_string(background) + " beyond class list", 0);
    return ClassPrompts(std::move(names), static_cast<Label>(background));
}

ClassPrompts ClassPrompts::load(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open class prompt file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

BinaryMask select_masks(ProbabilityMap const& prob, ProposalSet const& proposals) {
    BinaryMask merged(prob.width(), prob.height());
    auto words = merged.words();
    for (auto const& m : proposals.proposals) {
        require_same_size(m, prob.width(), prob.height(), "select_masks");
        if (m.empty()) continue;
        if (fraction_above(m, prob, kPixelThreshold) > kSelectionThreshold) {
            auto src = m.words();
            for (std::size_t i = 0; i < words.size(); ++i) words[i] |= src[i];
        }
    }
    return merged;
}

LabelMap pixel_argmax(std::span<const ProbabilityMap> maps, ClassPrompts const& prompts) {
    if (maps.empty()) throw InvalidArgument("pixel_argmax: no probability maps");
    if (static_cast<int>(maps.size()) != prompts.size())
        throw DimensionError("pixel_argmax: " + std::to_string(maps.size()) + " maps for " +
                             std::to_string(prompts.size()) + " classes");
    int const w = maps[0].width(), h = maps[0].height();
    for (auto const& m : maps)
        if (m.width() != w || m.height() != h) throw DimensionError("pixel_argmax: map sizes differ");

    std::vector<Label> labels(static_cast<std::size_t>(w) * h, 0);
    std::vector<float> best(maps[0].values().begin(), maps[0].values().end());
    for (std::size_t c = 1; c < maps.size(); ++c) {
        auto values = maps[c].values();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (values[i] > best[i]) {
                best[i] = values[i];
                labels[i] = static_cast<Label>(c);
            }
        }
    }
    return LabelMap(w, h, prompts.size(), prompts.background_index(), std::move(labels));
}

Label dominant_class(BinaryMask const& mask, LabelMap const& labels) {
    require_same_size(mask, labels.width(), labels.height(), "dominant_class");
    std::vector<std::size_t> counts(static_cast<std::size_t>(labels.class_count()), 0);
    auto plane = labels.labels();
    std::size_t total = 0;
    for (std::size_t i = 0; i < plane.size(); ++i) {
        if (mask.test(i)) {
            ++counts[plane[i]];
            ++total;
        }
    }
    if (total == 0) throw InvalidArgument("dominant_class: empty mask");
    return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

LabelMap compose_multiclass(ProposalSet const& proposals, LabelMap const& labels, ClassPrompts const& prompts,
                            UncoveredPolicy uncovered) {
    if (labels.class_count() != prompts.size())
        throw DimensionError("compose_multiclass: label map and prompts disagree on class count");
    int const w = labels.width(), h = labels.height();
    Label const bg = prompts.background_index();

    std::vector<std::size_t> areas(proposals.proposals.size());
    for (std::size_t k = 0; k < areas.size(); ++k) {
        require_same_size(proposals.proposals[k], w, h, "compose_multiclass");
        areas[k] = proposals.proposals[k].count();
    }
    std::vector<std::size_t> order(areas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return areas[a] > areas[b]; });

    std::vector<Label> out(static_cast<std::size_t>(w) * h, bg);
    std::vector<bool> painted(out.size(), false);
    for (auto k : order) {
        if (areas[k] == 0) continue;
        auto const& m = proposals.proposals[k];
        Label const cls = dominant_class(m, labels);
        if (cls == bg) continue;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (m.test(i)) {
                out[i] = cls;
                painted[i] = true;
            }
        }
    }
    if (uncovered == UncoveredPolicy::PixelArgmax) {
        auto plane = labels.labels();
        for (std::size_t i = 0; i < out.size(); ++i)
            if (!painted[i]) out[i] = plane[i];
    }
    return LabelMap(w, h, prompts.size(), bg, std::move(out));
}

TokenMatrix debias_tokens(TokenMatrix const& tokens, double scale) {
    if (!std::isfinite(scale)) throw InvalidArgument("debias scale must be finite");
    if (static_cast<int>(tokens.cls.size()) != tokens.cols ||
        tokens.values.size() != static_cast<std::size_t>(tokens.rows) * tokens.cols)
        throw DimensionError("token matrix shape does not match its storage");
    TokenMatrix out = tokens;
    for (int r = 0; r < tokens.rows; ++r) {
        for (int c = 0; c < tokens.cols; ++c) {
            auto& v = out.values[static_cast<std::size_t>(r) * tokens.cols + c];
            v = static_cast<float>(static_cast<double>(v) - scale * tokens.cls[c]);
        }
    }
    return out;
}

} // namespace maskfuse
