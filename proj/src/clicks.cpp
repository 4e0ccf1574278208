#include "maskfuse/clicks.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace maskfuse {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

/// Cursor over the click text form. Every failure reports its byte offset.
class TextCursor {
  public:
    explicit TextCursor(std::string_view text, std::size_t pos = 0) : text_(text), pos_(pos) {}

    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ >= text_.size(); }
    char peek() const { return done() ? '\0' : text_[pos_]; }

    void skip_space() {
        while (!done() && is_space(text_[pos_])) ++pos_;
    }
    void skip_quotes() {
        while (!done() && (text_[pos_] == '"' || text_[pos_] == '\'' || text_[pos_] == '`')) ++pos_;
    }
    bool consume(char c) {
        skip_space();
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void expect(char c, char const* context) {
        if (!consume(c)) fail(std::string("expected '") + c + "' " + context);
    }
    bool consume_word(std::string_view word) {
        skip_space();
        skip_quotes();
        if (text_.substr(pos_, word.size()) != word) return false;
        pos_ += word.size();
        skip_quotes();
        return true;
    }

    int integer() {
        skip_space();
        auto const start = pos_;
        if (peek() == '-') fail("negative coordinate");
        std::int64_t value = 0;
        while (!done() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            value = value * 10 + (text_[pos_] - '0');
            if (value > std::numeric_limits<int>::max()) fail("coordinate overflows");
            ++pos_;
        }
        if (pos_ == start) fail("expected integer coordinate");
        if (peek() == '.' || peek() == 'e' || peek() == 'E') fail("non-integer coordinate");
        return static_cast<int>(value);
    }

    [[noreturn]] void fail(std::string const& what) const { throw ParseError("click text: " + what, pos_); }

  private:
    std::string_view text_;
    std::size_t pos_;
};

void parse_list(TextCursor& cur, Polarity polarity, ClickSet& out) {
    cur.expect('[', "to open click list");
    if (cur.consume(']')) return;
    do {
        cur.expect('(', "to open coordinate pair");
        int const x = cur.integer();
        cur.expect(',', "between x and y");
        int const y = cur.integer();
        cur.expect(')', "to close coordinate pair");
        out.add({x, y, polarity});
    } while (cur.consume(','));
    cur.expect(']', "to close click list");
}

void check_budget(ClickSet const& clicks, ClickParseOptions const& options) {
    if (options.strict && clicks.size() > options.max_clicks) {
        throw ProtocolViolation("answer carries " + std::to_string(clicks.size()) + " clicks, budget is " +
                                std::to_string(options.max_clicks));
    }
}

std::string strip_think_blocks(std::string_view text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto const open = text.find("<think>", pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        out.append(text.substr(pos, open - pos));
        auto const close = text.find("</think>", open);
        if (close == std::string_view::npos) break;
        pos = close + 8;
    }
    return out;
}

/// End (exclusive) of the bracketed literal starting at `open`, honouring quoted strings.
std::size_t matching_bracket(std::string_view s, std::size_t open) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        char const c = s[i];
        if (quote) {
            if (c == '\\')
                ++i;
            else if (c == quote)
                quote = 0;
            continue;
        }
        if (c == '"' || c == '\'') quote = c;
        else if (c == '[') ++depth;
        else if (c == ']' && --depth == 0) return i + 1;
    }
    return std::string_view::npos;
}

int json_coordinate(nlohmann::json const& entry, char const* key, std::size_t index, std::size_t offset) {
    auto it = entry.find(key);
    if (it == entry.end())
        throw ParseError("click json: entry " + std::to_string(index) + " missing '" + key + "'", offset);
    if (!it->is_number())
        throw ParseError("click json: entry " + std::to_string(index) + " has non-numeric '" + key + "'", offset);
    double const v = it->get<double>();
    if (v < 0 || v != std::floor(v) || v > std::numeric_limits<int>::max())
        throw ParseError("click json: entry " + std::to_string(index) + " has invalid '" + key + "'", offset);
    return static_cast<int>(v);
}

} // namespace

std::string serialize_clicks_text(ClickSet const& clicks) {
    auto list = [](std::vector<Click> const& cs) {
        std::string s = "[";
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (i) s += ", ";
            s += "(" + std::to_string(cs[i].x) + ", " + std::to_string(cs[i].y) + ")";
        }
        return s + "]";
    };
    return "Positive: " + list(clicks.positives) + ", Negative: " + list(clicks.negatives);
}

ClickSet parse_clicks_text(std::string_view text, ClickParseOptions const& options) {
    auto const key = text.find("Positive");
    if (key == std::string_view::npos) throw ParseError("click text: missing 'Positive' key", 0);

    ClickSet out;
    TextCursor cur(text, key);
    cur.consume_word("Positive");
    cur.expect(':', "after 'Positive'");
    parse_list(cur, Polarity::Positive, out);

    cur.consume(',');
    if (cur.consume_word("Negative")) {
        cur.expect(':', "after 'Negative'");
        parse_list(cur, Polarity::Negative, out);
    }
    check_budget(out, options);
    return out;
}

ClickSet parse_clicks_json(std::string_view text, ClickParseOptions const& options) {
    auto const body = strip_think_blocks(text);
    for (auto open = body.find('['); open != std::string::npos; open = body.find('[', open + 1)) {
        auto const end = matching_bracket(body, open);
        if (end == std::string::npos) break;
        auto literal = body.substr(open, end - open);
        auto doc = nlohmann::json::parse(literal, nullptr, false);
        if (doc.is_discarded()) {
            std::replace(literal.begin(), literal.end(), '\'', '"');
            doc = nlohmann::json::parse(literal, nullptr, false);
        }
        if (doc.is_discarded() || !doc.is_array()) continue;

        ClickSet out;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            auto const& entry = doc[i];
            if (!entry.is_object()) throw ParseError("click json: entry " + std::to_string(i) + " is not an object", open);
            out.add({json_coordinate(entry, "x", i, open), json_coordinate(entry, "y", i, open), Polarity::Positive});
        }
        check_budget(out, options);
        return out;
    }
    throw ParseError("click json: no JSON array found", 0);
}

ClickSet parse_clicks_any(std::string_view text, ClickParseOptions const& options) {
    if (text.find("Positive") != std::string_view::npos) return parse_clicks_text(text, options);
    return parse_clicks_json(text, options);
}

Click sample_click(BinaryMask const& e_plus, BinaryMask const& e_minus, Rng& rng, SampleMode mode) {
    BinaryMask const parts[] = {e_plus, e_minus};
    auto const region = mask_union(parts);
    if (region.empty()) throw InvalidArgument("sample_click: both error regions are empty");
    auto const field = distance_transform(region);
    auto const sq = field.squared_values();

    std::size_t chosen = 0;
    if (mode == SampleMode::Argmax) {
        std::int64_t best = -1;
        for (std::size_t i = 0; i < sq.size(); ++i) {
            if (sq[i] > best) {
                best = sq[i];
                chosen = i;
            }
        }
    } else {
        std::vector<double> cumulative(sq.size());
        double total = 0.0;
        for (std::size_t i = 0; i < sq.size(); ++i) {
            total += std::sqrt(static_cast<double>(sq[i]));
            cumulative[i] = total;
        }
        double const u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        chosen = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                          cumulative.begin());
        // The first index whose running total exceeds u always carries weight;
        // only rounding at the very top can run past the end.
        if (chosen >= sq.size()) {
            chosen = sq.size() - 1;
            while (sq[chosen] == 0) --chosen;
        }
    }
    int const x = static_cast<int>(chosen % region.width());
    int const y = static_cast<int>(chosen / region.width());
    return {x, y, e_plus.test(chosen) ? Polarity::Positive : Polarity::Negative};
}

ClickSequence generate_click_sequence(BinaryMask const& gt, SegmentFn const& segment, ClickGenOptions const& options,
                                      Rng& rng) {
    if (gt.empty()) throw InvalidArgument("generate_click_sequence: ground-truth mask is empty");
    if (options.max_clicks < 1) throw InvalidArgument("generate_click_sequence: click budget must be >= 1");
    if (!(options.tau > 0.0 && options.tau <= 1.0))
        throw InvalidArgument("generate_click_sequence: tau must lie in (0, 1]");

    ClickSequence out;
    auto predict = [&](int step) {
        if (out.clicks.empty()) return BinaryMask(gt.width(), gt.height());
        BinaryMask pred;
        try {
            pred = segment(out.clicks);
        } catch (std::exception const& e) {
            throw ClickGenerationError(step, e.what());
        }
        if (!pred.same_shape(gt)) throw ClickGenerationError(step, "segmenter returned a mask of the wrong size");
        return pred;
    };
    auto record = [&](double score) {
        if (!out.trace.steps.empty()) out.trace.steps.back().iou_after = score;
        out.trace.final_iou = score;
    };

    for (int step = 1; step <= options.max_clicks; ++step) {
        auto const pred = predict(step);
        double const score = iou(pred, gt);
        record(score);
        if (score >= options.tau) {
            out.trace.terminated_by = Termination::Threshold;
            return out;
        }
        auto const click = sample_click(mask_difference(gt, pred), mask_difference(pred, gt), rng, options.mode);
        out.clicks.add(click);
        out.order.push_back(click);
        out.trace.steps.push_back({click, 0.0});
    }

    // Score the last click so every trace step carries the IoU it produced.
    double const score = iou(predict(options.max_clicks + 1), gt);
    record(score);
    out.trace.terminated_by = score >= options.tau ? Termination::Threshold : Termination::Budget;
    return out;
}

BinaryMask ensemble_vote(std::span<const BinaryMask> masks, bool ties_foreground) {
    if (masks.empty()) throw InvalidArgument("ensemble_vote: empty mask list");
    auto const& first = masks.front();
    std::vector<std::uint32_t> votes(first.size(), 0);
    for (auto const& m : masks) {
        if (!m.same_shape(first)) throw DimensionError("ensemble_vote: mask sizes differ");
        for (std::size_t i = 0; i < votes.size(); ++i) votes[i] += m.test(i) ? 1 : 0;
    }
    BinaryMask out(first.width(), first.height());
    for (std::size_t i = 0; i < votes.size(); ++i) {
        auto const twice = 2 * static_cast<std::size_t>(votes[i]);
        if (twice > masks.size() || (ties_foreground && twice == masks.size())) out.assign(i, true);
    }
    return out;
}

} // namespace maskfuse
