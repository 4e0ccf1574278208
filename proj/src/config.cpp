#include "maskfuse/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <vector>

namespace maskfuse {

using nlohmann::json;

namespace {

struct Field {
    std::string key;
    std::function<json(RunConfig const&)> get;
    std::function<void(RunConfig&, json const&)> set;
    bool secret = false;
};

int as_int(json const& v, std::string const& key) {
    if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    return v.get<int>();
}

double as_double(json const& v, std::string const& key) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
}

bool as_bool(json const& v, std::string const& key) {
    if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
    return v.get<bool>();
}

std::uint64_t as_u64(json const& v, std::string const& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
}

std::string as_string(json const& v, std::string const& key) {
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

template <class T> Field int_field(std::string key, T RunConfig::*member) {
    return {key, [member](RunConfig const& c) { return json(c.*member); },
            [member, key](RunConfig& c, json const& v) { c.*member = static_cast<T>(as_int(v, key)); }};
}

Field double_field(std::string key, double RunConfig::*member) {
    return {key, [member](RunConfig const& c) { return json(c.*member); },
            [member, key](RunConfig& c, json const& v) { c.*member = as_double(v, key); }};
}

Field bool_field(std::string key, bool RunConfig::*member) {
    return {key, [member](RunConfig const& c) { return json(c.*member); },
            [member, key](RunConfig& c, json const& v) { c.*member = as_bool(v, key); }};
}

std::vector<ProviderHandle*> handles(RunConfig& c) { return {&c.probability, &c.proposals, &c.segment, &c.clicks}; }

std::vector<Field> const& fields() {
    static std::vector<Field> const table = [] {
        std::vector<Field> f;
        auto handle_keys = [&f](std::string const& prefix, ProviderHandle RunConfig::*member) {
            f.push_back({prefix + "_backend",
                         [member](RunConfig const& c) { return json(std::string(to_string((c.*member).backend))); },
                         [member, prefix](RunConfig& c, json const& v) {
                             try {
                                 (c.*member).backend = backend_from_string(as_string(v, prefix + "_backend"));
                             } catch (InvalidArgument const& e) {
                                 throw ConfigError(e.what());
                             }
                         }});
            f.push_back({prefix + "_endpoint", [member](RunConfig const& c) { return json((c.*member).endpoint); },
                         [member, prefix](RunConfig& c, json const& v) {
                             (c.*member).endpoint = as_string(v, prefix + "_endpoint");
                         }});
        };
        handle_keys("prob", &RunConfig::probability);
        handle_keys("proposals", &RunConfig::proposals);
        handle_keys("segment", &RunConfig::segment);
        handle_keys("clicks", &RunConfig::clicks);

        f.push_back({"timeout_s", [](RunConfig const& c) { return json(c.probability.timeout_s); },
                     [](RunConfig& c, json const& v) {
                         for (auto* h : handles(c)) h->timeout_s = as_double(v, "timeout_s");
                     }});
        f.push_back({"concurrency_limit", [](RunConfig const& c) { return json(c.probability.concurrency_limit); },
                     [](RunConfig& c, json const& v) {
                         for (auto* h : handles(c)) h->concurrency_limit = as_int(v, "concurrency_limit");
                     }});
        f.push_back({"max_retries", [](RunConfig const& c) { return json(c.probability.max_retries); },
                     [](RunConfig& c, json const& v) {
                         for (auto* h : handles(c)) h->max_retries = as_int(v, "max_retries");
                     }});
        f.push_back({"retry_backoff_s", [](RunConfig const& c) { return json(c.probability.backoff_s); },
                     [](RunConfig& c, json const& v) {
                         for (auto* h : handles(c)) h->backoff_s = as_double(v, "retry_backoff_s");
                     }});
        f.push_back({"api_token", [](RunConfig const& c) { return json(c.probability.bearer_token); },
                     [](RunConfig& c, json const& v) {
                         for (auto* h : handles(c)) h->bearer_token = as_string(v, "api_token");
                     },
                     true});

        f.push_back(int_field("grid_n", &RunConfig::grid_n));
        f.push_back(int_field("window", &RunConfig::window));
        f.push_back(int_field("stride", &RunConfig::stride));
        f.push_back(int_field("tile_cap", &RunConfig::tile_cap));
        f.push_back(int_field("clip_long_side", &RunConfig::clip_long_side));
        f.push_back(int_field("T", &RunConfig::T));
        f.push_back(double_field("tau", &RunConfig::tau));
        f.push_back(int_field("clicks_max", &RunConfig::clicks_max));
        f.push_back(bool_field("vote_ge", &RunConfig::vote_ge));
        f.push_back({"seed", [](RunConfig const& c) { return json(c.seed); },
                     [](RunConfig& c, json const& v) { c.seed = as_u64(v, "seed"); }});
        f.push_back({"mode", [](RunConfig const& c) { return json(c.mode == SampleMode::Sample ? "sample" : "argmax"); },
                     [](RunConfig& c, json const& v) {
                         auto const s = as_string(v, "mode");
                         if (s == "sample") c.mode = SampleMode::Sample;
                         else if (s == "argmax") c.mode = SampleMode::Argmax;
                         else throw ConfigError("config key 'mode' must be 'sample' or 'argmax'");
                     }});
        f.push_back({"output_dir", [](RunConfig const& c) { return json(c.output_dir); },
                     [](RunConfig& c, json const& v) { c.output_dir = as_string(v, "output_dir"); }});
        f.push_back(int_field("workers", &RunConfig::workers));
        f.push_back(double_field("debias_scale", &RunConfig::debias_scale));
        f.push_back({"uncovered",
                     [](RunConfig const& c) {
                         return json(c.uncovered == UncoveredPolicy::Background ? "background" : "pixel-argmax");
                     },
                     [](RunConfig& c, json const& v) {
                         auto const s = as_string(v, "uncovered");
                         if (s == "background") c.uncovered = UncoveredPolicy::Background;
                         else if (s == "pixel-argmax") c.uncovered = UncoveredPolicy::PixelArgmax;
                         else throw ConfigError("config key 'uncovered' must be 'background' or 'pixel-argmax'");
                     }});
        f.push_back(bool_field("strict", &RunConfig::strict));
        f.push_back(bool_field("fail_fast", &RunConfig::fail_fast));
        f.push_back(bool_field("record_timing", &RunConfig::record_timing));

        f.push_back({"oracle_seed", [](RunConfig const& c) { return json(c.oracle.seed); },
                     [](RunConfig& c, json const& v) { c.oracle.seed = as_u64(v, "oracle_seed"); }});
        f.push_back({"oracle_distractors", [](RunConfig const& c) { return json(c.oracle.distractors); },
                     [](RunConfig& c, json const& v) { c.oracle.distractors = as_int(v, "oracle_distractors"); }});
        f.push_back({"oracle_exact_proposals", [](RunConfig const& c) { return json(c.oracle.exact_proposals); },
                     [](RunConfig& c, json const& v) { c.oracle.exact_proposals = as_bool(v, "oracle_exact_proposals"); }});
        f.push_back({"oracle_behavior",
                     [](RunConfig const& c) { return json(c.oracle.behavior == OracleBehavior::Ideal ? "ideal" : "erode1"); },
                     [](RunConfig& c, json const& v) {
                         auto const s = as_string(v, "oracle_behavior");
                         if (s == "ideal") c.oracle.behavior = OracleBehavior::Ideal;
                         else if (s == "erode1") c.oracle.behavior = OracleBehavior::Erode1;
                         else throw ConfigError("config key 'oracle_behavior' must be 'ideal' or 'erode1'");
                     }});
        f.push_back({"oracle_honor_budget", [](RunConfig const& c) { return json(c.oracle.honor_click_budget); },
                     [](RunConfig& c, json const& v) { c.oracle.honor_click_budget = as_bool(v, "oracle_honor_budget"); }});
        return f;
    }();
    return table;
}

Field const& find_field(std::string const& key) {
    for (auto const& f : fields())
        if (f.key == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

} // namespace

json config_to_json(RunConfig const& config, bool include_secrets) {
    json doc = json::object();
    for (auto const& f : fields()) {
        if (f.secret && !include_secrets) {
            doc[f.key] = f.get(config).get<std::string>().empty() ? "" : "***";
            continue;
        }
        doc[f.key] = f.get(config);
    }
    return doc;
}

void set_config_value(RunConfig& config, std::string const& key, json const& value) {
    find_field(key).set(config, value);
}

void set_config_string(RunConfig& config, std::string const& key, std::string const& text) {
    auto const& field = find_field(key);
    auto const current = field.get(RunConfig{});
    json value;
    try {
        if (current.is_boolean()) {
            std::string lower = text;
            std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
            if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") value = true;
            else if (lower == "false" || lower == "0" || lower == "no" || lower == "off") value = false;
            else throw ConfigError("config key '" + key + "' expects a boolean, got '" + text + "'");
        } else if (current.is_number_unsigned()) {
            std::size_t used = 0;
            if (!text.empty() && text[0] == '-') throw ConfigError("config key '" + key + "' must be non-negative");
            value = static_cast<std::uint64_t>(std::stoull(text, &used));
            if (used != text.size()) throw ConfigError("config key '" + key + "' expects an integer, got '" + text + "'");
        } else if (current.is_number_integer()) {
            std::size_t used = 0;
            value = std::stoi(text, &used);
            if (used != text.size()) throw ConfigError("config key '" + key + "' expects an integer, got '" + text + "'");
        } else if (current.is_number()) {
            std::size_t used = 0;
            value = std::stod(text, &used);
            if (used != text.size()) throw ConfigError("config key '" + key + "' expects a number, got '" + text + "'");
        } else {
            value = text;
        }
    } catch (std::logic_error const&) {
        throw ConfigError("config key '" + key + "' cannot parse '" + text + "'");
    }
    field.set(config, value);
}

RunConfig config_from_json(json const& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a flat JSON object");
    RunConfig config;
    for (auto const& [key, value] : doc.items()) {
        if (value.is_object() || value.is_array()) throw ConfigError("config key '" + key + "' must be a scalar");
        set_config_value(config, key, value);
    }
    return config;
}

RunConfig load_config(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    return config_from_json(doc);
}

void apply_env_overrides(RunConfig& config, EnvLookup const& lookup) {
    for (auto const& f : fields()) {
        std::string name = "MF_" + f.key;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (auto value = lookup(name)) set_config_string(config, f.key, *value);
    }
}

EnvLookup process_env() {
    return [](std::string const& name) -> std::optional<std::string> {
        if (char const* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
    };
}

void validate(RunConfig const& c) {
    auto require = [](bool ok, std::string const& what) {
        if (!ok) throw ConfigError(what);
    };
    require(c.grid_n >= 1, "grid_n must be >= 1");
    require(c.window >= 0, "window must be >= 0");
    require(c.stride >= 1, "stride must be >= 1");
    require(c.tile_cap >= 1, "tile_cap must be >= 1");
    require(c.clip_long_side >= 1, "clip_long_side must be >= 1");
    require(c.T >= 1, "T must be >= 1");
    require(c.tau > 0 && c.tau <= 1, "tau must lie in (0, 1]");
    require(c.clicks_max >= 1, "clicks_max must be >= 1");
    require(c.workers >= 1, "workers must be >= 1");
    require(c.oracle.distractors >= 0, "oracle_distractors must be >= 0");
    for (auto const* h : {&c.probability, &c.proposals, &c.segment, &c.clicks}) {
        try {
            h->validate();
        } catch (InvalidArgument const& e) {
            throw ConfigError(e.what());
        }
    }
}

} // namespace maskfuse
