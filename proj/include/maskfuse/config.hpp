#pragma once

#include "maskfuse/clicks.hpp"
#include "maskfuse/contrastive.hpp"
#include "maskfuse/providers.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace maskfuse {

struct RunConfig {
    ProviderHandle probability{.capability = Capability::ProbabilityMap};
    ProviderHandle proposals{.capability = Capability::MaskProposals};
    ProviderHandle segment{.capability = Capability::PromptableSegment};
    ProviderHandle clicks{.capability = Capability::ClickSuggest};

    int grid_n = 29;
    int window = 224;         // 0 disables sliding-window inference
    int stride = 112;
    int tile_cap = 1024;
    int clip_long_side = 448;
    int T = 6;
    double tau = 0.98;
    int clicks_max = 6;
    bool vote_ge = true;      // ensemble ties count as foreground
    std::uint64_t seed = 0;
    SampleMode mode = SampleMode::Sample;
    std::string output_dir = "out";
    int workers = 1;
    double debias_scale = 1.0; // forwarded to providers via the config echo only
    UncoveredPolicy uncovered = UncoveredPolicy::Background;
    bool strict = false;
    bool fail_fast = false;
    bool record_timing = true;
    OracleOptions oracle;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Flat key/value view. Secrets (the bearer token) are redacted unless asked for.
nlohmann::json config_to_json(RunConfig const& config, bool include_secrets = false);

/// Applies one key. Throws ConfigError for unknown keys or ill-typed values.
void set_config_value(RunConfig& config, std::string const& key, nlohmann::json const& value);
/// Same, parsing `text` according to the key's type.
void set_config_string(RunConfig& config, std::string const& key, std::string const& text);

RunConfig config_from_json(nlohmann::json const& doc);
RunConfig load_config(std::filesystem::path const& path);

using EnvLookup = std::function<std::optional<std::string>(std::string const&)>;
/// Every key may be overridden by `MF_<KEY>` (upper-cased).
void apply_env_overrides(RunConfig& config, EnvLookup const& lookup);
EnvLookup process_env();

/// Validates cross-field constraints (ranges, endpoint presence).
void validate(RunConfig const& config);

} // namespace maskfuse
