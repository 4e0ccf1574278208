// maskfuse command line: ovss, refer, clickgen, eval, viz.
//
// Settings are layered: built-in defaults, then --config FILE, then MF_<KEY>
// environment variables, then explicit flags (--<key> VALUE or --set key=value).

#include "maskfuse/pipelines.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

using namespace maskfuse;

struct Common {
    std::string config_path;
    std::string manifest;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags; // config key -> raw text
    std::optional<std::uint64_t> seed;
    bool fail_fast = false;
    bool strict = false;
};

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

void add_common(CLI::App* cmd, Common& c, bool needs_manifest) {
    cmd->add_option("--config", c.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
    if (needs_manifest) cmd->add_option("-m,--manifest", c.manifest, "JSON-lines manifest")->required();
    cmd->add_option("--set", c.sets, "Override a config key (key=value), repeatable");
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_flag("--fail-fast", c.fail_fast, "Stop at the first failed item and exit 1");
    cmd->add_flag("--strict", c.strict, "Enforce the click budget; any failed item exits 1");
    auto const keys = config_to_json(RunConfig{}, true);
    for (auto const& [key, value] : keys.items()) {
        if (key == "seed" || key == "strict" || key == "fail_fast") continue;
        cmd->add_option_function<std::string>(
            flag_name(key), [&c, key = key](std::string const& v) { c.flags[key] = v; }, "Config key '" + key + "'");
    }
}

RunConfig resolve(Common const& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
    apply_env_overrides(cfg, process_env());
    for (auto const& [key, text] : c.flags) set_config_string(cfg, key, text);
    for (auto const& kv : c.sets) {
        auto const eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_string(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.fail_fast) cfg.fail_fast = true;
    if (c.strict) cfg.strict = true;
    validate(cfg);
    return cfg;
}

int report_result(RunConfig const& cfg, RunResult const& result) {
    save_report(cfg, result);
    for (auto const& d : result.diagnostics) std::cerr << "maskfuse: " << d << '\n';
    std::cout << (std::filesystem::path(cfg.output_dir) / "report.json").string() << '\n';
    return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free segmentation pipelines over pluggable foundation-model providers"};
    app.require_subcommand(1);

    Common ovss_c, refer_c, clickgen_c, eval_c, viz_c;
    std::string viz_input;
    auto* ovss = app.add_subcommand("ovss", "Multi-class open-vocabulary segmentation");
    auto* refer = app.add_subcommand("refer", "Referring / reasoning segmentation via click prompts");
    auto* clickgen = app.add_subcommand("clickgen", "Convert ground-truth masks into click sequences");
    auto* eval = app.add_subcommand("eval", "Score existing predictions");
    auto* viz = app.add_subcommand("viz", "Render overlays for a report or a traces file");
    add_common(ovss, ovss_c, true);
    add_common(refer, refer_c, true);
    add_common(clickgen, clickgen_c, true);
    add_common(eval, eval_c, true);
    add_common(viz, viz_c, false);
    viz->add_option("input", viz_input, "report.json or traces.jsonl")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto const* active = app.get_subcommands().front();
    auto const name = active->get_name();
    Common const& common = name == "ovss"       ? ovss_c
                           : name == "refer"    ? refer_c
                           : name == "clickgen" ? clickgen_c
                           : name == "eval"     ? eval_c
                                                : viz_c;

    RunConfig cfg;
    std::vector<ManifestRecord> manifest;
    try {
        cfg = resolve(common);
        if (name != "viz") manifest = load_manifest(common.manifest);
    } catch (std::exception const& e) {
        std::cerr << "maskfuse: " << e.what() << '\n';
        return 2;
    }

    try {
        if (name == "eval") return report_result(cfg, run_eval(cfg, manifest, std::cerr));
        auto providers = make_providers(cfg);
        if (name == "ovss") return report_result(cfg, run_ovss(cfg, manifest, providers, std::cerr));
        if (name == "refer") return report_result(cfg, run_refer(cfg, manifest, providers, std::cerr));
        if (name == "clickgen") return report_result(cfg, run_clickgen(cfg, manifest, providers, std::cerr));
        for (auto const& p : run_viz(cfg, viz_input, providers, std::cerr)) std::cout << p.string() << '\n';
        return 0;
    } catch (std::exception const& e) {
        std::cerr << "maskfuse: " << e.what() << '\n';
        return 1;
    }
}
