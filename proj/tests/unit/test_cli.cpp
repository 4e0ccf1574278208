#include "../support/corpus.hpp"

#include <doctest.h>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(std::string const& args, fs::path const& cwd) {
    auto const cmd = "cd '" + cwd.string() + "' && '" MASKFUSE_CLI "' " + args + " >stdout.txt 2>stderr.txt";
    int const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("cli exit codes and outputs") {
    auto const dir = corpus::scratch("cli");
    corpus::write_ovss(dir, 3, 12, 48);

    CHECK(run("ovss -m ovss.jsonl --output-dir out --record-timing false", dir) == 0);
    auto const report = nlohmann::json::parse(corpus::read_text(dir / "out" / "report.json"));
    for (auto const& [name, d] : report["datasets"].items()) CHECK(d["miou"] == 1.0);
    CHECK(report["config"]["output_dir"] == "out");
    CHECK(corpus::read_text(dir / "stdout.txt").find("report.json") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "class_iou.csv"));

    // Layering: file, then environment, then flags.
    corpus::write_text(dir / "cfg.json", R"({"grid_n": 10, "T": 4, "output_dir": "from_file"})");
    CHECK(run("ovss -m ovss.jsonl --config cfg.json --set T=5", dir) == 0);
    auto const layered = nlohmann::json::parse(corpus::read_text(dir / "from_file" / "report.json"));
    CHECK(layered["config"]["grid_n"] == 10);
    CHECK(layered["config"]["T"] == 5);
    CHECK(run("ovss -m ovss.jsonl --config cfg.json", dir) == 0);
    setenv("MF_GRID_N", "11", 1);
    CHECK(run("ovss -m ovss.jsonl --config cfg.json --output-dir env", dir) == 0);
    unsetenv("MF_GRID_N");
    CHECK(nlohmann::json::parse(corpus::read_text(dir / "env" / "report.json"))["config"]["grid_n"] == 11);

    // Usage and configuration errors exit 2.
    CHECK(run("", dir) == 2);
    CHECK(run("ovss", dir) == 2);
    CHECK(run("ovss -m ovss.jsonl --set nonsense=1", dir) == 2);
    CHECK(run("ovss -m ovss.jsonl --grid-n many", dir) == 2);
    CHECK(run("ovss -m absent.jsonl", dir) == 2);
    corpus::write_text(dir / "broken.jsonl", "{\"image\": \"a.png\"}\n");
    CHECK(run("ovss -m broken.jsonl", dir) == 2);
    CHECK(corpus::read_text(dir / "stderr.txt").find("line 1") != std::string::npos);

    // Provider failures exit 1 with a per-capability diagnostic.
    CHECK(run("ovss -m ovss.jsonl --output-dir down --prob-backend http --prob-endpoint http://127.0.0.1:9 "
              "--max-retries 0",
              dir) == 1);
    CHECK(corpus::read_text(dir / "stderr.txt").find("probability-map:") != std::string::npos);
    CHECK(fs::exists(dir / "down" / "report.json"));

    // clickgen then viz over its traces.
    auto const gt = maskfuse::BinaryMask::filled(32, 32, {4, 4, 12, 9});
    corpus::write_manifest(dir / "masks.jsonl", {corpus::write_mask_item(dir, "m", gt)});
    CHECK(run("clickgen -m masks.jsonl --seed 3 --output-dir cg", dir) == 0);
    CHECK(fs::exists(dir / "cg" / "clicks.jsonl"));
    CHECK(run("viz cg/traces.jsonl --output-dir cg", dir) == 0);
    CHECK(fs::exists(dir / "cg" / "viz" / "000000_step01.png"));
    CHECK(run("refer -m masks.jsonl --output-dir rf", dir) == 0);
    CHECK(run("viz rf/report.json --output-dir rf", dir) == 0);
    CHECK(fs::exists(dir / "rf" / "viz" / "000000.png"));
    CHECK(run("viz missing.json", dir) == 1);
}
