#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "convlab/config.hpp"
#include "convlab/errors.hpp"
#include "convlab/io.hpp"
#include "convlab/runner.hpp"

using namespace convlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("convlab-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string config_error(std::string_view raw) {
    try {
        validate_config(raw);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CONVLAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

ExperimentConfig quick_gaussian(const fs::path& out) {
    auto c = validate_config(R"({"experiment": "gaussian", "seed": 1})");
    c.out_dir = out.string();
    c.gaussian.trials = 2000;
    c.gaussian.n_ladder = {10, 100, 1000};
    return c;
}

}  // namespace

TEST_CASE("validate_config") {
    SUBCASE("minimal config gets defaults") {
        const auto c = validate_config(R"({"experiment": "gaussian", "seed": 1})");
        CHECK(c.experiments == std::vector<std::string>{"gaussian"});
        CHECK(c.seed == 1);
        CHECK(c.gaussian.trials == 200000);
        CHECK(c.perrin.grid.step == 0.02);
        CHECK(c.lineworld.ratio == 0.7);
        CHECK(c.predsel.regime_a.reps == 2000);
    }
    SUBCASE("all and lists") {
        CHECK(validate_config(R"({"experiment": "all"})").experiments.size() == 4);
        CHECK(validate_config(R"({"experiment": ["perrin", "lineworld"]})").experiments.size() == 2);
        CHECK(validate_config(R"({"experiment": []})").experiments.empty());
    }
    SUBCASE("range errors name the field") {
        const auto e = config_error(R"({"lineworld": {"ratio": 1.2}})");
        CHECK(e.find("/lineworld/ratio") != std::string::npos);
        CHECK(e.find("(0,1)") != std::string::npos);
        CHECK_FALSE(config_error(R"({"perrin": {"ratio": 0}})").empty());
        CHECK_FALSE(config_error(R"({"gaussian": {"trials": 10}})").empty());
        CHECK_FALSE(config_error(R"({"gaussian": {"n_ladder": [100, 10]}})").empty());
        CHECK_FALSE(config_error(R"({"experiment": "nope"})").empty());
        CHECK_FALSE(config_error(R"({"perrin": {"methods": ["WAY9"]}})").empty());
        CHECK_FALSE(config_error(R"({"predsel": {"regime_a": {"truth": "sin"}}})").empty());
    }
    SUBCASE("unknown keys are rejected by name") {
        const auto e = config_error(R"({"gaussian": {"alpha_levelz": 0.1}})");
        CHECK(e.find("alpha_levelz") != std::string::npos);
        CHECK(e.find("/gaussian") != std::string::npos);
        CHECK(config_error(R"({"sed": 1})").find("'sed'") != std::string::npos);
    }
    SUBCASE("type and parse errors") {
        CHECK(config_error(R"({"seed": "one"})").find("/seed") != std::string::npos);
        const auto e = config_error("{\n  \"seed\": 1,\n  oops\n}");
        CHECK(e.find("line 3") != std::string::npos);
    }
    SUBCASE("echo round-trips") {
        const auto c = validate_config(R"({"experiment": "perrin", "seed": 9, "perrin": {"p": 1.2}})");
        const auto d = validate_config(to_json(c).dump());
        CHECK(to_json(d) == to_json(c));
    }
}

TEST_CASE("gaussian run writes the declared schema and is deterministic") {
    const auto a = scratch("det-a"), b = scratch("det-b");
    const auto ra = run(quick_gaussian(a));
    const auto rb = run(quick_gaussian(b));
    CHECK(ra.violations.empty());

    const auto curves = slurp(a / "curves.csv");
    CHECK(curves.rfind("rule,theta,n,truth_prob,se\n", 0) == 0);
    CHECK(curves.find("AIC:mc,") != std::string::npos);
    CHECK(curves.find('\r') == std::string::npos);

    CHECK(sha256_hex(slurp(a / "summary.json")) == sha256_hex(slurp(b / "summary.json")));
    CHECK(slurp(a / "curves.csv") == slurp(b / "curves.csv"));

    const auto plot = slurp(a / "plots" / "gaussian_truth_prob.csv");
    CHECK(plot.find("AIC,0,10,0.8427007929497") != std::string::npos);
    CHECK(plot.find("AIC,0,1000,0.8427007929497") != std::string::npos);

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["version"] == kVersion);
    CHECK(manifest["config"]["experiment"][0] == "gaussian");
    CHECK(manifest["digests"]["curves.csv"] == sha256_hex(curves));
    CHECK(manifest.contains("wall_clock_seconds"));
    for (const auto& p : fs::recursive_directory_iterator(a)) CHECK(p.path().extension() != ".tmp");
}

TEST_CASE("json output format") {
    const auto out = scratch("json");
    auto c = quick_gaussian(out);
    c.format = "json";
    run(c);
    CHECK_FALSE(fs::exists(out / "curves.csv"));
    const auto j = nlohmann::json::parse(slurp(out / "curves.json"));
    REQUIRE(j.is_array());
    CHECK(j[0].contains("truth_prob"));
    CHECK(j[0]["se"].is_null());
}

TEST_CASE("empty experiment list writes nothing") {
    const auto out = scratch("empty");
    auto c = validate_config(R"({"experiment": []})");
    c.out_dir = out.string();
    const auto r = run(c);
    CHECK(r.files.empty());
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("command line exit codes") {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << R"({"experiment": "gaussian", "lineworld": {"ratio": 1.2}})";
    CHECK(cli("--config " + bad.string()) == 2);
    CHECK(cli("--experiment nope --out " + (dir / "x").string()) == 2);
    CHECK(cli("--format xml") == 2);

    const auto empty = dir / "empty.json";
    std::ofstream(empty) << R"({"experiment": []})";
    CHECK(cli("--config " + empty.string() + " --out " + (dir / "none").string()) == 0);
    CHECK_FALSE(fs::exists(dir / "none"));

    CHECK(cli("--experiment lineworld --check --out " + (dir / "lw").string()) == 0);
    CHECK(fs::exists(dir / "lw" / "pointwise.csv"));

    // A WAY1 threshold narrower than the first prisms lets it say SIMPLE at p
    // before suspending, which breaks the stable entry of the theorem pattern.
    const auto off = dir / "off.json";
    std::ofstream(off) << R"({"experiment": "perrin", "perrin": {"methods": ["WAY1"], "way1_eps": 0.1,
        "grid": {"step": 0.1}, "estimator": {"reps": 200, "sizes": [200, 400]}}})";
    CHECK(cli("--config " + off.string() + " --out " + (dir / "off").string()) == 0);
    CHECK(cli("--config " + off.string() + " --check --out " + (dir / "off2").string()) == 1);
    const auto summary = nlohmann::json::parse(slurp(dir / "off2" / "summary.json"));
    CHECK(summary["modules"]["perrin"]["checks"]["scoresheet_pattern"] == false);
}

TEST_CASE("perrin run with all built-ins passes its checks") {
    const auto out = scratch("perrin");
    CHECK(cli("--experiment perrin --grid-step 0.05 --check --out " + out.string()) == 0);
    const auto sheets = nlohmann::json::parse(slurp(out / "scoresheet.json"));
    REQUIRE(sheets.size() == 5);
    CHECK(sheets[0]["method"] == "OCKHAM");
    CHECK(sheets[3]["method"] == "WAY2");
    CHECK(sheets[3]["stable"]["pass"] == false);
    CHECK_FALSE(sheets[3]["stable"]["witnesses"][0]["replay"]["trace"].empty());

    const auto domain = slurp(out / "domain_OCKHAM.csv");
    CHECK(domain.rfind("component,a,b,status,settle_stage\n", 0) == 0);
    std::istringstream map(slurp(out / "plots" / "perrin_domain_map.csv"));
    std::string line;
    std::getline(map, line);
    CHECK(line == "method,component,a,b,code");
    std::set<std::string> codes;
    while (std::getline(map, line)) codes.insert(line.substr(line.rfind(',') + 1));
    CHECK(codes == std::set<std::string>{"0", "1"});
}
