// Command-line experiment runner.
//
// Exit codes: 0 success, 1 acceptance-check failure, 2 configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "convlab/config.hpp"
#include "convlab/errors.hpp"
#include "convlab/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw convlab::ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convergence-mode experiments for simplicity-preferring methods"};
    app.set_version_flag("--version", convlab::kVersion);

    std::string config_path;
    std::optional<std::string> out, experiment, format;
    std::optional<std::uint64_t> seed;
    std::optional<double> grid_step;
    std::optional<std::size_t> horizon, trials;
    bool check = false;

    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out, "Output directory");
    app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--experiment", experiment, "lineworld, gaussian, predsel, perrin or all");
    app.add_flag("--check", check, "Exit 1 when an acceptance check fails");
    app.add_option("--grid-step", grid_step, "Perrin grid step");
    app.add_option("--horizon", horizon, "Stage horizon for lineworld and perrin");
    app.add_option("--trials", trials, "Monte Carlo trials for the gaussian curves");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    convlab::ExperimentConfig cfg;
    try {
        cfg = convlab::validate_config(config_path.empty() ? std::string("{}") : slurp(config_path));
        if (out) cfg.out_dir = *out;
        if (seed) cfg.seed = *seed;
        if (experiment) {
            if (*experiment == "all")
                cfg.experiments = {"lineworld", "gaussian", "predsel", "perrin"};
            else
                cfg.experiments = {*experiment};
        }
        if (format) cfg.format = *format;
        if (grid_step) cfg.perrin.grid.step = *grid_step;
        if (horizon) cfg.lineworld.horizon = cfg.perrin.horizon = *horizon;
        if (trials) cfg.gaussian.trials = *trials;
        if (check) cfg.check = true;
        cfg.validate();
    } catch (const convlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        const auto result = convlab::run(cfg);
        for (const auto& m : result.modules)
            std::cout << m.module << ": " << (m.violations.empty() ? "all checks pass" : "checks FAILED") << "\n";
        for (const auto& v : result.violations)
            std::cerr << "violation: " << v.module << "/" << v.check << ": " << v.detail << "\n";
        if (!result.files.empty()) std::cout << "wrote " << result.files.size() << " files to " << cfg.out_dir << "\n";
        return cfg.check && !result.violations.empty() ? 1 : 0;
    } catch (const convlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
