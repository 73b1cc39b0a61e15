#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "convlab/config.hpp"
#include "convlab/io.hpp"

namespace convlab {

inline constexpr const char* kVersion = "0.1.0";

// One failed acceptance check.
struct Violation {
    std::string module;
    std::string check;
    std::string detail;
};

// Everything a module run produces, before anything touches the disk.
struct ModuleArtifacts {
    std::string module;
    // Tabular outputs keyed by base name ("curves", "domain_OCKHAM", ...).
    std::map<std::string, CsvTable> tables;
    // JSON documents keyed by file name.
    std::map<std::string, nlohmann::json> documents;
    // Long-format plot series keyed by file name under plots/.
    std::map<std::string, CsvTable> plots;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Violation> violations;
};

ModuleArtifacts run_lineworld(const ExperimentConfig& c);
ModuleArtifacts run_gaussian(const ExperimentConfig& c);
ModuleArtifacts run_predsel(const ExperimentConfig& c);
ModuleArtifacts run_perrin(const ExperimentConfig& c);

struct RunResult {
    std::vector<ModuleArtifacts> modules;
    std::vector<std::filesystem::path> files;
    std::vector<Violation> violations;
};

// Runs the selected experiments and writes their outputs plus summary.json,
// the plot files and manifest.json under config.out_dir. An empty experiment
// list writes nothing.
RunResult run(const ExperimentConfig& config);

// Writes the plot series of finished modules under out_dir/plots; returns the paths.
std::vector<std::filesystem::path> emit_plots(const std::vector<ModuleArtifacts>& modules,
                                              const std::filesystem::path& out_dir);

}  // namespace convlab
