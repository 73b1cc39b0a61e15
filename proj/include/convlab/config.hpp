#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "convlab/errors.hpp"
#include "convlab/perrin.hpp"
#include "convlab/stream.hpp"

namespace convlab {

struct LineworldConfig {
    double delta0 = 1.0;
    double ratio = 0.7;
    std::size_t horizon = 60;
    double theta_min = -0.5;
    double theta_max = 0.5;
    double theta_step = 0.01;
    // One stream per entry; an empty offset list is the centered stream.
    std::vector<std::vector<double>> drifts = {{}, {0.5}, {-0.5}};
    std::vector<double> uniform_lengths = {1.0, 0.1, 0.01};
    std::size_t razor_stages = 60;
    std::size_t razor_continuation = 120;
};

struct GaussianConfig {
    std::vector<double> thetas = {0.0, 0.1, 0.5};
    std::vector<std::size_t> n_ladder = {10, 100, 1000, 10000, 100000, 1000000};
    std::size_t trials = 200000;
    // Monte Carlo runs only for ladder sizes up to this bound.
    std::size_t mc_max_n = 1000000;
    std::vector<double> alphas = {0.16, 0.05, 0.01, 0.001};
};

struct RegimeConfig {
    std::string truth = "poly";  // poly | abs
    std::vector<double> coeffs;
    double sigma = 1.0;
    int min_degree = 0;
    int max_degree = 6;
    std::size_t reps = 2000;
};

struct ProbeConfig {
    std::vector<double> coeffs = {0.0};
    double sigma = 1.0;
    int degree = 0;
    std::size_t reps = 5000;
    std::vector<std::size_t> ladder = {50, 200, 400};
    std::size_t seeds = 5;
};

struct PredselConfig {
    std::size_t n = 500;
    RegimeConfig regime_a{"poly", {1.0, -2.0, 0.5}, 1.0, 0, 6, 2000};
    RegimeConfig regime_b{"abs", {}, 0.5, 0, 12, 1000};
    ProbeConfig probe;
};

struct EstimatorConfig {
    double na = 1.0;
    double na_prime = 1.0;
    double c = 1.0;
    double cprime = 1.0;
    std::vector<double> times = {1.0, 2.0, 3.0, 4.0, 5.0};
    std::size_t reps = 1000;
    std::vector<std::size_t> sizes = {250, 500, 1000, 2000};
    double confidence = 0.95;
};

struct PerrinConfig {
    perrin::Grid grid;
    std::size_t horizon = 40;
    double delta0 = 1.0;
    double ratio = 0.6;
    std::vector<std::string> methods = {"OCKHAM", "ANTI_REALIST", "WAY1", "WAY2", "WAY3"};
    double p = 1.0;
    double way1_eps = 3.0;
    double way2_delta0 = 0.1;
    double way3_delta0 = 3.0;
    EstimatorConfig estimator;
};

struct ExperimentConfig {
    std::vector<std::string> experiments = {"lineworld", "gaussian", "predsel", "perrin"};
    std::uint64_t seed = 1;
    std::string out_dir = "convlab-out";
    bool check = false;
    std::string format = "csv";
    LineworldConfig lineworld;
    GaussianConfig gaussian;
    PredselConfig predsel;
    PerrinConfig perrin;

    bool runs(std::string_view experiment) const;
    // Re-runs the range checks, e.g. after command-line overrides.
    void validate() const;
};

// Parses JSON configuration text, applies defaults, rejects unknown keys and
// range-checks every value. Errors name the line/column or the field path.
ExperimentConfig validate_config(std::string_view raw);

nlohmann::json to_json(const ExperimentConfig& c);

perrin::Method make_perrin_method(const PerrinConfig& c, std::string_view name);

}  // namespace convlab
