#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace convlab {

// Mixes (seed, tag, index) into an independent substream seed. Adding a new
// tag or index never perturbs the streams of existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

// Portable random source: mt19937_64 plus hand-written transforms, so that a
// given seed yields the same numbers with every standard library (the
// std::*_distribution algorithms are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double exponential(double rate);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace convlab
