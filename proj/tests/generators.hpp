#pragma once

// Small seeded generators for property tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "convlab/framework.hpp"
#include "convlab/rng.hpp"
#include "convlab/stream.hpp"

namespace gen {

inline constexpr int kCases = 200;

inline convlab::Rng rng_for(const char* property, std::uint64_t i) {
    return convlab::Rng(convlab::derive_seed(20240611, property, i));
}

inline std::size_t index(convlab::Rng& r, std::size_t n) {
    return static_cast<std::size_t>(r.uniform() * static_cast<double>(n)) % n;
}

inline convlab::Verdict verdict(convlab::Rng& r) {
    return static_cast<convlab::Verdict>(index(r, 3));
}

inline std::vector<convlab::Verdict> verdicts(convlab::Rng& r, std::size_t max_len = 30) {
    std::vector<convlab::Verdict> v(1 + index(r, max_len));
    for (auto& x : v) x = verdict(r);
    return v;
}

// True when consecutive offsets (cyclically) keep stage t+1 inside stage t.
inline bool nests(const std::vector<double>& offs, double ratio) {
    for (std::size_t i = 0; i < offs.size(); ++i) {
        const double o = offs[i], next = offs[(i + 1) % offs.size()];
        if (ratio * (1 + next) > 1 + o || ratio * (1 - next) > 1 - o) return false;
    }
    return true;
}

// Geometric stream with up to three cyclic offsets in [-1, 1], admissible by
// construction.
inline convlab::StreamSpec stream(convlab::Rng& r) {
    convlab::StreamSpec s;
    s.delta0 = r.uniform(0.1, 3.0);
    s.ratio = r.uniform(0.2, 0.95);
    const auto k = index(r, 4);
    for (int attempt = 0; attempt < 100; ++attempt) {
        s.offsets.clear();
        const double spread = attempt < 50 ? 1.0 : 0.1;
        for (std::size_t i = 0; i < k; ++i) s.offsets.push_back(r.uniform(-spread, spread));
        if (nests(s.offsets, s.ratio)) return s;
    }
    s.offsets.clear();
    return s;
}

// Stages whose intervals stay well above floating-point resolution at x.
inline std::size_t usable_horizon(const convlab::StreamSpec& s, double x, std::size_t max) {
    std::size_t t = 0;
    while (t < max && s.half_width(t) > 1e-9 * (1.0 + std::abs(x))) ++t;
    return t;
}

}  // namespace gen
