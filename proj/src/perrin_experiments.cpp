#include <algorithm>
#include <cmath>
#include <numeric>

#include "convlab/errors.hpp"
#include "convlab/gaussian.hpp"
#include "convlab/perrin.hpp"
#include "convlab/rng.hpp"

namespace convlab::perrin {

ExperimentSample simulate_brownian(double na_true, double c, std::span<const double> times,
                                   std::size_t m_particles, std::uint64_t seed) {
    if (!(na_true > 0.0 && c > 0.0)) throw ConfigError("Brownian simulation needs positive na and c");
    if (m_particles < 2) throw ConfigError("Brownian simulation needs at least 2 particles");
    if (times.empty()) throw ConfigError("Brownian simulation needs observation times");
    ExperimentSample s;
    s.kind = ExperimentSample::Kind::Brownian;
    s.constant = c;
    s.size = m_particles;
    s.times.assign(times.begin(), times.end());
    Rng rng(seed);
    for (double t : times) {
        if (!(t > 0.0)) throw ConfigError("observation times must be positive");
        const double sd = std::sqrt(c / na_true * t);
        double sum = 0.0;
        for (std::size_t i = 0; i < m_particles; ++i) {
            const double d = rng.normal(0.0, sd);
            sum += d * d;
        }
        s.msd.push_back(sum / static_cast<double>(m_particles));
    }
    return s;
}

ExperimentSample simulate_sedimentation(double na_true, double cprime, std::size_t n, std::uint64_t seed) {
    if (!(na_true > 0.0 && cprime > 0.0)) throw ConfigError("sedimentation needs positive na and c'");
    if (n < 2) throw ConfigError("sedimentation needs at least 2 particles");
    ExperimentSample s;
    s.kind = ExperimentSample::Kind::Sediment;
    s.constant = cprime;
    s.size = n;
    Rng rng(seed);
    const double rate = cprime * na_true;
    s.heights.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.heights.push_back(rng.exponential(rate));
    return s;
}

Estimate estimate_interval(const ExperimentSample& sample, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must lie in (0,1)");
    if (sample.size < 2) throw EstimationError("sample size must be at least 2");
    const double z = gaussian::normal_quantile(0.5 + 0.5 * confidence);

    if (sample.kind == ExperimentSample::Kind::Brownian) {
        double stt = 0.0, sty = 0.0, st4 = 0.0;
        for (std::size_t k = 0; k < sample.times.size(); ++k) {
            const double t = sample.times[k];
            stt += t * t;
            sty += t * sample.msd[k];
            st4 += t * t * t * t;
        }
        const double slope = sty / stt;
        if (!(slope > 0.0)) throw EstimationError("non-positive displacement slope");
        // msd(t) is a mean of m scaled chi-square(1) draws: Var = 2 (slope t)^2 / m.
        const double se = slope * std::sqrt(2.0 * st4 / static_cast<double>(sample.size)) / stt;
        const double lo = slope - z * se;
        if (!(lo > 0.0)) throw EstimationError("slope interval reaches zero; N_A interval is unbounded");
        const double c = sample.constant;
        return {c / slope, {c / (slope + z * se), c / lo}};
    }

    const double n = static_cast<double>(sample.heights.size());
    const double mean = std::accumulate(sample.heights.begin(), sample.heights.end(), 0.0) / n;
    if (!(mean > 0.0)) throw EstimationError("non-positive mean height");
    const double rate = 1.0 / mean;
    const double se = rate / std::sqrt(n);
    const double cp = sample.constant;
    return {rate / cp, {(rate - z * se) / cp, (rate + z * se) / cp}};
}

ExperimentalStream experimental_stream(double na, double na_prime, std::span<const std::size_t> schedule,
                                       double confidence, std::uint64_t seed,
                                       const ExperimentConstants& constants) {
    if (!std::is_sorted(schedule.begin(), schedule.end()) ||
        std::adjacent_find(schedule.begin(), schedule.end()) != schedule.end())
        throw ConfigError("sample-size schedule must be strictly increasing");
    ExperimentalStream out;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const auto b = simulate_brownian(na, constants.c, constants.times, schedule[k],
                                         derive_seed(seed, "brownian", k));
        const auto s = simulate_sedimentation(na_prime, constants.cprime, schedule[k],
                                              derive_seed(seed, "sediment", k));
        Prism e{estimate_interval(b, confidence).interval, estimate_interval(s, confidence).interval};
        if (!out.prisms.empty()) {
            const Prism& prev = out.prisms.back();
            e.x = {std::max(e.x.lo, prev.x.lo), std::min(e.x.hi, prev.x.hi)};
            e.y = {std::max(e.y.lo, prev.y.lo), std::min(e.y.hi, prev.y.hi)};
            if (!e.x.valid() || !e.y.valid()) {
                out.truncated_at = k;
                break;
            }
        }
        out.prisms.push_back(e);
    }
    return out;
}

}  // namespace convlab::perrin
