#include "convlab/gaussian.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convlab/errors.hpp"
#include "convlab/io.hpp"
#include "convlab/parallel.hpp"
#include "convlab/rng.hpp"

namespace convlab::gaussian {

namespace {

constexpr std::size_t kMcBlock = 4096;
// Above this sample size the Monte Carlo draws the sample mean directly from
// its exact Normal(theta, 1/n) law instead of summing n draws.
constexpr std::size_t kMcRawLimit = 100;

}  // namespace

TestRule TestRule::fixed_z(double z) {
    if (!(std::isfinite(z) && z > 0.0)) throw ConfigError("FIXED_Z requires a positive finite z");
    return {Kind::FixedZ, z};
}

TestRule TestRule::aic() {
    // Free mean beats the point null iff n * mean^2 > 2 * (extra parameters).
    constexpr double penalty_per_parameter = 2.0;
    constexpr double extra_parameters = 1.0;
    return fixed_z(std::sqrt(penalty_per_parameter * extra_parameters));
}

double TestRule::standardized_threshold(std::size_t n) const {
    if (kind == Kind::Bic) {
        if (n < 2) throw DomainError("BIC threshold needs n >= 2 (ln 1 = 0)");
        return std::sqrt(std::log(static_cast<double>(n)));
    }
    if (n < 1) throw DomainError("sample size must be positive");
    return z;
}

double TestRule::critical_value(std::size_t n) const {
    return standardized_threshold(n) / std::sqrt(static_cast<double>(n));
}

std::string TestRule::name() const {
    if (kind == Kind::Bic) return "BIC";
    if (z == aic().z) return "AIC";
    if (z == 1.96) return "M_DAGGER";
    return "FIXED_Z(" + format_double(z) + ")";
}

AicScores aic_scores(std::span<const double> sample) {
    if (sample.empty()) throw DomainError("empty sample");
    const double n = static_cast<double>(sample.size());
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
    double ss0 = 0.0, ss1 = 0.0;
    for (double x : sample) {
        ss0 += x * x;
        ss1 += (x - mean) * (x - mean);
    }
    const double log2pi = std::log(2.0 * M_PI);
    return {ss0 + n * log2pi, ss1 + n * log2pi + 2.0};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0,1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

Verdict decide(const TestRule& rule, std::size_t n, double mean) {
    return std::abs(mean) > rule.critical_value(n) ? Verdict::Complex : Verdict::Simple;
}

double truth_prob_analytic(const TestRule& rule, const GaussianWorld& w, std::size_t n) {
    const double k = rule.standardized_threshold(n);
    const double shift = w.theta * std::sqrt(static_cast<double>(n));
    // mean * sqrt(n) ~ Normal(shift, 1); reject when it leaves [-k, k].
    const double reject = normal_sf(k - shift) + normal_sf(k + shift);
    return w.theta == 0.0 ? 1.0 - reject : reject;
}

double truth_prob_limit(const TestRule& rule, const GaussianWorld& w) {
    if (w.theta == 0.0 && rule.kind == TestRule::Kind::FixedZ) return 1.0 - 2.0 * normal_sf(rule.z);
    return 1.0;
}

McEstimate truth_prob_mc(const TestRule& rule, const GaussianWorld& w, std::size_t n,
                         std::size_t trials, std::uint64_t seed) {
    if (trials < 1000) throw ConfigError("Monte Carlo needs at least 1000 trials");
    const double c = rule.critical_value(n);
    const Verdict truth = w.truth();
    const std::size_t blocks = (trials + kMcBlock - 1) / kMcBlock;
    std::vector<std::size_t> hits(blocks, 0);
    const double sd_mean = 1.0 / std::sqrt(static_cast<double>(n));

    parallel_for(blocks, [&](std::size_t b) {
        Rng rng(derive_seed(seed, "gaussian-mc", b));
        const std::size_t begin = b * kMcBlock;
        const std::size_t end = std::min(trials, begin + kMcBlock);
        std::size_t h = 0;
        for (std::size_t t = begin; t < end; ++t) {
            double mean;
            if (n <= kMcRawLimit) {
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) sum += rng.normal(w.theta, 1.0);
                mean = sum / static_cast<double>(n);
            } else {
                mean = rng.normal(w.theta, sd_mean);
            }
            const Verdict v = std::abs(mean) > c ? Verdict::Complex : Verdict::Simple;
            if (v == truth) ++h;
        }
        hits[b] = h;
    });

    const double p = static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::size_t{0})) /
                     static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

ProbCurve analytic_curve(const TestRule& rule, double theta, std::span<const std::size_t> ns) {
    ProbCurve c{rule, theta, {}};
    for (std::size_t n : ns) c.points.push_back({n, truth_prob_analytic(rule, {theta}, n), std::nullopt});
    return c;
}

ProbCurve mc_curve(const TestRule& rule, double theta, std::span<const std::size_t> ns,
                   std::size_t trials, std::uint64_t seed) {
    ProbCurve c{rule, theta, {}};
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const auto est = truth_prob_mc(rule, {theta}, ns[i], trials, derive_seed(seed, rule.name(), i));
        c.points.push_back({ns[i], est.probability, est.standard_error});
    }
    return c;
}

ModeReport high_prob_report(const TestRule& rule, std::span<const double> thetas,
                            std::span<const std::size_t> ns, double alpha) {
    if (thetas.empty() || ns.empty()) throw ConfigError("theta and n grids must be non-empty");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (!std::is_sorted(ns.begin(), ns.end())) throw ConfigError("n grid must be increasing");

    ModeReport report{Mode::HighProb, true, {}, {}};
    report.metrics["alpha"] = alpha;
    const double level = 1.0 - alpha;
    for (double theta : thetas) {
        const double limit = truth_prob_limit(rule, {theta});
        // Earliest grid n from which the curve stays at or above the level.
        std::optional<std::size_t> reach;
        for (std::size_t i = ns.size(); i-- > 0;) {
            if (truth_prob_analytic(rule, {theta}, ns[i]) < level) break;
            reach = ns[i];
        }
        const std::string key = "theta=" + format_double(theta);
        report.metrics[key + ":limit"] = limit;
        report.metrics[key + ":reach_n"] = reach ? static_cast<double>(*reach) : -1.0;
        if (limit < level) {
            const std::size_t n_last = ns.back();
            report.fail({rule.name() + " truth probability at theta=" + format_double(theta) +
                             " tends to " + format_double(limit) + " < " + format_double(level),
                         {{"rule", rule.name()},
                          {"theta", theta},
                          {"n", n_last},
                          {"truth_prob", truth_prob_analytic(rule, {theta}, n_last)},
                          {"limit", limit},
                          {"alpha", alpha}}});
        }
    }
    return report;
}

ModePair classify_mode(const TestRule& rule, std::span<const double> thetas,
                       std::span<const std::size_t> ns, std::span<const double> alphas) {
    if (alphas.empty()) throw ConfigError("alpha grid must be non-empty");
    const double loosest = *std::max_element(alphas.begin(), alphas.end());
    ModePair out{high_prob_report(rule, thetas, ns, loosest), {Mode::ProbOne, true, {}, {}}};
    for (double a : alphas) {
        auto r = high_prob_report(rule, thetas, ns, a);
        for (auto& w : r.witnesses) out.prob_one.fail(std::move(w));
    }
    return out;
}

}  // namespace convlab::gaussian
