#pragma once

// Stochastic point-null problem: theta = 0 vs theta != 0 from i.i.d.
// Normal(theta, 1) data, decided by thresholding the sample mean.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convlab/framework.hpp"

namespace convlab::gaussian {

struct GaussianWorld {
    double theta = 0.0;
    Verdict truth() const { return theta == 0.0 ? Verdict::Simple : Verdict::Complex; }
};

// Sufficient statistic of a unit-variance sample.
struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
};

// Critical value c(n) on |mean|: FixedZ gives z / sqrt(n), Bic gives
// sqrt(ln n / n).
struct TestRule {
    enum class Kind { FixedZ, Bic };

    Kind kind = Kind::FixedZ;
    double z = 1.96;

    static TestRule fixed_z(double z);
    // 95% confidence-interval rule.
    static TestRule m_dagger() { return fixed_z(1.96); }
    // AIC with one extra free mean: threshold z = sqrt(2 * penalty-per-parameter).
    static TestRule aic();
    static TestRule bic() { return {Kind::Bic, 0.0}; }

    // Throws DomainError for n < 2 under BIC and n < 1 otherwise.
    double critical_value(std::size_t n) const;
    // c(n) * sqrt(n): z, or sqrt(ln n) under BIC.
    double standardized_threshold(std::size_t n) const;
    std::string name() const;
};

// Minus twice the maximized log-likelihood plus 2 per free parameter, for
// the point null (no free parameters) and the free-mean model (one).
struct AicScores {
    double simple = 0.0;
    double complex = 0.0;
};

AicScores aic_scores(std::span<const double> sample);

double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate in the far tail.
double normal_sf(double x);
double normal_quantile(double p);

// Complex iff |mean| > c(n); ties go to Simple.
Verdict decide(const TestRule& rule, std::size_t n, double mean);

double truth_prob_analytic(const TestRule& rule, const GaussianWorld& w, std::size_t n);

// Limit of truth_prob_analytic as n -> infinity: 1 except FixedZ at theta = 0,
// where the curve is constant at 2 Phi(z) - 1.
double truth_prob_limit(const TestRule& rule, const GaussianWorld& w);

struct McEstimate {
    double probability = 0.0;
    double standard_error = 0.0;
};

// Frequency of the true verdict over `trials` simulated samples. Trials are
// grouped in fixed blocks with seeds derived from (seed, block), so the
// estimate does not depend on the worker schedule.
McEstimate truth_prob_mc(const TestRule& rule, const GaussianWorld& w, std::size_t n,
                         std::size_t trials, std::uint64_t seed);

struct CurvePoint {
    std::size_t n = 0;
    double truth_prob = 0.0;
    std::optional<double> standard_error;
};

struct ProbCurve {
    TestRule rule;
    double theta = 0.0;
    std::vector<CurvePoint> points;
};

ProbCurve analytic_curve(const TestRule& rule, double theta, std::span<const std::size_t> ns);
ProbCurve mc_curve(const TestRule& rule, double theta, std::span<const std::size_t> ns,
                   std::size_t trials, std::uint64_t seed);

struct ModePair {
    ModeReport high_prob;
    ModeReport prob_one;
};

// HIGH_PROB is judged at the loosest level 1 - max(alphas); PROB_ONE requires
// HIGH_PROB at every level in alphas.
ModeReport high_prob_report(const TestRule& rule, std::span<const double> thetas,
                            std::span<const std::size_t> ns, double alpha);
ModePair classify_mode(const TestRule& rule, std::span<const double> thetas,
                       std::span<const std::size_t> ns, std::span<const double> alphas);

}  // namespace convlab::gaussian
