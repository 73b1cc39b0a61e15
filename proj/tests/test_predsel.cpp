#include <cmath>
#include <numeric>

#include "doctest.h"

#include "convlab/errors.hpp"
#include "convlab/predsel.hpp"
#include "generators.hpp"

using namespace convlab;
using namespace convlab::predsel;

namespace {

// Brute-force risk: sigma^2 + mean of (f* - fhat)^2 over uniform draws.
std::pair<double, double> risk_mc(const PolyModel& m, const TruthSpec& t, std::size_t draws, std::uint64_t seed) {
    Rng r(seed);
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = r.uniform(-1, 1);
        const double d = (t(x) - m(x)) * (t(x) - m(x));
        s += d;
        s2 += d * d;
    }
    const double n = static_cast<double>(draws);
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    return {t.noise_sigma * t.noise_sigma + mean, std::sqrt(var / n)};
}

FitResult fake_fit(double rss, int k, std::size_t n) { return {{k, std::vector<double>(k + 1, 0.0)}, rss, n}; }

}  // namespace

TEST_CASE("least squares fits") {
    Dataset d;
    for (int i = 0; i < 10; ++i) {
        const double x = -1 + 0.2 * i;
        d.xs.push_back(x);
        d.ys.push_back(1 + 2 * x);
    }
    const auto f1 = fit_ols(d, 1);
    CHECK(f1.model.coeffs[0] == doctest::Approx(1.0));
    CHECK(f1.model.coeffs[1] == doctest::Approx(2.0));
    CHECK(f1.rss < 1e-8);
    const auto f2 = fit_ols(d, 2);
    CHECK(f2.rss < 1e-8);
    CHECK(std::abs(f2.model.coeffs[2]) < 1e-8);

    const auto noisy = generate(TruthSpec::poly({0.3}, 1.0), 40, 5);
    const auto f0 = fit_ols(noisy, 0);
    const double mean = std::accumulate(noisy.ys.begin(), noisy.ys.end(), 0.0) / 40.0;
    CHECK(f0.model.coeffs[0] == doctest::Approx(mean).epsilon(1e-12));

    CHECK_THROWS_AS(fit_ols(d, 9), FitError);
    const Dataset flat{{0.5, 0.5, 0.5, 0.5}, {1, 2, 3, 4}};
    CHECK_THROWS_AS(fit_ols(flat, 1), FitError);
}

TEST_CASE("scores") {
    CHECK(aic_score(fake_fit(10, 1, 50), 1.0) == doctest::Approx(14.0));
    CHECK(bic_score(fake_fit(10, 1, 50), 1.0) == doctest::Approx(17.824).epsilon(1e-4));
    for (int k = 0; k < 6; ++k) CHECK(aic_score(fake_fit(0, k, 50), 2.5) == doctest::Approx(2.0 * (k + 1)));
}

TEST_CASE("select") {
    const std::vector<double> a{5.0, 4.0, 4.5}, b{4.0, 4.0}, c{3.0};
    CHECK(select(a) == 1);
    CHECK(select(b) == 0);
    CHECK(select(c) == 0);
}

TEST_CASE("Gauss-Legendre rule") {
    const auto [x, w] = gauss_legendre(8);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    // Exact through degree 15.
    for (int p = 0; p <= 15; ++p) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], p);
        const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("true_risk") {
    const PolyModel zero{0, {0.0}};
    CHECK(true_risk(zero, TruthSpec::poly({0.0}, 1.0)) == doctest::Approx(1.0));
    CHECK(true_risk(zero, TruthSpec::poly({0.0, 1.0}, 1.0)) == doctest::Approx(1.0 + 1.0 / 3.0));

    const auto truth = TruthSpec::abs(0.5);
    const auto fit = fit_ols(generate(truth, 500, 3), 2).model;
    const auto [mc, se] = risk_mc(fit, truth, 1000000, 17);
    CHECK(std::abs(true_risk(fit, truth) - mc) <= 3 * se);
}

TEST_CASE("property: quadrature risk matches Monte Carlo") {
    for (int i = 0; i < 12; ++i) {
        auto r = gen::rng_for("risk", i);
        const auto truth = i % 3 == 0 ? TruthSpec::abs(r.uniform(0.1, 1))
                           : i % 3 == 1
                               ? TruthSpec::poly({r.uniform(-1, 1), r.uniform(-2, 2), r.uniform(-1, 1)}, 1.0)
                               : TruthSpec::tabulated({{-1, 0}, {-0.2, 1}, {0.4, -0.5}, {1, 0.3}}, 0.3);
        const int k = static_cast<int>(gen::index(r, 8));
        const auto fit = fit_ols(generate(truth, 60, 100 + i), k).model;
        const auto [mc, se] = risk_mc(fit, truth, 200000, 200 + i);
        CAPTURE(i);
        CHECK(std::abs(true_risk(fit, truth) - mc) <= 3 * se + 1e-12);
    }
}

TEST_CASE("generate") {
    const auto truth = TruthSpec::poly({1, -2, 0.5}, 1e-12);
    const auto d = generate(truth, 100, 1);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.ys[i] == doctest::Approx(truth(d.xs[i])).epsilon(1e-9));
    for (double x : d.xs) CHECK((x >= -1 && x <= 1));

    const auto a = generate(TruthSpec::abs(0.5), 50, 9), b = generate(TruthSpec::abs(0.5), 50, 9);
    CHECK(a.xs == b.xs);
    CHECK(a.ys == b.ys);

    const auto big = generate(TruthSpec::poly({0.0, 1.0}, 0.7), 100000, 4);
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < big.size(); ++i) {
        const double e = big.ys[i] - big.xs[i];
        s += e;
        s2 += e * e;
    }
    const double n = 100000.0;
    const double var = s2 / n - (s / n) * (s / n);
    const double sigma2 = 0.49;
    CHECK(std::abs(var - sigma2) <= 3 * sigma2 * std::sqrt(2.0 / n));

    const auto eq = generate(TruthSpec::poly({0.0}, 1.0, Design::Equispaced), 5, 1);
    CHECK(eq.xs == std::vector<double>{-1, -0.5, 0, 0.5, 1});
    CHECK_THROWS_AS(generate(truth, 1, 1), ConfigError);
}

TEST_CASE("property: rss shrinks with degree and BIC never picks a larger degree") {
    for (int i = 0; i < 60; ++i) {
        auto r = gen::rng_for("nested-rss", i);
        const auto truth = i % 2 ? TruthSpec::abs(r.uniform(0.1, 1))
                                 : TruthSpec::poly({r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)},
                                                   r.uniform(0.1, 1));
        const std::size_t n = 8 + gen::index(r, 200);
        const auto d = generate(truth, n, 500 + i);
        const int max_k = static_cast<int>(std::min<std::size_t>(8, n - 2));
        const auto rep = evaluate_candidates(d, truth, 0, max_k);
        for (std::size_t k = 1; k < rep.per_degree.size(); ++k)
            CHECK(rep.per_degree[k].rss <= rep.per_degree[k - 1].rss + 1e-9);
        CHECK(rep.selected_bic <= rep.selected_aic);
    }
}

TEST_CASE("regime experiments") {
    SUBCASE("a single candidate is always correct") {
        const auto s = regime_experiment(TruthSpec::poly({1, -2, 0.5}, 1.0), 2, 2, 100, 100, 3);
        CHECK(*s.correct_aic == 1.0);
        CHECK(*s.correct_bic == 1.0);
        CHECK(s.mean_excess_aic == 0.0);
    }
    SUBCASE("excess risk is non-negative and reproducible") {
        const auto s = regime_experiment(TruthSpec::abs(0.5), 0, 6, 200, 100, 8);
        const auto t = regime_experiment(TruthSpec::abs(0.5), 0, 6, 200, 100, 8);
        CHECK_FALSE(s.correct_aic);
        for (double e : s.excess_aic) CHECK(e >= 0.0);
        CHECK(s.mean_excess_bic == t.mean_excess_bic);
        CHECK(s.per_rep.size() == 100);
    }
    CHECK_THROWS_AS(regime_experiment(TruthSpec::abs(0.5), 0, 6, 200, 99, 8), ConfigError);
}

TEST_CASE("unbiasedness probe") {
    const auto p = unbiasedness_probe(TruthSpec::poly({0.0}, 1.0), 0, 200, 5000, 1);
    CHECK(p.relative_bias <= 0.02);
    CHECK(p.mean_true_insample_risk == doctest::Approx(1.0 + 1.0 / 200).epsilon(0.01));

    // Nearly noiseless: the estimate and the excess risk both vanish.
    const double sigma = 1e-6;
    const auto q = unbiasedness_probe(TruthSpec::poly({0.5, 1.0}, sigma), 1, 50, 200, 2);
    CHECK(q.mean_estimate < 1e-10);
    CHECK(q.mean_true_insample_risk - sigma * sigma < 1e-12);

    CHECK_THROWS_AS(unbiasedness_probe(TruthSpec::abs(1.0), 2, 50, 10, 1), ConfigError);
    CHECK_THROWS_AS(unbiasedness_probe(TruthSpec::poly({0, 0, 1}, 1.0), 1, 50, 10, 1), ConfigError);
}
