#pragma once

// Predictive model selection among polynomial regressions: least-squares
// fits, AIC/BIC scores with known noise variance, exact risk by quadrature,
// and the two regime experiments (true model among candidates vs not).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace convlab::predsel {

enum class Design { Uniform, Equispaced };

// Regression function f*(x) on [-1, 1] plus Gaussian noise.
struct TruthSpec {
    enum class Kind { Poly, Abs, Tabulated };

    Kind kind = Kind::Poly;
    std::vector<double> coeffs;                       // Poly: beta_0..beta_k
    std::vector<std::pair<double, double>> table;     // Tabulated: (x, y), sorted by x
    double noise_sigma = 1.0;
    Design design = Design::Uniform;

    static TruthSpec poly(std::vector<double> coeffs, double sigma, Design d = Design::Uniform);
    static TruthSpec abs(double sigma, Design d = Design::Uniform);
    static TruthSpec tabulated(std::vector<std::pair<double, double>> table, double sigma,
                               Design d = Design::Uniform);

    double operator()(double x) const;
    // Degree of the polynomial truth (trailing zeros dropped); nullopt otherwise.
    std::optional<int> degree() const;
    // Points where f* is not smooth; quadrature splits there.
    std::vector<double> breakpoints() const;
    void validate() const;
};

struct PolyModel {
    int degree = 0;
    std::vector<double> coeffs;  // empty until fitted

    double operator()(double x) const;
};

struct Dataset {
    std::vector<double> xs;
    std::vector<double> ys;

    std::size_t size() const { return xs.size(); }
};

struct FitResult {
    PolyModel model;
    double rss = 0.0;
    std::size_t n = 0;
};

// Householder QR on the Vandermonde design. Throws FitError when
// degree + 2 > n or the design is rank-deficient.
FitResult fit_ols(const Dataset& d, int degree);

// Known-variance scores; the parameter count includes the intercept.
double aic_score(const FitResult& fit, double sigma2);
double bic_score(const FitResult& fit, double sigma2);

// Argmin with ties to the smallest index.
std::size_t select(std::span<const double> scores);

// sigma^2 + E[(f*(X) - fhat(X))^2] for X uniform on [-1, 1], by 64-node
// Gauss-Legendre on each smooth piece of f*.
double true_risk(const PolyModel& fit, const TruthSpec& truth);

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n);

Dataset generate(const TruthSpec& truth, std::size_t n, std::uint64_t seed);

struct DegreeScores {
    int degree = 0;
    double rss = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double true_risk = 0.0;
};

struct SelectionReport {
    std::vector<DegreeScores> per_degree;
    int selected_aic = 0;
    int selected_bic = 0;
};

SelectionReport evaluate_candidates(const Dataset& d, const TruthSpec& truth, int min_degree,
                                    int max_degree);

struct RegimeSummary {
    std::size_t reps = 0;
    // Frequencies of picking the exact true degree; set when the truth is a
    // polynomial inside the candidate range.
    std::optional<double> correct_aic;
    std::optional<double> correct_bic;
    // Mean over reps of risk(selected) - min_k risk(fit_k); always >= 0.
    double mean_excess_aic = 0.0;
    double mean_excess_bic = 0.0;
    std::vector<double> excess_aic;
    std::vector<double> excess_bic;
    std::vector<SelectionReport> per_rep;
};

RegimeSummary regime_experiment(const TruthSpec& truth, int min_degree, int max_degree, std::size_t n,
                                 std::size_t reps, std::uint64_t seed);

struct ProbeResult {
    double mean_estimate = 0.0;
    double mean_true_insample_risk = 0.0;
    double relative_bias = 0.0;
};

// Compares R-hat = (rss + 2(k+1) sigma^2) / n with the in-sample risk
// sigma^2 + mean_i (f*(x_i) - fhat(x_i))^2 on a fixed equispaced design.
ProbeResult unbiasedness_probe(const TruthSpec& truth, int degree, std::size_t n, std::size_t reps,
                               std::uint64_t seed);

nlohmann::json to_json(const RegimeSummary& s);

}  // namespace convlab::predsel
