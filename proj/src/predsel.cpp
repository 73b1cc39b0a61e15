#include "convlab/predsel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "convlab/errors.hpp"
#include "convlab/parallel.hpp"
#include "convlab/rng.hpp"

namespace convlab::predsel {

namespace {

constexpr std::size_t kQuadratureNodes = 64;

const std::pair<std::vector<double>, std::vector<double>>& quadrature_rule() {
    static const auto rule = gauss_legendre(kQuadratureNodes);
    return rule;
}

double equispaced_x(std::size_t i, std::size_t n) {
    return n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

TruthSpec TruthSpec::poly(std::vector<double> coeffs, double sigma, Design d) {
    TruthSpec t;
    t.kind = Kind::Poly;
    t.coeffs = std::move(coeffs);
    t.noise_sigma = sigma;
    t.design = d;
    t.validate();
    return t;
}

TruthSpec TruthSpec::abs(double sigma, Design d) {
    TruthSpec t;
    t.kind = Kind::Abs;
    t.noise_sigma = sigma;
    t.design = d;
    t.validate();
    return t;
}

TruthSpec TruthSpec::tabulated(std::vector<std::pair<double, double>> table, double sigma, Design d) {
    TruthSpec t;
    t.kind = Kind::Tabulated;
    t.table = std::move(table);
    t.noise_sigma = sigma;
    t.design = d;
    t.validate();
    return t;
}

void TruthSpec::validate() const {
    if (!(std::isfinite(noise_sigma) && noise_sigma > 0.0))
        throw ConfigError("noise_sigma must be positive and finite");
    for (double c : coeffs)
        if (!std::isfinite(c)) throw ConfigError("truth coefficients must be finite");
    if (kind == Kind::Poly && coeffs.empty()) throw ConfigError("polynomial truth needs coefficients");
    if (kind == Kind::Tabulated) {
        if (table.size() < 2) throw ConfigError("tabulated truth needs at least two points");
        for (std::size_t i = 1; i < table.size(); ++i)
            if (!(table[i].first > table[i - 1].first))
                throw ConfigError("tabulated truth x values must be strictly increasing");
    }
}

double TruthSpec::operator()(double x) const {
    switch (kind) {
        case Kind::Poly: {
            double y = 0.0;
            for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) y = y * x + *it;
            return y;
        }
        case Kind::Abs: return std::abs(x);
        case Kind::Tabulated: {
            if (x <= table.front().first) return table.front().second;
            if (x >= table.back().first) return table.back().second;
            auto hi = std::upper_bound(table.begin(), table.end(), x,
                                       [](double v, const auto& p) { return v < p.first; });
            auto lo = hi - 1;
            const double f = (x - lo->first) / (hi->first - lo->first);
            return lo->second + f * (hi->second - lo->second);
        }
    }
    return 0.0;
}

std::optional<int> TruthSpec::degree() const {
    if (kind != Kind::Poly) return std::nullopt;
    int d = static_cast<int>(coeffs.size()) - 1;
    while (d > 0 && coeffs[static_cast<std::size_t>(d)] == 0.0) --d;
    return d;
}

std::vector<double> TruthSpec::breakpoints() const {
    std::vector<double> out;
    if (kind == Kind::Abs) out.push_back(0.0);
    if (kind == Kind::Tabulated)
        for (const auto& [x, y] : table)
            if (x > -1.0 && x < 1.0) out.push_back(x);
    return out;
}

double PolyModel::operator()(double x) const {
    double y = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) y = y * x + *it;
    return y;
}

FitResult fit_ols(const Dataset& d, int degree) {
    const std::size_t n = d.size();
    if (degree < 0) throw FitError("degree must be non-negative");
    if (d.ys.size() != n) throw FitError("xs and ys differ in length");
    const auto p = static_cast<std::size_t>(degree) + 1;
    if (p + 1 > n) throw FitError("need n >= degree + 2, got n=" + std::to_string(n));

    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            a(i, j) = v;
            v *= d.xs[i];
        }
        y(i) = d.ys[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (static_cast<std::size_t>(qr.rank()) < p)
        throw FitError("rank-deficient design for degree " + std::to_string(degree));
    const Eigen::VectorXd beta = qr.solve(y);

    FitResult r;
    r.model.degree = degree;
    r.model.coeffs.assign(beta.data(), beta.data() + p);
    r.n = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = d.ys[i] - r.model(d.xs[i]);
        r.rss += e * e;
    }
    return r;
}

double aic_score(const FitResult& fit, double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
    return fit.rss / sigma2 + 2.0 * (fit.model.degree + 1);
}

double bic_score(const FitResult& fit, double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
    return fit.rss / sigma2 + (fit.model.degree + 1) * std::log(static_cast<double>(fit.n));
}

std::size_t select(std::span<const double> scores) {
    if (scores.empty()) throw ConfigError("cannot select from an empty score list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] < scores[best]) best = i;
    return best;
}

// Newton iteration on P_n from the Chebyshev-like initial guesses.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
    std::vector<double> x(n), w(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

double true_risk(const PolyModel& fit, const TruthSpec& truth) {
    if (fit.coeffs.empty()) throw FitError("model is not fitted");
    const auto& [nodes, weights] = quadrature_rule();
    std::vector<double> cuts{-1.0};
    for (double b : truth.breakpoints()) cuts.push_back(b);
    cuts.push_back(1.0);

    double integral = 0.0;
    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double mid = 0.5 * (cuts[piece] + cuts[piece + 1]);
        const double half = 0.5 * (cuts[piece + 1] - cuts[piece]);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = mid + half * nodes[i];
            const double e = truth(x) - fit(x);
            s += weights[i] * e * e;
        }
        integral += half * s;
    }
    // Uniform density 1/2 on [-1, 1].
    return truth.noise_sigma * truth.noise_sigma + 0.5 * integral;
}

Dataset generate(const TruthSpec& truth, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ConfigError("dataset needs n >= 2");
    Rng rng(seed);
    Dataset d;
    d.xs.resize(n);
    d.ys.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.xs[i] = truth.design == Design::Uniform ? rng.uniform(-1.0, 1.0) : equispaced_x(i, n);
        d.ys[i] = truth(d.xs[i]) + truth.noise_sigma * rng.normal();
    }
    return d;
}

SelectionReport evaluate_candidates(const Dataset& d, const TruthSpec& truth, int min_degree,
                                    int max_degree) {
    if (min_degree < 0 || max_degree < min_degree) throw ConfigError("invalid candidate degree range");
    const double sigma2 = truth.noise_sigma * truth.noise_sigma;
    SelectionReport rep;
    std::vector<double> aic, bic;
    for (int k = min_degree; k <= max_degree; ++k) {
        const FitResult fit = fit_ols(d, k);
        DegreeScores s{k, fit.rss, aic_score(fit, sigma2), bic_score(fit, sigma2), true_risk(fit.model, truth)};
        aic.push_back(s.aic);
        bic.push_back(s.bic);
        rep.per_degree.push_back(s);
    }
    rep.selected_aic = min_degree + static_cast<int>(select(aic));
    rep.selected_bic = min_degree + static_cast<int>(select(bic));
    return rep;
}

RegimeSummary regime_experiment(const TruthSpec& truth, int min_degree, int max_degree, std::size_t n,
                                 std::size_t reps, std::uint64_t seed) {
    if (reps < 100) throw ConfigError("regime experiment needs reps >= 100");
    if (n < static_cast<std::size_t>(max_degree) + 2) throw ConfigError("n must be at least max degree + 2");
    truth.validate();

    RegimeSummary out;
    out.reps = reps;
    out.per_rep.resize(reps);
    parallel_for(reps, [&](std::size_t r) {
        const Dataset d = generate(truth, n, derive_seed(seed, "predsel-rep", r));
        out.per_rep[r] = evaluate_candidates(d, truth, min_degree, max_degree);
    });

    const auto true_degree = truth.degree();
    const bool in_class = true_degree && *true_degree >= min_degree && *true_degree <= max_degree;
    std::size_t hit_aic = 0, hit_bic = 0;
    out.excess_aic.reserve(reps);
    out.excess_bic.reserve(reps);
    for (const auto& rep : out.per_rep) {
        double best = rep.per_degree.front().true_risk;
        for (const auto& s : rep.per_degree) best = std::min(best, s.true_risk);
        const auto risk_of = [&](int k) { return rep.per_degree[static_cast<std::size_t>(k - min_degree)].true_risk; };
        out.excess_aic.push_back(risk_of(rep.selected_aic) - best);
        out.excess_bic.push_back(risk_of(rep.selected_bic) - best);
        if (in_class) {
            hit_aic += rep.selected_aic == *true_degree;
            hit_bic += rep.selected_bic == *true_degree;
        }
    }
    const double nr = static_cast<double>(reps);
    out.mean_excess_aic = std::accumulate(out.excess_aic.begin(), out.excess_aic.end(), 0.0) / nr;
    out.mean_excess_bic = std::accumulate(out.excess_bic.begin(), out.excess_bic.end(), 0.0) / nr;
    if (in_class) {
        out.correct_aic = static_cast<double>(hit_aic) / nr;
        out.correct_bic = static_cast<double>(hit_bic) / nr;
    }
    return out;
}

ProbeResult unbiasedness_probe(const TruthSpec& truth, int degree, std::size_t n, std::size_t reps,
                               std::uint64_t seed) {
    const auto true_degree = truth.degree();
    if (!true_degree || *true_degree > degree)
        throw ConfigError("unbiasedness probe needs a polynomial truth representable at the probed degree");
    if (reps < 1) throw ConfigError("reps must be positive");
    TruthSpec fixed = truth;
    fixed.design = Design::Equispaced;
    const double sigma2 = truth.noise_sigma * truth.noise_sigma;
    const double k1 = static_cast<double>(degree + 1);
    const double nd = static_cast<double>(n);

    std::vector<double> est(reps), risk(reps);
    parallel_for(reps, [&](std::size_t r) {
        const Dataset d = generate(fixed, n, derive_seed(seed, "predsel-probe", r));
        const FitResult fit = fit_ols(d, degree);
        est[r] = (fit.rss + 2.0 * k1 * sigma2) / nd;
        double s = 0.0;
        for (double x : d.xs) {
            const double e = fixed(x) - fit.model(x);
            s += e * e;
        }
        risk[r] = sigma2 + s / nd;
    });

    ProbeResult p;
    p.mean_estimate = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(reps);
    p.mean_true_insample_risk = std::accumulate(risk.begin(), risk.end(), 0.0) / static_cast<double>(reps);
    p.relative_bias = std::abs(p.mean_estimate - p.mean_true_insample_risk) / p.mean_true_insample_risk;
    return p;
}

nlohmann::json to_json(const RegimeSummary& s) {
    nlohmann::json j{{"reps", s.reps}, {"mean_excess_aic", s.mean_excess_aic}, {"mean_excess_bic", s.mean_excess_bic}};
    j["correct_aic"] = s.correct_aic ? nlohmann::json(*s.correct_aic) : nlohmann::json(nullptr);
    j["correct_bic"] = s.correct_bic ? nlohmann::json(*s.correct_bic) : nlohmann::json(nullptr);
    return j;
}

}  // namespace convlab::predsel
