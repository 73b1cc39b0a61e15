#pragma once

// Atomic-theory problem over the pasta world space: a plane of atomless
// worlds (N_A, N'_A, z = 0) and a strand of atom worlds (a, a, z = 1) above
// its diagonal. Evidence is a nested sequence of axis-aligned prisms.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convlab/framework.hpp"
#include "convlab/stream.hpp"

namespace convlab::perrin {

// Diagonal membership tolerance at grid precision.
inline constexpr double kDiagonalTolerance = 1e-12;

struct PastaWorld {
    double na = 0.0;
    double na_prime = 0.0;
    int z = 0;

    static PastaWorld plane(double a, double b) { return {a, b, 0}; }
    static PastaWorld strand(double a) { return {a, a, 1}; }

    bool on_diagonal() const;
    Verdict truth() const { return z == 1 ? Verdict::Simple : Verdict::Complex; }
    std::string id() const;
    // Throws ConfigError if z = 1 off the diagonal or values are non-finite.
    void validate() const;
};

struct Prism {
    Interval x;
    Interval y;

    bool meets_diagonal() const;
    // Longest side.
    double width() const;
    bool contains(double a, double b) const { return x.contains(a) && y.contains(b); }
    bool subset_of(const Prism& outer) const { return x.subset_of(outer.x) && y.subset_of(outer.y); }

    friend bool operator==(const Prism&, const Prism&) = default;
};

void to_json(nlohmann::json& j, const Prism& p);

struct Method {
    enum class Kind { OckhamRealist, AntiRealist, Way1, Way2, Way3 };

    Kind kind = Kind::OckhamRealist;
    double p = 1.0;          // Way1/Way2 target diagonal value
    double threshold = 0.0;  // Way1 eps, Way2/Way3 delta0

    static Method ockham() { return {Kind::OckhamRealist, 0.0, 0.0}; }
    static Method anti_realist() { return {Kind::AntiRealist, 0.0, 0.0}; }
    static Method way1(double p, double eps);
    static Method way2(double p, double delta0);
    static Method way3(double delta0);

    std::string name() const;
    void validate() const;
};

// Five built-ins with the default parameters used by the score sheet.
std::vector<Method> builtin_methods(double p = 1.0);

// Decision on a nested history; only the latest prism matters for the
// built-ins. Throws StreamError on an empty or non-nested history.
Verdict decide(const Method& m, std::span<const Prism> history);
Verdict decide_latest(const Method& m, const Prism& e);

Prism canonical_prism_stream(const PastaWorld& w, const StreamSpec& spec, std::size_t t);
std::vector<Prism> canonical_prisms(const PastaWorld& w, const StreamSpec& spec, std::size_t count);

StreamTrace<Prism> run_trace(const Method& m, const PastaWorld& w, const StreamSpec& spec,
                             std::size_t horizon);

// Analytic limit of the method's verdicts on the canonical stream of w.
// Settle stages are supplied for Ockham and the anti-realist under centered
// drift.
LimitBehavior limit_oracle(const Method& m, const PastaWorld& w, const StreamSpec& spec);

// Equispaced values lo + (hi - lo) * i / N, i = 0..N, with N = round((hi - lo) / step).
struct Grid {
    double lo = 0.5;
    double hi = 1.5;
    double step = 0.02;

    std::size_t intervals() const;
    std::size_t points() const { return intervals() + 1; }
    double value(std::size_t i) const;
    Grid refined() const { return {lo, hi, step / 2}; }
    void validate() const;
};

struct DomainGrid {
    Grid grid;
    std::size_t horizon = 0;
    Method method;
    // plane[i * points + j] is world (value(i), value(j), 0).
    std::vector<ConvergenceRecord> plane;
    // strand[i] is world (value(i), value(i), 1).
    std::vector<ConvergenceRecord> strand;

    const ConvergenceRecord& plane_at(std::size_t i, std::size_t j) const {
        return plane[i * grid.points() + j];
    }
    double plane_fraction(ConvergenceStatus s) const;
    double strand_fraction(ConvergenceStatus s) const;
};

DomainGrid domain_of_convergence(const Method& m, const Grid& grid, const StreamSpec& spec,
                                 std::size_t horizon);

// Denseness and lower-dimension checks per component, from grids at step h and h/2.
ModeReport ae_check(const DomainGrid& g, const DomainGrid& g2);

// Judged from the analytic limits at every grid world: all off-diagonal plane
// worlds are in the domain, and each empirically equivalent pair
// {(a, a, 0), (a, a, 1)} has at least one member in it.
ModeReport maximality_check(const Method& m, const Grid& grid, const StreamSpec& spec);

// No sampled trace outputs the true answer and later retracts it.
ModeReport stability_scan(const Method& m, std::span<const PastaWorld> worlds,
                          std::span<const StreamSpec> specs, std::size_t horizon);

// For each diagonal grid value a, w0(a) and w1(a) are not both in the domain.
ModeReport underdetermination_check(const Method& m, const Grid& grid, const StreamSpec& spec);

struct ScoreSheetConfig {
    Grid grid;
    StreamSpec spec = StreamSpec::centered(1.0, 0.6);
    std::size_t horizon = 40;
    // Streams used by the stability scan, in addition to `spec`.
    std::vector<StreamSpec> stability_specs = {StreamSpec::off_center(1.0, 0.6, {0.5}),
                                               StreamSpec::off_center(1.0, 0.6, {-0.5})};
    // Every k-th plane grid point enters the stability sample.
    std::size_t plane_stride = 5;
};

struct ScoreSheet {
    Method method;
    ModeReport ae;
    ModeReport maximal;
    ModeReport stable;
};

ScoreSheet score_sheet(const Method& m, const ScoreSheetConfig& config);

nlohmann::json to_json(const ScoreSheet& s);

// ---- Synthetic Einstein / Perrin experiments ----------------------------

struct ExperimentSample {
    enum class Kind { Brownian, Sediment };

    Kind kind = Kind::Brownian;
    double constant = 1.0;            // c (Brownian) or c' (Sediment)
    std::size_t size = 0;             // particles m, or heights n
    std::vector<double> times;        // Brownian
    std::vector<double> msd;          // Brownian, one per time
    std::vector<double> heights;      // Sediment
};

// Displacements at each time drawn Normal(0, (c / na) t), averaged over m particles.
ExperimentSample simulate_brownian(double na_true, double c, std::span<const double> times,
                                   std::size_t m_particles, std::uint64_t seed);
// Heights drawn Exponential(rate = c' * na).
ExperimentSample simulate_sedimentation(double na_true, double cprime, std::size_t n,
                                        std::uint64_t seed);

struct Estimate {
    double point = 0.0;
    Interval interval;
};

// Brownian: slope through the origin of msd on time, N_A = c / slope; the
// slope's normal-approximation interval is mapped through the reciprocal.
// Sediment: rate MLE 1 / mean height, N'_A = rate / c', asymptotic interval.
Estimate estimate_interval(const ExperimentSample& sample, double confidence);

struct ExperimentConstants {
    double c = 1.0;
    double cprime = 1.0;
    std::vector<double> times = {1.0, 2.0, 3.0, 4.0, 5.0};
};

struct ExperimentalStream {
    std::vector<Prism> prisms;
    // Stage at which the new prism missed the previous one; the stream stops there.
    std::optional<std::size_t> truncated_at;
};

ExperimentalStream experimental_stream(double na, double na_prime, std::span<const std::size_t> schedule,
                                       double confidence, std::uint64_t seed,
                                       const ExperimentConstants& constants = {});

}  // namespace convlab::perrin
