#include "convlab/perrin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "convlab/errors.hpp"
#include "convlab/io.hpp"
#include "convlab/parallel.hpp"

namespace convlab::perrin {

namespace {

constexpr std::size_t kOracleScanLimit = 4096;
constexpr std::size_t kMaxWitnesses = 16;

bool near(double a, double b) { return std::abs(a - b) < kDiagonalTolerance; }

// First stage at which the prisms of w stop meeting the diagonal. Both axes
// share the drift offset, so the prism meets the diagonal iff |a - b| <= 2h.
std::optional<std::size_t> separation_stage(const PastaWorld& w, const StreamSpec& spec) {
    const double gap = std::abs(w.na - w.na_prime);
    for (std::size_t t = 0; t < kOracleScanLimit; ++t)
        if (2.0 * spec.half_width(t) < gap) return t;
    return std::nullopt;
}

nlohmann::json world_json(const PastaWorld& w) {
    return {{"na", w.na}, {"na_prime", w.na_prime}, {"z", w.z}};
}

void require_nested(std::span<const Prism> history) {
    if (history.empty()) throw StreamError("empty prism history");
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (!history[i].x.valid() || !history[i].y.valid())
            throw StreamError("degenerate prism at stage " + std::to_string(i));
        if (i > 0 && !history[i].subset_of(history[i - 1]))
            throw StreamError("prism history not nested at stage " + std::to_string(i));
    }
}

// Simulated verdicts may never contradict an oracle that knows its settle stage.
void check_against_oracle(const std::vector<Verdict>& v, const LimitBehavior& oracle, const std::string& id) {
    if (oracle.kind != LimitBehavior::Kind::Settles || !oracle.from_stage) return;
    const std::size_t from = *oracle.from_stage;
    for (std::size_t t = from; t < v.size(); ++t)
        if (v[t] != oracle.verdict)
            throw std::logic_error("simulation contradicts oracle at " + id + ", stage " + std::to_string(t));
    if (from > 0 && from <= v.size() && v[from - 1] == oracle.verdict)
        throw std::logic_error("simulation settles before the oracle's stage at " + id);
}

}  // namespace

bool PastaWorld::on_diagonal() const { return near(na, na_prime); }

std::string PastaWorld::id() const {
    if (z == 1) return "strand(" + format_double(na) + ")";
    return "plane(" + format_double(na) + "," + format_double(na_prime) + ")";
}

void PastaWorld::validate() const {
    if (!std::isfinite(na) || !std::isfinite(na_prime)) throw ConfigError("world coordinates must be finite");
    if (z != 0 && z != 1) throw ConfigError("z must be 0 or 1");
    if (z == 1 && !on_diagonal()) throw ConfigError("atom worlds lie on the diagonal (na == na_prime)");
}

bool Prism::meets_diagonal() const { return std::max(x.lo, y.lo) <= std::min(x.hi, y.hi); }

double Prism::width() const { return std::max(x.width(), y.width()); }

void to_json(nlohmann::json& j, const Prism& p) { j = {{"x", p.x}, {"y", p.y}}; }

Method Method::way1(double p, double eps) {
    Method m{Kind::Way1, p, eps};
    m.validate();
    return m;
}

Method Method::way2(double p, double delta0) {
    Method m{Kind::Way2, p, delta0};
    m.validate();
    return m;
}

Method Method::way3(double delta0) {
    Method m{Kind::Way3, 0.0, delta0};
    m.validate();
    return m;
}

void Method::validate() const {
    if (!std::isfinite(p)) throw ConfigError("method parameter p must be finite");
    if ((kind == Kind::Way1 || kind == Kind::Way2 || kind == Kind::Way3) &&
        !(std::isfinite(threshold) && threshold > 0.0))
        throw ConfigError("method threshold must be positive and finite");
}

std::string Method::name() const {
    switch (kind) {
        case Kind::OckhamRealist: return "OCKHAM";
        case Kind::AntiRealist: return "ANTI_REALIST";
        case Kind::Way1: return "WAY1";
        case Kind::Way2: return "WAY2";
        case Kind::Way3: return "WAY3";
    }
    return "?";
}

std::vector<Method> builtin_methods(double p) {
    // Way1 and Way3 thresholds exceed the initial prism width (2 * delta0 = 2
    // for the default stream), so those methods never output and then
    // retract a true answer; Way2 keeps a small threshold so its sacrifice of
    // (p, p, 1) comes after early true Simple verdicts.
    return {Method::ockham(), Method::anti_realist(), Method::way1(p, 3.0), Method::way2(p, 0.1),
            Method::way3(3.0)};
}

Verdict decide_latest(const Method& m, const Prism& e) {
    const Verdict ockham = e.meets_diagonal() ? Verdict::Simple : Verdict::Complex;
    switch (m.kind) {
        case Method::Kind::OckhamRealist: return ockham;
        case Method::Kind::AntiRealist: return e.meets_diagonal() ? Verdict::Suspend : Verdict::Complex;
        case Method::Kind::Way1:
            if (e.contains(m.p, m.p) && e.width() < m.threshold) return Verdict::Suspend;
            return ockham;
        case Method::Kind::Way2:
            if (e.contains(m.p, m.p) && e.width() < m.threshold) return Verdict::Complex;
            return ockham;
        case Method::Kind::Way3:
            if (e.width() < m.threshold) return Verdict::Complex;
            return ockham;
    }
    return ockham;
}

Verdict decide(const Method& m, std::span<const Prism> history) {
    require_nested(history);
    return decide_latest(m, history.back());
}

std::vector<Prism> canonical_prisms(const PastaWorld& w, const StreamSpec& spec, std::size_t count) {
    w.validate();
    const auto xs = stream_intervals(w.na, spec, count);
    const auto ys = stream_intervals(w.na_prime, spec, count);
    std::vector<Prism> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) out.push_back({xs[t], ys[t]});
    return out;
}

Prism canonical_prism_stream(const PastaWorld& w, const StreamSpec& spec, std::size_t t) {
    return canonical_prisms(w, spec, t + 1).back();
}

StreamTrace<Prism> run_trace(const Method& m, const PastaWorld& w, const StreamSpec& spec,
                             std::size_t horizon) {
    StreamTrace<Prism> trace{w.id(), {}};
    for (const Prism& e : canonical_prisms(w, spec, horizon)) trace.stages.push_back({e, decide_latest(m, e)});
    return trace;
}

LimitBehavior limit_oracle(const Method& m, const PastaWorld& w, const StreamSpec& spec) {
    const bool diag = w.on_diagonal();
    const bool at_p = diag && near(w.na, m.p);
    const auto sep = diag ? std::nullopt : separation_stage(w, spec);
    switch (m.kind) {
        case Method::Kind::OckhamRealist:
            return diag ? LimitBehavior::settles(Verdict::Simple, 0) : LimitBehavior::settles(Verdict::Complex, sep);
        case Method::Kind::AntiRealist:
            return diag ? LimitBehavior::settles(Verdict::Suspend, 0) : LimitBehavior::settles(Verdict::Complex, sep);
        case Method::Kind::Way1:
            if (at_p) return LimitBehavior::settles(Verdict::Suspend);
            return LimitBehavior::settles(diag ? Verdict::Simple : Verdict::Complex);
        case Method::Kind::Way2:
            if (at_p) return LimitBehavior::settles(Verdict::Complex);
            return LimitBehavior::settles(diag ? Verdict::Simple : Verdict::Complex);
        case Method::Kind::Way3: return LimitBehavior::settles(Verdict::Complex);
    }
    return LimitBehavior::never_settles();
}

std::size_t Grid::intervals() const { return static_cast<std::size_t>(std::llround((hi - lo) / step)); }

double Grid::value(std::size_t i) const {
    return lo + ((hi - lo) * static_cast<double>(i)) / static_cast<double>(intervals());
}

void Grid::validate() const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw ConfigError("grid bounds must satisfy lo < hi");
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    if (intervals() < 1) throw ConfigError("grid step exceeds the grid span");
    if (std::abs(static_cast<double>(intervals()) * step - (hi - lo)) > 1e-9 * (hi - lo))
        throw ConfigError("grid step must divide the grid span");
}

namespace {

double fraction_of(const std::vector<ConvergenceRecord>& recs, ConvergenceStatus s) {
    if (recs.empty()) return 0.0;
    const auto k = std::count_if(recs.begin(), recs.end(), [s](const auto& r) { return r.status == s; });
    return static_cast<double>(k) / static_cast<double>(recs.size());
}

ConvergenceRecord classify_world(const Method& m, const PastaWorld& w, const StreamSpec& spec,
                                 std::size_t horizon) {
    const auto trace = run_trace(m, w, spec, horizon);
    const auto oracle = limit_oracle(m, w, spec);
    const auto verdicts = trace.verdicts();
    check_against_oracle(verdicts, oracle, w.id());
    return classify_convergence(trace.world_id, verdicts, w.truth(), oracle);
}

bool in_domain(const Method& m, const PastaWorld& w, const StreamSpec& spec) {
    const auto l = limit_oracle(m, w, spec);
    return l.kind == LimitBehavior::Kind::Settles && l.verdict == w.truth();
}

}  // namespace

double DomainGrid::plane_fraction(ConvergenceStatus s) const { return fraction_of(plane, s); }
double DomainGrid::strand_fraction(ConvergenceStatus s) const { return fraction_of(strand, s); }

DomainGrid domain_of_convergence(const Method& m, const Grid& grid, const StreamSpec& spec,
                                 std::size_t horizon) {
    grid.validate();
    spec.validate();
    m.validate();
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    const std::size_t np = grid.points();
    DomainGrid g{grid, horizon, m, std::vector<ConvergenceRecord>(np * np), std::vector<ConvergenceRecord>(np)};
    parallel_for(np, [&](std::size_t i) {
        const double a = grid.value(i);
        for (std::size_t j = 0; j < np; ++j)
            g.plane[i * np + j] = classify_world(m, PastaWorld::plane(a, grid.value(j)), spec, horizon);
        g.strand[i] = classify_world(m, PastaWorld::strand(a), spec, horizon);
    });
    return g;
}

namespace {

// Every record has a Converges record within `radius` grid steps (Euclidean).
std::optional<std::size_t> plane_denseness_gap(const DomainGrid& g, int radius) {
    const auto np = static_cast<long>(g.grid.points());
    for (long i = 0; i < np; ++i) {
        for (long j = 0; j < np; ++j) {
            bool found = false;
            for (long di = -radius; di <= radius && !found; ++di)
                for (long dj = -radius; dj <= radius && !found; ++dj) {
                    if (di * di + dj * dj > radius * radius) continue;
                    const long a = i + di, b = j + dj;
                    if (a < 0 || b < 0 || a >= np || b >= np) continue;
                    found = g.plane_at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)).status ==
                            ConvergenceStatus::Converges;
                }
            if (!found) return static_cast<std::size_t>(i * np + j);
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> strand_denseness_gap(const DomainGrid& g, int radius) {
    const auto np = static_cast<long>(g.grid.points());
    for (long i = 0; i < np; ++i) {
        bool found = false;
        for (long d = -radius; d <= radius && !found; ++d) {
            const long a = i + d;
            if (a >= 0 && a < np) found = g.strand[static_cast<std::size_t>(a)].status == ConvergenceStatus::Converges;
        }
        if (!found) return static_cast<std::size_t>(i);
    }
    return std::nullopt;
}

// Lower-dimension test: halving h must shrink the Diverges fraction by a
// factor in [0.25, 0.75] (exceptional set of codimension >= 1), or keep it at 0.
bool shrinks_consistently(double coarse, double fine) {
    if (coarse == 0.0) return fine == 0.0;
    const double r = fine / coarse;
    return r >= 0.25 && r <= 0.75;
}

}  // namespace

ModeReport ae_check(const DomainGrid& g, const DomainGrid& g2) {
    if (g.grid.lo != g2.grid.lo || g.grid.hi != g2.grid.hi || g2.grid.intervals() != 2 * g.grid.intervals())
        throw ConfigError("ae_check needs grids with equal bounds at steps h and h/2");
    if (g.method.kind != g2.method.kind || g.method.p != g2.method.p || g.method.threshold != g2.method.threshold)
        throw ConfigError("ae_check needs grids computed for the same method");

    ModeReport r{Mode::AlmostEverywhere, true, {}, {}};
    const std::string method = g.method.name();
    for (const DomainGrid* grid : {&g, &g2}) {
        const std::size_t np = grid->grid.points();
        if (auto gap = plane_denseness_gap(*grid, 2)) {
            const PastaWorld w = PastaWorld::plane(grid->grid.value(*gap / np), grid->grid.value(*gap % np));
            r.fail({method + ": no converging plane world within 2h of " + w.id(),
                    {{"method", method}, {"check", "denseness"}, {"component", "plane"},
                     {"world", world_json(w)}, {"step", grid->grid.step}, {"horizon", grid->horizon}}});
        }
        if (auto gap = strand_denseness_gap(*grid, 2)) {
            const PastaWorld w = PastaWorld::strand(grid->grid.value(*gap));
            r.fail({method + ": no converging strand world within 2h of " + w.id(),
                    {{"method", method}, {"check", "denseness"}, {"component", "strand"},
                     {"world", world_json(w)}, {"step", grid->grid.step}, {"horizon", grid->horizon}}});
        }
    }

    const double pc = g.plane_fraction(ConvergenceStatus::Diverges);
    const double pf = g2.plane_fraction(ConvergenceStatus::Diverges);
    const double sc = g.strand_fraction(ConvergenceStatus::Diverges);
    const double sf = g2.strand_fraction(ConvergenceStatus::Diverges);
    r.metrics["plane_diverges_h"] = pc;
    r.metrics["plane_diverges_h2"] = pf;
    r.metrics["strand_diverges_h"] = sc;
    r.metrics["strand_diverges_h2"] = sf;
    r.metrics["plane_undetermined_h"] = g.plane_fraction(ConvergenceStatus::Undetermined);
    r.metrics["plane_undetermined_h2"] = g2.plane_fraction(ConvergenceStatus::Undetermined);
    r.metrics["strand_undetermined_h"] = g.strand_fraction(ConvergenceStatus::Undetermined);
    r.metrics["strand_undetermined_h2"] = g2.strand_fraction(ConvergenceStatus::Undetermined);

    const auto dim_witness = [&](const char* component, double coarse, double fine) {
        return Witness{method + ": " + component + " diverging fraction goes " + format_double(coarse) + " -> " +
                           format_double(fine) + " when the grid step halves",
                       {{"method", method}, {"check", "lower_dimension"}, {"component", component},
                        {"fraction_h", coarse}, {"fraction_h2", fine},
                        {"step", g.grid.step}, {"horizon", g.horizon}}};
    };
    if (!shrinks_consistently(pc, pf)) r.fail(dim_witness("plane", pc, pf));
    if (!shrinks_consistently(sc, sf)) r.fail(dim_witness("strand", sc, sf));
    return r;
}

ModeReport maximality_check(const Method& m, const Grid& grid, const StreamSpec& spec) {
    grid.validate();
    ModeReport r{Mode::MaximalDomain, true, {}, {}};
    const std::size_t np = grid.points();
    std::size_t missed_pairs = 0, missed_off_diagonal = 0;
    for (std::size_t i = 0; i < np; ++i) {
        const double a = grid.value(i);
        for (std::size_t j = 0; j < np; ++j) {
            if (i == j) continue;
            const PastaWorld w = PastaWorld::plane(a, grid.value(j));
            if (!in_domain(m, w, spec)) {
                ++missed_off_diagonal;
                if (r.witnesses.size() < kMaxWitnesses)
                    r.fail({m.name() + " misses off-diagonal world " + w.id() + "; Ockham's realist razor converges there",
                            {{"method", m.name()}, {"world", world_json(w)}}});
                r.pass = false;
            }
        }
        const PastaWorld w0 = PastaWorld::plane(a, a);
        const PastaWorld w1 = PastaWorld::strand(a);
        if (!in_domain(m, w0, spec) && !in_domain(m, w1, spec)) {
            ++missed_pairs;
            if (r.witnesses.size() < kMaxWitnesses)
                r.fail({m.name() + " misses both " + w0.id() + " and " + w1.id() + "; either can be added",
                        {{"method", m.name()}, {"pair", {world_json(w0), world_json(w1)}}}});
            r.pass = false;
        }
    }
    r.metrics["missed_pairs"] = static_cast<double>(missed_pairs);
    r.metrics["missed_off_diagonal"] = static_cast<double>(missed_off_diagonal);
    return r;
}

ModeReport stability_scan(const Method& m, std::span<const PastaWorld> worlds,
                          std::span<const StreamSpec> specs, std::size_t horizon) {
    ModeReport r{Mode::Stability, true, {}, {}};
    std::size_t failures = 0;
    for (const auto& w : worlds) {
        for (const auto& spec : specs) {
            const auto trace = run_trace(m, w, spec, horizon);
            const auto verdicts = trace.verdicts();
            const auto res = check_stability(verdicts, w.truth());
            if (res.pass) continue;
            ++failures;
            r.pass = false;
            if (r.witnesses.size() >= kMaxWitnesses) continue;
            const auto [s, e] = *res.witness;
            nlohmann::json trace_json = nlohmann::json::array();
            for (std::size_t t = 0; t <= e; ++t)
                trace_json.push_back({{"prism", trace.stages[t].evidence}, {"verdict", trace.stages[t].verdict}});
            r.witnesses.push_back(
                {m.name() + " outputs the true answer " + std::string(to_string(w.truth())) + " at " + w.id() +
                     " stage " + std::to_string(s) + " and retracts it at stage " + std::to_string(e),
                 {{"method", m.name()},
                  {"p", m.p},
                  {"threshold", m.threshold},
                  {"world", world_json(w)},
                  {"stream", spec},
                  {"stages", {s, e}},
                  {"trace", trace_json}}});
        }
    }
    r.metrics["failing_traces"] = static_cast<double>(failures);
    r.metrics["traces"] = static_cast<double>(worlds.size() * specs.size());
    return r;
}

ModeReport underdetermination_check(const Method& m, const Grid& grid, const StreamSpec& spec) {
    grid.validate();
    ModeReport r{Mode::MaximalDomain, true, {}, {}};
    constexpr std::size_t kEquivalenceStages = 8;
    for (std::size_t i = 0; i < grid.points(); ++i) {
        const double a = grid.value(i);
        const PastaWorld w0 = PastaWorld::plane(a, a);
        const PastaWorld w1 = PastaWorld::strand(a);
        // Empirical equivalence: identical evidence, hence identical verdicts.
        if (canonical_prisms(w0, spec, kEquivalenceStages) != canonical_prisms(w1, spec, kEquivalenceStages))
            throw std::logic_error("paired worlds produced different evidence at a=" + format_double(a));
        if (in_domain(m, w0, spec) && in_domain(m, w1, spec))
            r.fail({m.name() + " converges at both " + w0.id() + " and " + w1.id(),
                    {{"method", m.name()}, {"pair", {world_json(w0), world_json(w1)}}}});
    }
    return r;
}

ScoreSheet score_sheet(const Method& m, const ScoreSheetConfig& config) {
    const DomainGrid g = domain_of_convergence(m, config.grid, config.spec, config.horizon);
    const DomainGrid g2 = domain_of_convergence(m, config.grid.refined(), config.spec, config.horizon);

    std::vector<PastaWorld> sample;
    if (m.kind == Method::Kind::Way1 || m.kind == Method::Kind::Way2) sample.push_back(PastaWorld::strand(m.p));
    const std::size_t np = config.grid.points();
    for (std::size_t i = 0; i < np; ++i) sample.push_back(PastaWorld::strand(config.grid.value(i)));
    const std::size_t stride = std::max<std::size_t>(1, config.plane_stride);
    for (std::size_t i = 0; i < np; i += stride)
        for (std::size_t j = 0; j < np; j += stride)
            sample.push_back(PastaWorld::plane(config.grid.value(i), config.grid.value(j)));
    std::vector<StreamSpec> specs{config.spec};
    specs.insert(specs.end(), config.stability_specs.begin(), config.stability_specs.end());

    return {m, ae_check(g, g2), maximality_check(m, config.grid, config.spec),
            stability_scan(m, sample, specs, config.horizon)};
}

nlohmann::json to_json(const ScoreSheet& s) {
    return {{"method", s.method.name()},
            {"p", s.method.p},
            {"threshold", s.method.threshold},
            {"ae", s.ae},
            {"maximal", s.maximal},
            {"stable", s.stable}};
}

}  // namespace convlab::perrin
