#include "convlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "convlab/errors.hpp"
#include "convlab/gaussian.hpp"
#include "convlab/lineworld.hpp"
#include "convlab/parallel.hpp"
#include "convlab/perrin.hpp"
#include "convlab/predsel.hpp"
#include "convlab/rng.hpp"

namespace convlab {

namespace {

using nlohmann::json;

std::string fmt(double x) { return format_double(x); }
std::string fmt(std::size_t x) { return std::to_string(x); }
std::string fmt(int x) { return std::to_string(x); }

std::string stage_cell(const std::optional<std::size_t>& s) { return s ? std::to_string(*s) : std::string{}; }

void check(ModuleArtifacts& a, bool ok, std::string name, std::string detail) {
    a.summary["checks"][name] = ok;
    if (!ok) a.violations.push_back({a.module, std::move(name), std::move(detail)});
}

std::string stream_label(const StreamSpec& s) {
    if (s.offsets.empty()) return "centered";
    std::string out = "offsets=";
    for (std::size_t i = 0; i < s.offsets.size(); ++i) {
        if (i) out += ';';
        out += fmt(s.offsets[i]);
    }
    return out;
}

// ---- lineworld ------------------------------------------------------------

std::vector<lineworld::LineWorld> theta_grid(const LineworldConfig& l) {
    const auto n = static_cast<std::size_t>(std::llround((l.theta_max - l.theta_min) / l.theta_step));
    std::vector<lineworld::LineWorld> out;
    for (std::size_t i = 0; i <= n; ++i)
        out.push_back({n == 0 ? l.theta_min
                              : l.theta_min + (l.theta_max - l.theta_min) * static_cast<double>(i) /
                                                  static_cast<double>(n)});
    return out;
}

json razor_json(const lineworld::RazorReport& r) {
    json j{{"consequence", std::string(to_string(r.consequence))}};
    j["violation"] = r.violation ? json(*r.violation) : json(nullptr);
    j["witness"] = r.witness ? json(*r.witness) : json(nullptr);
    return j;
}

// Re-runs a recorded refutation: the history must be a valid stream for the
// witness world and the method must still answer wrongly at the stage.
bool replay_uniform(const lineworld::Method& m, const lineworld::UniformRefutation& r) {
    const auto& h = r.history;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!h[i].valid() || !h[i].contains(r.world.theta)) return false;
        if (i > 0 && !h[i].subset_of(h[i - 1])) return false;
    }
    const std::span<const Interval> prefix(h.data(), r.failing_stage + 1);
    const Verdict v = m(prefix);
    return v == r.verdict && v != r.world.truth();
}

}  // namespace

ModuleArtifacts run_lineworld(const ExperimentConfig& c) {
    using namespace lineworld;
    const auto& L = c.lineworld;
    ModuleArtifacts a;
    a.module = "lineworld";

    const auto worlds = theta_grid(L);
    std::vector<StreamSpec> specs;
    for (const auto& d : L.drifts) specs.push_back({L.delta0, L.ratio, d});

    std::vector<Method> methods{mstar()};
    for (auto& v : razor_violators()) methods.push_back(std::move(v));

    CsvTable pw({"method", "stream", "theta", "status", "settle_stage", "stable"});
    json per_method = json::object();
    for (const auto& m : methods) {
        std::size_t converged = 0, stable = 0, total = 0;
        for (const auto& spec : specs) {
            const auto records = check_pointwise(m, worlds, spec, L.horizon);
            for (std::size_t i = 0; i < worlds.size(); ++i) {
                const auto trace = run_trace(m, worlds[i], spec, L.horizon);
                const bool st = check_stability(trace, worlds[i].truth()).pass;
                converged += records[i].status == ConvergenceStatus::Converges;
                stable += st;
                ++total;
                pw.add_row({m.name, stream_label(spec), fmt(worlds[i].theta),
                            std::string(to_string(records[i].status)), stage_cell(records[i].settle_stage),
                            st ? "true" : "false"});
            }
        }
        per_method[m.name] = {{"traces", total}, {"converges", converged}, {"stable", stable}};
        if (m.name == "M*") {
            check(a, converged == total, "mstar_pointwise",
                  std::to_string(total - converged) + " of " + std::to_string(total) + " traces did not converge");
            check(a, stable == total, "mstar_stability",
                  std::to_string(total - stable) + " of " + std::to_string(total) + " traces retracted the truth");
        }
    }
    a.tables.emplace("pointwise", std::move(pw));
    a.summary["pointwise"] = per_method;
    a.summary["worlds"] = worlds.size();
    a.summary["streams"] = specs.size();

    const auto ms = mstar();
    json uniform = json::array();
    bool all_replay = true;
    for (double l : L.uniform_lengths) {
        const auto r = refute_uniform(ms, l);
        const bool ok = replay_uniform(ms, r);
        all_replay = all_replay && ok;
        uniform.push_back({{"length", l}, {"replay_valid", ok}, {"witness", r.witness}});
    }
    check(a, all_replay, "uniform_refutation", "a uniform-convergence witness failed to replay");

    const RazorSearchBudget budget{L.razor_stages, L.razor_continuation};
    json razor = json::object();
    std::vector<std::string> unflagged;
    for (const auto& m : methods) {
        const auto r = razor_necessity_probe(m, budget);
        razor[m.name] = razor_json(r);
        if (m.name != "M*" && r.consequence == RazorConsequence::NoneFound) unflagged.push_back(m.name);
        if (m.name == "M*") check(a, !r.violation.has_value(), "mstar_obeys_razor", "M* said Complex with 0 inside");
    }
    std::string names;
    for (const auto& n : unflagged) names += (names.empty() ? "" : ", ") + n;
    check(a, unflagged.empty(), "razor_violators_flagged", "not flagged: " + names);

    a.documents.emplace("lineworld_witnesses.json", json{{"uniform", uniform}, {"razor", razor}});
    a.summary["razor"] = json::object();
    for (const auto& [k, v] : razor.items()) a.summary["razor"][k] = v["consequence"];
    return a;
}

// ---- gaussian -------------------------------------------------------------

ModuleArtifacts run_gaussian(const ExperimentConfig& c) {
    using namespace gaussian;
    const auto& G = c.gaussian;
    ModuleArtifacts a;
    a.module = "gaussian";

    const std::vector<TestRule> rules{TestRule::aic(), TestRule::m_dagger(), TestRule::bic()};
    std::vector<std::size_t> mc_ns;
    for (auto n : G.n_ladder)
        if (n <= G.mc_max_n) mc_ns.push_back(n);

    CsvTable curves({"rule", "theta", "n", "truth_prob", "se"});
    CsvTable plot({"rule", "theta", "n", "truth_prob", "source"});
    const std::uint64_t mc_seed = derive_seed(c.seed, "gaussian", 0);
    double worst_mc_gap = 0.0;  // in units of 4 se
    std::string mc_detail;
    std::size_t ti = 0;
    for (const auto& rule : rules) {
        for (double theta : G.thetas) {
            const auto an = analytic_curve(rule, theta, G.n_ladder);
            const double lim = truth_prob_limit(rule, {theta});
            for (const auto& p : an.points) {
                curves.add_row({rule.name(), fmt(theta), fmt(p.n), fmt(p.truth_prob), ""});
                plot.add_row({rule.name(), fmt(theta), fmt(p.n), fmt(p.truth_prob), "analytic"});
                plot.add_row({rule.name(), fmt(theta), fmt(p.n), fmt(lim), "limit"});
            }
            if (mc_ns.empty()) continue;
            const auto mc = mc_curve(rule, theta, mc_ns, G.trials, derive_seed(mc_seed, "theta", ti++));
            for (std::size_t i = 0; i < mc.points.size(); ++i) {
                const auto& p = mc.points[i];
                curves.add_row({rule.name() + ":mc", fmt(theta), fmt(p.n), fmt(p.truth_prob),
                                format_optional(p.standard_error)});
                plot.add_row({rule.name(), fmt(theta), fmt(p.n), fmt(p.truth_prob), "mc"});
                const double exact = truth_prob_analytic(rule, {theta}, p.n);
                const double tol = 4.0 * p.standard_error.value_or(0.0) + 1.0 / static_cast<double>(G.trials);
                const double gap = std::abs(p.truth_prob - exact) / tol;
                if (gap > worst_mc_gap) {
                    worst_mc_gap = gap;
                    mc_detail = rule.name() + " theta=" + fmt(theta) + " n=" + fmt(p.n) + ": mc " +
                                fmt(p.truth_prob) + " vs " + fmt(exact);
                }
            }
        }
    }
    a.tables.emplace("curves", std::move(curves));
    a.plots.emplace("gaussian_truth_prob.csv", std::move(plot));

    json modes = json::object();
    for (const auto& rule : rules) {
        const auto mp = classify_mode(rule, G.thetas, G.n_ladder, G.alphas);
        modes[rule.name()] = {{"HIGH_PROB", mp.high_prob}, {"PROB_ONE", mp.prob_one}};
    }
    a.summary["modes"] = modes;

    // Level of the AIC rule at theta = 0 is the same at every n.
    const auto aic = TestRule::aic();
    double lo = 1.0, hi = 0.0;
    for (auto n : G.n_ladder) {
        const double p = truth_prob_analytic(aic, {0.0}, n);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    check(a, std::abs(lo - 0.8427) <= 5e-4 && std::abs(hi - 0.8427) <= 5e-4 && hi - lo <= 1e-12, "aic_level",
          "AIC truth probability at theta=0 spans [" + fmt(lo) + ", " + fmt(hi) + "]");
    const double md = truth_prob_analytic(TestRule::m_dagger(), {0.0}, 100);
    check(a, std::abs(md - 0.95) <= 5e-4, "mdagger_level", "M_DAGGER truth probability " + fmt(md));

    const auto bic = TestRule::bic();
    bool increasing = true;
    for (std::size_t i = 1; i < G.n_ladder.size(); ++i)
        increasing = increasing &&
                     truth_prob_analytic(bic, {0.0}, G.n_ladder[i]) > truth_prob_analytic(bic, {0.0}, G.n_ladder[i - 1]);
    check(a, increasing, "bic_consistency", "BIC truth probability at theta=0 is not strictly increasing in n");

    std::string weak;
    for (double theta : G.thetas) {
        if (std::abs(theta) < 0.5) continue;
        for (auto n : G.n_ladder) {
            if (n < 200) continue;
            for (const auto& rule : {aic, bic}) {
                const double p = truth_prob_analytic(rule, {theta}, n);
                if (p < 0.999) weak = rule.name() + " theta=" + fmt(theta) + " n=" + fmt(n) + ": " + fmt(p);
            }
        }
    }
    check(a, weak.empty(), "power", weak);
    check(a, worst_mc_gap <= 1.0, "mc_agreement", mc_detail);
    a.summary["mc_worst_gap_over_4se"] = worst_mc_gap;
    return a;
}

// ---- predsel --------------------------------------------------------------

namespace {

predsel::TruthSpec make_truth(const RegimeConfig& r) {
    return r.truth == "abs" ? predsel::TruthSpec::abs(r.sigma) : predsel::TruthSpec::poly(r.coeffs, r.sigma);
}

CsvTable selection_table(const predsel::RegimeSummary& s) {
    CsvTable t({"rep", "degree", "rss", "aic", "bic", "true_risk", "selected_aic", "selected_bic"});
    for (std::size_t r = 0; r < s.reps; ++r) {
        const auto& rep = s.per_rep[r];
        for (const auto& d : rep.per_degree)
            t.add_row({fmt(r), fmt(d.degree), fmt(d.rss), fmt(d.aic), fmt(d.bic), fmt(d.true_risk),
                       fmt(rep.selected_aic), fmt(rep.selected_bic)});
    }
    return t;
}

}  // namespace

ModuleArtifacts run_predsel(const ExperimentConfig& c) {
    using namespace predsel;
    const auto& P = c.predsel;
    ModuleArtifacts a;
    a.module = "predsel";

    const auto& ra = P.regime_a;
    const auto& rb = P.regime_b;
    const auto sa = regime_experiment(make_truth(ra), ra.min_degree, ra.max_degree, P.n, ra.reps,
                                      derive_seed(c.seed, "predsel-regime", 0));
    const auto sb = regime_experiment(make_truth(rb), rb.min_degree, rb.max_degree, P.n, rb.reps,
                                      derive_seed(c.seed, "predsel-regime", 1));
    a.tables.emplace("selection", selection_table(sa));
    a.tables.emplace("selection_misspecified", selection_table(sb));
    a.summary["regime_a"] = to_json(sa);
    a.summary["regime_b"] = to_json(sb);

    CsvTable regret({"regime", "selector", "rep", "excess_risk"});
    for (const auto& [label, s] : {std::pair{"a", &sa}, std::pair{"b", &sb}}) {
        for (std::size_t r = 0; r < s->reps; ++r) {
            regret.add_row({label, "AIC", fmt(r), fmt(s->excess_aic[r])});
            regret.add_row({label, "BIC", fmt(r), fmt(s->excess_bic[r])});
        }
    }
    a.plots.emplace("predsel_regret.csv", std::move(regret));

    if (sa.correct_aic && sa.correct_bic)
        check(a, *sa.correct_bic - *sa.correct_aic >= 0.05, "regime_a_bic_wins",
              "correct selection BIC " + fmt(*sa.correct_bic) + " vs AIC " + fmt(*sa.correct_aic));
    check(a, sb.mean_excess_aic <= sb.mean_excess_bic, "regime_b_aic_wins",
          "mean excess risk AIC " + fmt(sb.mean_excess_aic) + " vs BIC " + fmt(sb.mean_excess_bic));

    const auto& pr = P.probe;
    const auto truth = TruthSpec::poly(pr.coeffs, pr.sigma);
    CsvTable probe({"seed", "n", "mean_estimate", "mean_true_insample_risk", "relative_bias"});
    std::vector<double> mean_bias(pr.ladder.size(), 0.0);
    double bias_at_200 = -1.0;
    for (std::size_t s = 0; s < pr.seeds; ++s) {
        for (std::size_t i = 0; i < pr.ladder.size(); ++i) {
            const auto r = unbiasedness_probe(truth, pr.degree, pr.ladder[i], pr.reps,
                                              derive_seed(c.seed, "predsel-probe-seed", s));
            probe.add_row({fmt(s), fmt(pr.ladder[i]), fmt(r.mean_estimate), fmt(r.mean_true_insample_risk),
                           fmt(r.relative_bias)});
            mean_bias[i] += r.relative_bias / static_cast<double>(pr.seeds);
            if (pr.ladder[i] == 200) bias_at_200 = std::max(bias_at_200, r.relative_bias);
        }
    }
    a.tables.emplace("probe", std::move(probe));
    a.summary["probe_mean_relative_bias"] = json::array();
    for (std::size_t i = 0; i < pr.ladder.size(); ++i)
        a.summary["probe_mean_relative_bias"].push_back({{"n", pr.ladder[i]}, {"relative_bias", mean_bias[i]}});
    if (bias_at_200 >= 0.0)
        check(a, bias_at_200 <= 0.02, "probe_bias", "relative bias at n=200 reached " + fmt(bias_at_200));
    bool non_increasing = true;
    for (std::size_t i = 1; i < mean_bias.size(); ++i) non_increasing = non_increasing && mean_bias[i] <= mean_bias[i - 1];
    check(a, non_increasing, "probe_bias_shrinks", "seed-averaged relative bias increased along the ladder");
    return a;
}

// ---- perrin ---------------------------------------------------------------

namespace {

struct Pattern {
    std::optional<bool> ae, maximal, stable;
};

std::optional<Pattern> theorem_pattern(const std::string& name) {
    if (name == "OCKHAM") return Pattern{true, true, true};
    if (name == "ANTI_REALIST") return Pattern{false, false, true};
    if (name == "WAY1") return Pattern{true, false, true};
    if (name == "WAY2") return Pattern{true, true, false};
    if (name == "WAY3") return Pattern{false, std::nullopt, true};
    return std::nullopt;
}

bool matches(const std::optional<bool>& want, bool got) { return !want || *want == got; }

CsvTable domain_table(const perrin::DomainGrid& d) {
    CsvTable t({"component", "a", "b", "status", "settle_stage"});
    const auto np = d.grid.points();
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j) {
            const auto& r = d.plane_at(i, j);
            t.add_row({"plane", fmt(d.grid.value(i)), fmt(d.grid.value(j)), std::string(to_string(r.status)),
                       stage_cell(r.settle_stage)});
        }
    for (std::size_t i = 0; i < np; ++i) {
        const auto& r = d.strand[i];
        t.add_row({"strand", fmt(d.grid.value(i)), fmt(d.grid.value(i)), std::string(to_string(r.status)),
                   stage_cell(r.settle_stage)});
    }
    return t;
}

struct Coverage {
    double covered = 0.0;
    double mean_width = 0.0;
};

template <class Draw>
Coverage coverage(std::size_t reps, double truth, Draw draw) {
    std::vector<char> hit(reps);
    std::vector<double> width(reps);
    parallel_for(reps, [&](std::size_t r) {
        const auto e = draw(r);
        hit[r] = e.interval.contains(truth);
        width[r] = e.interval.width();
    });
    const auto n = static_cast<double>(reps);
    return {static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / n,
            std::accumulate(width.begin(), width.end(), 0.0) / n};
}

}  // namespace

ModuleArtifacts run_perrin(const ExperimentConfig& c) {
    using namespace perrin;
    const auto& R = c.perrin;
    ModuleArtifacts a;
    a.module = "perrin";

    ScoreSheetConfig sc;
    sc.grid = R.grid;
    sc.spec = StreamSpec::centered(R.delta0, R.ratio);
    sc.horizon = R.horizon;
    sc.stability_specs = {StreamSpec::off_center(R.delta0, R.ratio, {0.5}),
                          StreamSpec::off_center(R.delta0, R.ratio, {-0.5})};

    json sheets = json::array();
    CsvTable map({"method", "component", "a", "b", "code"});
    std::string pattern_detail, under_detail;
    for (const auto& name : R.methods) {
        const auto m = make_perrin_method(R, name);
        const auto sheet = score_sheet(m, sc);
        json sj = to_json(sheet);
        const auto under = underdetermination_check(m, R.grid, sc.spec);
        sj["underdetermination"] = under;
        sheets.push_back(sj);
        if (!under.pass) under_detail += name + " ";

        a.summary["scoresheet"][name] = {{"ae", sheet.ae.pass}, {"maximal", sheet.maximal.pass},
                                         {"stable", sheet.stable.pass}};
        if (const auto want = theorem_pattern(name)) {
            if (!matches(want->ae, sheet.ae.pass) || !matches(want->maximal, sheet.maximal.pass) ||
                !matches(want->stable, sheet.stable.pass) || (want->stable == false && sheet.stable.witnesses.empty()))
                pattern_detail += name + " ";
        }

        const auto d = domain_of_convergence(m, R.grid, sc.spec, R.horizon);
        const auto np = d.grid.points();
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t j = 0; j < np; ++j)
                map.add_row({name, "plane", fmt(d.grid.value(i)), fmt(d.grid.value(j)),
                             std::to_string(status_code(d.plane_at(i, j).status))});
        for (std::size_t i = 0; i < np; ++i)
            map.add_row({name, "strand", fmt(d.grid.value(i)), fmt(d.grid.value(i)),
                         std::to_string(status_code(d.strand[i].status))});

        const auto& mt = sheet.ae.metrics;
        if (name == "OCKHAM") {
            const double h = mt.at("plane_diverges_h"), h2 = mt.at("plane_diverges_h2");
            const bool ok = h > 0.0 && h2 >= 0.25 * h && h2 <= 0.75 * h;
            check(a, ok, "ockham_lower_dimension",
                  "plane DIVERGES fraction " + fmt(h) + " at h, " + fmt(h2) + " at h/2");
        }
        if (name == "ANTI_REALIST") {
            const bool ok = mt.at("strand_diverges_h") == 1.0 && mt.at("strand_diverges_h2") == 1.0;
            check(a, ok, "anti_realist_strand_diverges", "strand DIVERGES fraction below 1");
        }
        a.tables.emplace("domain_" + name, domain_table(d));
    }
    a.documents.emplace("scoresheet.json", sheets);
    a.plots.emplace("perrin_domain_map.csv", std::move(map));
    check(a, pattern_detail.empty(), "scoresheet_pattern", "unexpected pattern for: " + pattern_detail);
    check(a, under_detail.empty(), "underdetermination", "both paired worlds converge for: " + under_detail);

    // Interval estimators of the two constants.
    const auto& E = R.estimator;
    CsvTable est({"estimator", "n", "coverage", "mean_width"});
    std::vector<double> widths_b, widths_s;
    double min_cov = 1.0;
    for (auto n : E.sizes) {
        const auto cb = coverage(E.reps, E.na, [&](std::size_t r) {
            const auto s = simulate_brownian(E.na, E.c, E.times, n,
                                             derive_seed(derive_seed(c.seed, "perrin-brownian", n), "rep", r));
            return estimate_interval(s, E.confidence);
        });
        const auto cs = coverage(E.reps, E.na_prime, [&](std::size_t r) {
            const auto s = simulate_sedimentation(E.na_prime, E.cprime, n,
                                                  derive_seed(derive_seed(c.seed, "perrin-sediment", n), "rep", r));
            return estimate_interval(s, E.confidence);
        });
        est.add_row({"brownian", fmt(n), fmt(cb.covered), fmt(cb.mean_width)});
        est.add_row({"sediment", fmt(n), fmt(cs.covered), fmt(cs.mean_width)});
        widths_b.push_back(cb.mean_width);
        widths_s.push_back(cs.mean_width);
        min_cov = std::min({min_cov, cb.covered, cs.covered});
    }
    a.tables.emplace("estimators", std::move(est));
    const double floor = E.confidence - 0.02;
    check(a, min_cov >= floor, "estimator_coverage", "lowest coverage " + fmt(min_cov));
    // Widths should scale like 1/sqrt(n) along the ladder.
    std::string shrink;
    for (const auto* w : {&widths_b, &widths_s})
        for (std::size_t i = 1; i < w->size(); ++i) {
            const double expected = std::sqrt(static_cast<double>(E.sizes[i - 1]) / static_cast<double>(E.sizes[i]));
            const double ratio = (*w)[i] / (*w)[i - 1];
            if (std::abs(ratio / expected - 1.0) > 0.1) shrink += fmt(E.sizes[i]) + ":" + fmt(ratio) + " ";
        }
    check(a, shrink.empty(), "estimator_width_scaling", "width ratios off 1/sqrt(n): " + shrink);
    a.summary["estimator_min_coverage"] = min_cov;

    // Experimental prism stream for the configured constants, judged by OCKHAM.
    const ExperimentConstants k{E.c, E.cprime, E.times};
    const auto xs = experimental_stream(E.na, E.na_prime, E.sizes, E.confidence, derive_seed(c.seed, "perrin-stream", 0), k);
    json stream{{"prisms", xs.prisms}};
    stream["truncated_at"] = xs.truncated_at ? json(*xs.truncated_at) : json(nullptr);
    if (!xs.prisms.empty())
        stream["ockham_verdict"] = decide(Method::ockham(), xs.prisms);
    a.summary["experimental_stream"] = stream;
    return a;
}

// ---- orchestration --------------------------------------------------------

std::vector<std::filesystem::path> emit_plots(const std::vector<ModuleArtifacts>& modules,
                                              const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& m : modules) {
        if (m.plots.empty()) continue;
        std::filesystem::create_directories(out_dir / "plots");
        for (const auto& [name, table] : m.plots) {
            const auto p = out_dir / "plots" / name;
            write_file_atomic(p, table.str());
            out.push_back(p);
        }
    }
    return out;
}

RunResult run(const ExperimentConfig& config) {
    config.validate();
    RunResult result;
    if (config.experiments.empty()) return result;
    const auto start = std::chrono::steady_clock::now();

    for (const auto& name : {"lineworld", "gaussian", "predsel", "perrin"}) {
        if (!config.runs(name)) continue;
        const std::string n = name;
        try {
            if (n == "lineworld") result.modules.push_back(run_lineworld(config));
            if (n == "gaussian") result.modules.push_back(run_gaussian(config));
            if (n == "predsel") result.modules.push_back(run_predsel(config));
            if (n == "perrin") result.modules.push_back(run_perrin(config));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw Error(n + ": " + e.what());
        }
    }

    const std::filesystem::path dir = config.out_dir;
    std::filesystem::create_directories(dir);
    const bool as_json = config.format == "json";
    json summary{{"version", kVersion}, {"seed", config.seed}, {"modules", json::object()}};
    for (const auto& m : result.modules) {
        for (const auto& [name, table] : m.tables) {
            const auto p = dir / (name + (as_json ? ".json" : ".csv"));
            write_file_atomic(p, as_json ? table.records().dump(2) + "\n" : table.str());
            result.files.push_back(p);
        }
        for (const auto& [name, doc] : m.documents) {
            const auto p = dir / name;
            write_file_atomic(p, doc.dump(2) + "\n");
            result.files.push_back(p);
        }
        summary["modules"][m.module] = m.summary;
        for (const auto& v : m.violations) result.violations.push_back(v);
    }
    for (auto& p : emit_plots(result.modules, dir)) result.files.push_back(std::move(p));

    json violations = json::array();
    for (const auto& v : result.violations)
        violations.push_back({{"module", v.module}, {"check", v.check}, {"detail", v.detail}});
    summary["violations"] = violations;
    const auto summary_path = dir / "summary.json";
    write_file_atomic(summary_path, summary.dump(2) + "\n");
    result.files.push_back(summary_path);

    json digests = json::object();
    for (const auto& p : result.files) {
        std::ifstream is(p, std::ios::binary);
        const std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        digests[std::filesystem::relative(p, dir).generic_string()] = sha256_hex(data);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest{{"tool", "convlab"}, {"version", kVersion}, {"config", to_json(config)},
                  {"wall_clock_seconds", wall}, {"digests", digests}};
    const auto manifest_path = dir / "manifest.json";
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    result.files.push_back(manifest_path);
    return result;
}

}  // namespace convlab
