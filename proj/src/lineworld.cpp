#include "convlab/lineworld.hpp"

#include <cmath>
#include <stdexcept>

#include "convlab/errors.hpp"
#include "convlab/io.hpp"

namespace convlab::lineworld {

namespace {

constexpr std::size_t kOracleScanLimit = 4096;

void require_nested(std::span<const Interval> history) {
    if (history.empty()) throw StreamError("empty interval history");
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (!history[i].valid()) throw StreamError("degenerate interval at stage " + std::to_string(i));
        if (i > 0 && !history[i].subset_of(history[i - 1]))
            throw StreamError("interval history not nested at stage " + std::to_string(i));
    }
}

// First stage at which the stream interval excludes 0, from the closed form
// of the stream geometry (independent of the interval arithmetic in stream.cpp).
std::optional<std::size_t> first_exclusion_stage(const LineWorld& w, const StreamSpec& spec) {
    if (w.theta == 0.0) return std::nullopt;
    for (std::size_t t = 0; t < kOracleScanLimit; ++t) {
        const double h = spec.half_width(t);
        const double o = spec.offset(t);
        const double reach = w.theta > 0 ? h * (1.0 + o) : h * (1.0 - o);
        if (reach < std::abs(w.theta)) return t;
    }
    return std::nullopt;
}

std::optional<LimitBehavior> mstar_limit(const LineWorld& w, const StreamSpec& spec) {
    if (w.theta == 0.0) return LimitBehavior::settles(Verdict::Simple, 0);
    return LimitBehavior::settles(Verdict::Complex, first_exclusion_stage(w, spec));
}

nlohmann::json history_json(std::span<const Interval> h) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& iv : h) j.push_back(iv);
    return j;
}

}  // namespace

std::string LineWorld::id() const { return "theta=" + format_double(theta); }

Verdict Method::operator()(std::span<const Interval> history) const {
    require_nested(history);
    return rule(history);
}

Verdict mstar_decide(const Interval& e) {
    return e.contains(0.0) ? Verdict::Simple : Verdict::Complex;
}

Method mstar() {
    return {"M*", [](std::span<const Interval> h) { return mstar_decide(h.back()); }, mstar_limit};
}

Method constant(Verdict v) {
    return {"always-" + std::string(to_string(v)), [v](std::span<const Interval>) { return v; },
            [v](const LineWorld&, const StreamSpec&) -> std::optional<LimitBehavior> {
                return LimitBehavior::settles(v, 0);
            }};
}

Method narrow_complex(double width_threshold) {
    return {"narrow-complex(" + format_double(width_threshold) + ")",
            [width_threshold](std::span<const Interval> h) {
                if (h.back().width() < width_threshold) return Verdict::Complex;
                return mstar_decide(h.back());
            },
            [](const LineWorld&, const StreamSpec&) -> std::optional<LimitBehavior> {
                return LimitBehavior::settles(Verdict::Complex);
            }};
}

Method early_complex() {
    return {"early-complex",
            [](std::span<const Interval> h) {
                if (h.size() == 1) return Verdict::Complex;
                return mstar_decide(h.back());
            },
            [](const LineWorld& w, const StreamSpec& spec) -> std::optional<LimitBehavior> {
                if (w.theta == 0.0) return LimitBehavior::settles(Verdict::Simple, 1);
                // Stage 0 is already Complex, so a tail starting at 1 starts at 0.
                auto lim = mstar_limit(w, spec);
                if (lim && lim->from_stage == 1u) lim->from_stage = 0;
                return lim;
            }};
}

Method edge_complex(double edge_fraction) {
    return {"edge-complex(" + format_double(edge_fraction) + ")",
            [edge_fraction](std::span<const Interval> h) {
                const Interval& e = h.back();
                if (e.contains(0.0) && std::min(-e.lo, e.hi) < edge_fraction * e.width())
                    return Verdict::Complex;
                return mstar_decide(e);
            },
            nullptr};
}

Method stubborn_complex(double width_threshold) {
    return {"stubborn-complex(" + format_double(width_threshold) + ")",
            [width_threshold](std::span<const Interval> h) {
                for (const auto& e : h) {
                    const double mid = 0.5 * (e.lo + e.hi);
                    if (e.width() < width_threshold && e.contains(0.0) && std::abs(mid) > 0.1 * e.width())
                        return Verdict::Complex;
                }
                return mstar_decide(h.back());
            },
            nullptr};
}

std::vector<Method> razor_violators() {
    return {narrow_complex(0.01), early_complex(), edge_complex(0.1), stubborn_complex(0.05)};
}

Interval canonical_stream(const LineWorld& w, const StreamSpec& spec, std::size_t t) {
    return stream_interval(w.theta, spec, t);
}

StreamTrace<Interval> run_trace(const Method& m, const LineWorld& w, const StreamSpec& spec,
                                std::size_t horizon) {
    const auto intervals = stream_intervals(w.theta, spec, horizon);
    StreamTrace<Interval> trace{w.id(), {}};
    trace.stages.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::span<const Interval> prefix(intervals.data(), t + 1);
        trace.stages.push_back({intervals[t], m(prefix)});
    }
    return trace;
}

std::vector<ConvergenceRecord> check_pointwise(const Method& m, std::span<const LineWorld> worlds,
                                               const StreamSpec& spec, std::size_t horizon) {
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    std::vector<ConvergenceRecord> out;
    out.reserve(worlds.size());
    for (const auto& w : worlds) {
        const auto trace = run_trace(m, w, spec, horizon);
        const auto oracle = m.oracle ? m.oracle(w, spec) : std::nullopt;
        auto rec = classify_convergence(trace, w.truth(), oracle);
        if (oracle && oracle->from_stage && *oracle->from_stage < horizon &&
            rec.status == ConvergenceStatus::Converges && rec.settle_stage != oracle->from_stage)
            throw std::logic_error("simulated settle stage contradicts analytic oracle at " + w.id());
        out.push_back(std::move(rec));
    }
    return out;
}

UniformRefutation refute_uniform(const Method& m, double prescribed_length) {
    if (!(prescribed_length > 0.0)) throw ConfigError("prescribed length must be positive");
    const double l = prescribed_length;
    std::vector<Interval> history{{-l, l}, {-l / 2, l / 2}};
    const Verdict v = m(history);
    // Simple is false at any nonzero point of the final interval; anything
    // else is false at theta = 0.
    const LineWorld world{v == Verdict::Simple ? l / 10 : 0.0};
    UniformRefutation r{world, history, history.size() - 1, v, {}};
    r.witness.description = m.name + " outputs " + std::string(to_string(v)) + " at " + world.id() +
                            " after evidence of width " + format_double(history.back().width());
    r.witness.replay = {{"method", m.name},
                        {"world", {{"theta", world.theta}}},
                        {"history", history_json(history)},
                        {"stage", r.failing_stage},
                        {"verdict", v},
                        {"truth", world.truth()}};
    return r;
}

std::string_view to_string(RazorConsequence c) {
    switch (c) {
        case RazorConsequence::PointwiseFail: return "POINTWISE_FAIL";
        case RazorConsequence::StabilityFail: return "STABILITY_FAIL";
        case RazorConsequence::NoneFound: return "NONE_FOUND";
    }
    return "?";
}

RazorReport razor_necessity_probe(const Method& m, const RazorSearchBudget& budget) {
    static const double kThetas[] = {0.0, 1e-3, -1e-3, 1e-2, -1e-2, 0.05, -0.05, 0.2, -0.2};
    static const std::vector<std::vector<double>> kDrifts = {{}, {0.5}, {-0.5}, {0.9}, {-0.9}};
    constexpr double kRatio = 0.7;

    RazorReport report;
    std::vector<Interval> violation;
    for (const auto& drift : kDrifts) {
        const StreamSpec spec{1.0, kRatio, drift};
        for (double theta : kThetas) {
            std::vector<Interval> stream;
            try {
                stream = stream_intervals(theta, spec, budget.stages);
            } catch (const StreamError&) {
                continue;
            }
            for (std::size_t t = 0; t < stream.size(); ++t) {
                if (!stream[t].contains(0.0)) break;  // nested: 0 never returns
                const std::span<const Interval> prefix(stream.data(), t + 1);
                if (m(prefix) == Verdict::Complex) {
                    violation.assign(prefix.begin(), prefix.end());
                    break;
                }
            }
            if (!violation.empty()) break;
        }
        if (!violation.empty()) break;
    }
    if (violation.empty()) return report;
    report.violation = violation;

    // Continue toward theta = 0 by shrinking the violating interval about 0.
    const Interval e = violation.back();
    const std::size_t s = violation.size() - 1;
    std::vector<Interval> history = violation;
    double scale = 1.0;
    for (std::size_t j = 0; j < budget.continuation; ++j) {
        scale *= kRatio;
        history.push_back({e.lo * scale, e.hi * scale});
        if (m(history) == Verdict::Simple) {
            // Complex was true at any nonzero point of this interval, and has
            // now been retracted there.
            const Interval& last = history.back();
            const double theta = last.hi > 0.0 ? 0.5 * last.hi : 0.5 * last.lo;
            report.consequence = RazorConsequence::StabilityFail;
            report.consequence_world = LineWorld{theta};
            report.consequence_history = history;
            report.stages = StagePair{s, history.size() - 1};
            break;
        }
    }
    if (report.consequence == RazorConsequence::NoneFound) {
        report.consequence = RazorConsequence::PointwiseFail;
        report.consequence_world = LineWorld{0.0};
        report.consequence_history = history;
        report.stages = StagePair{s, history.size() - 1};
    }

    report.witness = Witness{
        m.name + ": Complex while 0 is still inside " + "[" + format_double(e.lo) + ", " +
            format_double(e.hi) + "] -> " + std::string(to_string(report.consequence)) + " at " +
            report.consequence_world->id(),
        {{"method", m.name},
         {"world", {{"theta", report.consequence_world->theta}}},
         {"history", history_json(report.consequence_history)},
         {"stages", {report.stages->first, report.stages->second}},
         {"consequence", std::string(to_string(report.consequence))}}};
    return report;
}

}  // namespace convlab::lineworld
