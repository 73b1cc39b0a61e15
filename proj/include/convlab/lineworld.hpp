#pragma once

// Non-stochastic point-null problem: is theta exactly 0, given nested
// intervals that always contain theta?

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convlab/framework.hpp"
#include "convlab/stream.hpp"

namespace convlab::lineworld {

struct LineWorld {
    double theta = 0.0;

    Verdict truth() const { return theta == 0.0 ? Verdict::Simple : Verdict::Complex; }
    std::string id() const;
};

// Decision rule over a finite interval history, plus an optional analytic
// account of its limiting behavior on a given stream.
struct Method {
    using Rule = std::function<Verdict(std::span<const Interval>)>;
    using Oracle = std::function<std::optional<LimitBehavior>(const LineWorld&, const StreamSpec&)>;

    std::string name;
    Rule rule;
    Oracle oracle;

    // Throws StreamError on an empty or non-nested history.
    Verdict operator()(std::span<const Interval> history) const;
};

Verdict mstar_decide(const Interval& e);

Method mstar();
Method constant(Verdict v);
// Razor violators: each outputs Complex on some history whose last interval
// still contains 0.
Method narrow_complex(double width_threshold);
Method early_complex();
Method edge_complex(double edge_fraction);
Method stubborn_complex(double width_threshold);
std::vector<Method> razor_violators();

Interval canonical_stream(const LineWorld& w, const StreamSpec& spec, std::size_t t);

StreamTrace<Interval> run_trace(const Method& m, const LineWorld& w, const StreamSpec& spec,
                                std::size_t horizon);

std::vector<ConvergenceRecord> check_pointwise(const Method& m, std::span<const LineWorld> worlds,
                                               const StreamSpec& spec, std::size_t horizon);

struct UniformRefutation {
    LineWorld world;
    std::vector<Interval> history;
    std::size_t failing_stage = 0;
    Verdict verdict = Verdict::Suspend;
    Witness witness;
};

UniformRefutation refute_uniform(const Method& m, double prescribed_length);

enum class RazorConsequence { PointwiseFail, StabilityFail, NoneFound };

std::string_view to_string(RazorConsequence c);

struct RazorSearchBudget {
    std::size_t stages = 60;
    std::size_t continuation = 120;
};

struct RazorReport {
    // History whose last interval contains 0 but on which the method says Complex.
    std::optional<std::vector<Interval>> violation;
    RazorConsequence consequence = RazorConsequence::NoneFound;
    // World at which the consequence is exhibited, the full history fed to the
    // method, and the stage pair (violation stage, retraction or last stage).
    std::optional<LineWorld> consequence_world;
    std::vector<Interval> consequence_history;
    std::optional<StagePair> stages;
    std::optional<Witness> witness;
};

RazorReport razor_necessity_probe(const Method& m, const RazorSearchBudget& budget = {});

}  // namespace convlab::lineworld
