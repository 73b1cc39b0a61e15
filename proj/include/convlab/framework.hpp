#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace convlab {

// A method's output at one stage. Simple is the simple hypothesis of the
// problem at hand (theta = 0, atomic theory true); Complex is its negation.
enum class Verdict { Simple, Complex, Suspend };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

enum class ConvergenceStatus { Converges, Diverges, Undetermined };

std::string_view to_string(ConvergenceStatus s);
// Plot encoding: converges 1, diverges 0, undetermined -1.
int status_code(ConvergenceStatus s);

template <class Evidence>
struct TraceStage {
    Evidence evidence;
    Verdict verdict;
};

template <class Evidence>
struct StreamTrace {
    std::string world_id;
    std::vector<TraceStage<Evidence>> stages;

    std::vector<Verdict> verdicts() const {
        std::vector<Verdict> out;
        out.reserve(stages.size());
        for (const auto& s : stages) out.push_back(s.verdict);
        return out;
    }
};

struct ConvergenceRecord {
    std::string world_id;
    ConvergenceStatus status = ConvergenceStatus::Undetermined;
    std::optional<std::size_t> settle_stage;
};

// What an analytic oracle knows about a method's behavior beyond the horizon
// of a simulated trace.
struct LimitBehavior {
    enum class Kind { Settles, NeverSettles };
    Kind kind = Kind::Settles;
    // Verdict output at every stage from some point on (Kind::Settles only).
    Verdict verdict = Verdict::Suspend;
    // First stage of the constant tail when the oracle can compute it.
    std::optional<std::size_t> from_stage;

    static LimitBehavior settles(Verdict v, std::optional<std::size_t> from = std::nullopt) {
        return {Kind::Settles, v, from};
    }
    static LimitBehavior never_settles() { return {Kind::NeverSettles, Verdict::Suspend, std::nullopt}; }
};

// Least stage s such that verdicts[s..] all equal truth; nullopt when the
// final verdict differs from truth (or the trace is empty).
std::optional<std::size_t> settle_stage(std::span<const Verdict> verdicts, Verdict truth);

ConvergenceRecord classify_convergence(std::string world_id, std::span<const Verdict> verdicts,
                                       Verdict truth,
                                       const std::optional<LimitBehavior>& oracle = std::nullopt);

template <class Evidence>
ConvergenceRecord classify_convergence(const StreamTrace<Evidence>& trace, Verdict truth,
                                       const std::optional<LimitBehavior>& oracle = std::nullopt) {
    const auto v = trace.verdicts();
    return classify_convergence(trace.world_id, v, truth, oracle);
}

// Stages (earlier, later) where the true answer was output and then replaced.
using StagePair = std::pair<std::size_t, std::size_t>;

struct StabilityResult {
    bool pass = true;
    std::optional<StagePair> witness;
};

StabilityResult check_stability(std::span<const Verdict> verdicts, Verdict truth);

template <class Evidence>
StabilityResult check_stability(const StreamTrace<Evidence>& trace, Verdict truth) {
    const auto v = trace.verdicts();
    return check_stability(v, truth);
}

enum class Mode { Uniform, Pointwise, Stability, HighProb, ProbOne, AlmostEverywhere, MaximalDomain };

std::string_view to_string(Mode m);

// A counterexample with everything needed to replay it: world, stream
// parameters, stage indices.
struct Witness {
    std::string description;
    nlohmann::json replay;
};

struct ModeReport {
    Mode mode = Mode::Pointwise;
    bool pass = true;
    std::vector<Witness> witnesses;
    std::map<std::string, double> metrics;

    void fail(Witness w) {
        pass = false;
        witnesses.push_back(std::move(w));
    }
};

void to_json(nlohmann::json& j, Verdict v);
void to_json(nlohmann::json& j, const ConvergenceRecord& r);
void to_json(nlohmann::json& j, const Witness& w);
void to_json(nlohmann::json& j, const ModeReport& r);

}  // namespace convlab
