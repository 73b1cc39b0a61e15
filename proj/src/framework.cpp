#include "convlab/framework.hpp"

#include "convlab/errors.hpp"

namespace convlab {

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Simple: return "SIMPLE";
        case Verdict::Complex: return "COMPLEX";
        case Verdict::Suspend: return "SUSPEND";
    }
    return "?";
}

Verdict verdict_from_string(std::string_view s) {
    if (s == "SIMPLE") return Verdict::Simple;
    if (s == "COMPLEX") return Verdict::Complex;
    if (s == "SUSPEND") return Verdict::Suspend;
    throw ConfigError("unknown verdict '" + std::string(s) + "'");
}

std::string_view to_string(ConvergenceStatus s) {
    switch (s) {
        case ConvergenceStatus::Converges: return "CONVERGES";
        case ConvergenceStatus::Diverges: return "DIVERGES";
        case ConvergenceStatus::Undetermined: return "UNDETERMINED";
    }
    return "?";
}

int status_code(ConvergenceStatus s) {
    switch (s) {
        case ConvergenceStatus::Converges: return 1;
        case ConvergenceStatus::Diverges: return 0;
        case ConvergenceStatus::Undetermined: return -1;
    }
    return -1;
}

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::Uniform: return "UNIFORM";
        case Mode::Pointwise: return "POINTWISE";
        case Mode::Stability: return "STABILITY";
        case Mode::HighProb: return "HIGH_PROB";
        case Mode::ProbOne: return "PROB_ONE";
        case Mode::AlmostEverywhere: return "ALMOST_EVERYWHERE";
        case Mode::MaximalDomain: return "MAXIMAL_DOMAIN";
    }
    return "?";
}

std::optional<std::size_t> settle_stage(std::span<const Verdict> verdicts, Verdict truth) {
    std::size_t s = verdicts.size();
    while (s > 0 && verdicts[s - 1] == truth) --s;
    if (s == verdicts.size()) return std::nullopt;
    return s;
}

ConvergenceRecord classify_convergence(std::string world_id, std::span<const Verdict> verdicts,
                                       Verdict truth, const std::optional<LimitBehavior>& oracle) {
    ConvergenceRecord rec{std::move(world_id), ConvergenceStatus::Undetermined, std::nullopt};
    const auto settled = settle_stage(verdicts, truth);

    if (oracle) {
        if (oracle->kind == LimitBehavior::Kind::NeverSettles || oracle->verdict != truth) {
            rec.status = ConvergenceStatus::Diverges;
            return rec;
        }
        // Oracle certifies the truth persists; the trace must show the tail.
        if (settled && (!oracle->from_stage || *oracle->from_stage < verdicts.size())) {
            rec.status = ConvergenceStatus::Converges;
            rec.settle_stage = settled;
        }
        return rec;
    }

    if (settled) {
        rec.status = ConvergenceStatus::Converges;
        rec.settle_stage = settled;
    }
    return rec;
}

StabilityResult check_stability(std::span<const Verdict> verdicts, Verdict truth) {
    std::optional<std::size_t> first_true;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i] == truth) {
            if (!first_true) first_true = i;
        } else if (first_true) {
            // Report the latest true output before the retraction.
            return {false, StagePair{i - 1, i}};
        }
    }
    return {};
}

void to_json(nlohmann::json& j, Verdict v) { j = std::string(to_string(v)); }

void to_json(nlohmann::json& j, const ConvergenceRecord& r) {
    j = {{"world", r.world_id}, {"status", std::string(to_string(r.status))}};
    j["settle_stage"] = r.settle_stage ? nlohmann::json(*r.settle_stage) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const Witness& w) {
    j = {{"description", w.description}, {"replay", w.replay}};
}

void to_json(nlohmann::json& j, const ModeReport& r) {
    j = {{"mode", std::string(to_string(r.mode))}, {"pass", r.pass}, {"witnesses", r.witnesses}};
    if (!r.metrics.empty()) j["metrics"] = r.metrics;
}

}  // namespace convlab
