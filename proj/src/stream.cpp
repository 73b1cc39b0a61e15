#include "convlab/stream.hpp"

#include <cmath>
#include <string>

#include "convlab/errors.hpp"

namespace convlab {

void to_json(nlohmann::json& j, const Interval& iv) { j = nlohmann::json::array({iv.lo, iv.hi}); }

double StreamSpec::half_width(std::size_t t) const {
    return delta0 * std::pow(ratio, static_cast<double>(t));
}

double StreamSpec::offset(std::size_t t) const {
    return offsets.empty() ? 0.0 : offsets[t % offsets.size()];
}

void StreamSpec::validate() const {
    if (!(std::isfinite(delta0) && delta0 > 0.0))
        throw ConfigError("stream delta0 must be a positive finite number");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError("stream ratio must lie in (0,1), got " + std::to_string(ratio));
    for (double o : offsets)
        if (!std::isfinite(o)) throw ConfigError("stream offsets must be finite");
}

void to_json(nlohmann::json& j, const StreamSpec& s) {
    j = {{"delta0", s.delta0}, {"ratio", s.ratio}, {"offsets", s.offsets}};
}

void from_json(const nlohmann::json& j, StreamSpec& s) {
    s.delta0 = j.at("delta0").get<double>();
    s.ratio = j.at("ratio").get<double>();
    s.offsets = j.value("offsets", std::vector<double>{});
}

namespace {

Interval raw_interval(double x, const StreamSpec& spec, std::size_t t) {
    const double h = spec.half_width(t);
    const double o = spec.offset(t);
    if (std::abs(o) > 1.0)
        throw StreamError("drift offset " + std::to_string(o) + " at stage " + std::to_string(t) +
                          " evicts the true value");
    Interval iv{x - h * (1.0 + o), x + h * (1.0 - o)};
    if (!iv.valid() || !iv.contains(x))
        throw StreamError("stage " + std::to_string(t) + " interval is degenerate or misses the true value");
    return iv;
}

}  // namespace

std::vector<Interval> stream_intervals(double x, const StreamSpec& spec, std::size_t count) {
    spec.validate();
    std::vector<Interval> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        Interval iv = raw_interval(x, spec, t);
        if (t > 0 && !iv.subset_of(out.back()))
            throw StreamError("drift breaks nesting at stage " + std::to_string(t));
        out.push_back(iv);
    }
    return out;
}

Interval stream_interval(double x, const StreamSpec& spec, std::size_t t) {
    return stream_intervals(x, spec, t + 1).back();
}

}  // namespace convlab
