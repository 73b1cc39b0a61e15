#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

namespace convlab {

// Closed real interval [lo, hi] with lo < hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool subset_of(const Interval& outer) const { return outer.lo <= lo && hi <= outer.hi; }
    bool valid() const { return lo < hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

void to_json(nlohmann::json& j, const Interval& iv);

// Geometric stream family: at stage t the half-width is delta0 * ratio^t and
// the true value sits at relative offset o_t inside the interval
//   [x - h(1 + o_t), x + h(1 - o_t)].
// o = 0 is centered; o -> 1 pushes the interval below x. Offsets cycle
// through `offsets`; an empty list means centered.
struct StreamSpec {
    double delta0 = 1.0;
    double ratio = 0.5;
    std::vector<double> offsets;

    double half_width(std::size_t t) const;
    double offset(std::size_t t) const;
    // Throws ConfigError on non-positive delta0, ratio outside (0,1) or
    // non-finite offsets.
    void validate() const;

    static StreamSpec centered(double delta0, double ratio) { return {delta0, ratio, {}}; }
    static StreamSpec off_center(double delta0, double ratio, std::vector<double> offsets) {
        return {delta0, ratio, std::move(offsets)};
    }
};

void to_json(nlohmann::json& j, const StreamSpec& s);
void from_json(const nlohmann::json& j, StreamSpec& s);

// Interval at stage t for true value x; validates containment and nesting
// against all earlier stages (StreamError otherwise).
Interval stream_interval(double x, const StreamSpec& spec, std::size_t t);

// Stages 0..count-1 of the same stream, validated in one pass.
std::vector<Interval> stream_intervals(double x, const StreamSpec& spec, std::size_t count);

}  // namespace convlab
