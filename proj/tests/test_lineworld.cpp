#include <cmath>

#include "doctest.h"

#include "convlab/errors.hpp"
#include "convlab/lineworld.hpp"
#include "generators.hpp"

using namespace convlab;
using namespace convlab::lineworld;
using V = Verdict;

namespace {

bool admissible(const std::vector<Interval>& h, double theta) {
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!h[i].valid() || !h[i].contains(theta)) return false;
        if (i && !h[i].subset_of(h[i - 1])) return false;
    }
    return !h.empty();
}

// Random decision rules built from a few threshold shapes.
Method random_method(Rng& r) {
    const double w = r.uniform(0.001, 1.0);
    const double f = r.uniform(0.0, 0.5);
    switch (gen::index(r, 6)) {
        case 0: return constant(gen::verdict(r));
        case 1: return mstar();
        case 2: return narrow_complex(w);
        case 3: return edge_complex(f);
        case 4:
            return {"suspend-when-wide",
                    [w](std::span<const Interval> h) {
                        return h.back().width() > w ? V::Suspend : mstar_decide(h.back());
                    },
                    nullptr};
        default:
            return {"center-test",
                    [f](std::span<const Interval> h) {
                        const auto& e = h.back();
                        return std::abs(0.5 * (e.lo + e.hi)) <= f * e.width() ? V::Simple : V::Complex;
                    },
                    nullptr};
    }
}

std::vector<LineWorld> theta_grid() {
    std::vector<LineWorld> out;
    for (int i = 0; i <= 100; ++i) out.push_back({-0.5 + i / 100.0});
    return out;
}

}  // namespace

TEST_CASE("M* decision rule") {
    CHECK(mstar_decide({-0.5, 0.5}) == V::Simple);
    CHECK(mstar_decide({0.2, 0.4}) == V::Complex);
    CHECK(mstar_decide({0.0, 0.3}) == V::Simple);
    CHECK(mstar_decide({-0.3, 0.0}) == V::Simple);
}

TEST_CASE("methods reject malformed histories") {
    const std::vector<Interval> bad{{0, 1}, {-1, 2}};
    CHECK_THROWS_AS(mstar()(bad), StreamError);
    CHECK_THROWS_AS(mstar()(std::span<const Interval>{}), StreamError);
}

TEST_CASE("canonical stream") {
    const auto s = StreamSpec::centered(1, 0.5);
    CHECK(canonical_stream({0.0}, s, 2) == Interval{-0.25, 0.25});
    const auto e = canonical_stream({0.3}, s, 0);
    CHECK(e.lo == doctest::Approx(-0.7));
    CHECK(e.hi == doctest::Approx(1.3));

    // theta = 0.01: 0 drops out at the first t with 2 delta0 ratio^t < 0.02.
    std::size_t expected = 0;
    while (2 * std::pow(0.5, expected) >= 0.02) ++expected;
    for (std::size_t t = 0; t < 12; ++t)
        CHECK(canonical_stream({0.01}, s, t).contains(0.0) == (t < expected));
}

TEST_CASE("check_pointwise") {
    const std::vector<LineWorld> zero{{0.0}};
    const auto r0 = check_pointwise(mstar(), zero, StreamSpec::centered(1, 0.7), 60);
    CHECK(r0[0].status == ConvergenceStatus::Converges);
    CHECK(r0[0].settle_stage == 0u);

    const std::vector<LineWorld> tenth{{0.1}};
    // Centered: 0 leaves [0.1 - h, 0.1 + h] once 0.7^t < 0.1, at t = 7.
    const auto rc = check_pointwise(mstar(), tenth, StreamSpec::centered(1, 0.7), 60);
    CHECK(rc[0].settle_stage == 7u);
    // Drift 0.9 toward 0: needs 1.9 * 0.7^t < 0.1, i.e. t = 9, the same stage
    // as the full-width bound 2 * 0.7^t < 0.1.
    const auto rd = check_pointwise(mstar(), tenth, StreamSpec::off_center(1, 0.7, {0.9}), 60);
    CHECK(rd[0].settle_stage == 9u);
    CHECK(2 * std::pow(0.7, 9) < 0.1);
    CHECK(2 * std::pow(0.7, 8) > 0.1);

    const auto rn = check_pointwise(constant(V::Complex), zero, StreamSpec::centered(1, 0.7), 60);
    CHECK(rn[0].status == ConvergenceStatus::Diverges);

    CHECK_THROWS_AS(check_pointwise(mstar(), zero, StreamSpec::centered(1, 0.7), 0), ConfigError);
}

TEST_CASE("M* converges stably on the declared stream family") {
    const auto worlds = theta_grid();
    for (const auto& drift : std::vector<std::vector<double>>{{}, {0.5}, {-0.5}, {0.2, -0.1}}) {
        const StreamSpec spec{1.0, 0.7, drift};
        const auto recs = check_pointwise(mstar(), worlds, spec, 60);
        for (std::size_t i = 0; i < worlds.size(); ++i) {
            CHECK(recs[i].status == ConvergenceStatus::Converges);
            CHECK(check_stability(run_trace(mstar(), worlds[i], spec, 60), worlds[i].truth()).pass);
        }
    }
}

TEST_CASE("property: M* on random worlds and streams") {
    for (int i = 0; i < gen::kCases; ++i) {
        auto r = gen::rng_for("mstar-random", i);
        auto spec = gen::stream(r);
        spec.ratio = std::min(spec.ratio, 0.8);
        double theta = i % 5 == 0 ? 0.0 : r.uniform(-1, 1);
        if (theta != 0.0 && std::abs(theta) < 1e-6) theta = 1e-6;
        const LineWorld w{theta};
        const std::vector<LineWorld> ws{w};
        const auto horizon = gen::usable_horizon(spec, w.theta, 200);
        const auto rec = check_pointwise(mstar(), ws, spec, horizon);
        CHECK(rec[0].status == ConvergenceStatus::Converges);
        CHECK(check_stability(run_trace(mstar(), w, spec, horizon), w.truth()).pass);
    }
}

TEST_CASE("closed vs open boundary convention makes no difference to convergence") {
    const Method open{"M*-open",
                      [](std::span<const Interval> h) {
                          const auto& e = h.back();
                          return e.lo < 0.0 && 0.0 < e.hi ? V::Simple : V::Complex;
                      },
                      nullptr};
    const auto worlds = theta_grid();
    for (const auto& drift : std::vector<std::vector<double>>{{}, {0.5}, {-0.5}}) {
        const StreamSpec spec{1.0, 0.7, drift};
        const auto recs = check_pointwise(open, worlds, spec, 60);
        for (std::size_t i = 0; i < worlds.size(); ++i) {
            CHECK(recs[i].status == ConvergenceStatus::Converges);
            CHECK(check_stability(run_trace(open, worlds[i], spec, 60), worlds[i].truth()).pass);
        }
    }
}

TEST_CASE("refute_uniform") {
    const auto r = refute_uniform(mstar(), 0.1);
    CHECK(r.world.theta == doctest::Approx(0.01));
    CHECK(r.history.back() == Interval{-0.05, 0.05});
    CHECK(r.verdict == V::Simple);
    CHECK(r.verdict != r.world.truth());
    CHECK(admissible(r.history, r.world.theta));

    const auto c = refute_uniform(constant(V::Complex), 1.0);
    CHECK(c.world.theta == 0.0);
    const auto s = refute_uniform(constant(V::Suspend), 1.0);
    CHECK(s.world.theta == 0.0);
    CHECK(s.verdict == V::Suspend);

    CHECK(r.witness.replay["world"]["theta"] == r.world.theta);
    CHECK(r.witness.replay["history"].size() == r.history.size());
    CHECK_THROWS_AS(refute_uniform(mstar(), 0.0), ConfigError);
}

TEST_CASE("property: refute_uniform witnesses replay for random methods") {
    for (int i = 0; i < gen::kCases; ++i) {
        auto r = gen::rng_for("uniform-witness", i);
        const auto m = random_method(r);
        const double l = std::pow(10.0, -r.uniform(0, 4));
        const auto ref = refute_uniform(m, l);
        REQUIRE(admissible(ref.history, ref.world.theta));
        const std::span<const Interval> prefix(ref.history.data(), ref.failing_stage + 1);
        CHECK(m(prefix) == ref.verdict);
        CHECK(ref.verdict != ref.world.truth());
        CHECK(ref.history.back().width() <= l);
    }
}

TEST_CASE("razor_necessity_probe") {
    CHECK(razor_necessity_probe(mstar()).consequence == RazorConsequence::NoneFound);
    CHECK(razor_necessity_probe(constant(V::Suspend)).consequence == RazorConsequence::NoneFound);

    const auto n = razor_necessity_probe(narrow_complex(0.01));
    REQUIRE(n.violation);
    CHECK(n.violation->back().contains(0.0));
    CHECK(n.consequence != RazorConsequence::NoneFound);
}

TEST_CASE("every razor violator is flagged with a replayable consequence") {
    const auto suite = razor_violators();
    CHECK(suite.size() >= 3);
    for (const auto& m : suite) {
        CAPTURE(m.name);
        const auto rep = razor_necessity_probe(m);
        REQUIRE(rep.violation);
        REQUIRE(rep.consequence != RazorConsequence::NoneFound);
        REQUIRE(rep.consequence_world);
        REQUIRE(rep.stages);
        REQUIRE(rep.witness);
        const auto& h = rep.consequence_history;
        const double theta = rep.consequence_world->theta;
        CHECK(admissible(h, theta));
        const auto [s, e] = *rep.stages;
        CHECK(m(std::span<const Interval>(h.data(), s + 1)) == V::Complex);
        const V last = m(std::span<const Interval>(h.data(), e + 1));
        const V truth = rep.consequence_world->truth();
        if (rep.consequence == RazorConsequence::StabilityFail) {
            CHECK(truth == V::Complex);
            CHECK(last != V::Complex);
        } else {
            CHECK(theta == 0.0);
            CHECK(last != truth);
        }
        CHECK(rep.witness->replay["stages"][0] == s);
    }
}
