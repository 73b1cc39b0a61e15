#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>

#include "doctest.h"

#include "convlab/errors.hpp"
#include "convlab/framework.hpp"
#include "convlab/io.hpp"
#include "convlab/methods.hpp"
#include "convlab/parallel.hpp"
#include "convlab/rng.hpp"
#include "convlab/stream.hpp"
#include "generators.hpp"

using namespace convlab;
using V = Verdict;

TEST_CASE("apply_method dispatches per family") {
    const std::vector<EvidenceItem> inside{Interval{-0.5, 0.5}};
    const std::vector<EvidenceItem> outside{Interval{0.2, 0.4}};
    CHECK(apply_method(lineworld::mstar(), inside) == V::Simple);
    CHECK(apply_method(lineworld::mstar(), outside) == V::Complex);

    const std::vector<EvidenceItem> prism{perrin::Prism{{0.9, 1.1}, {0.95, 1.2}}};
    CHECK(apply_method(perrin::Method::anti_realist(), prism) == V::Suspend);

    const std::vector<EvidenceItem> sample{gaussian::SampleSummary{100, 0.1}};
    CHECK(apply_method(gaussian::TestRule::m_dagger(), sample) == V::Simple);

    CHECK_THROWS_AS(apply_method(lineworld::mstar(), prism), ConfigError);
    CHECK_THROWS_AS(apply_method(lineworld::mstar(), std::span<const EvidenceItem>{}), ConfigError);
}

TEST_CASE("classify_convergence") {
    SUBCASE("all-simple trace at the simple world converges at 0") {
        const std::vector<V> v(10, V::Simple);
        const auto r = classify_convergence("theta=0", v, V::Simple);
        CHECK(r.status == ConvergenceStatus::Converges);
        CHECK(r.settle_stage == 0u);
    }
    SUBCASE("oracle says the overlap never ends") {
        const std::vector<V> v(10, V::Suspend);
        const auto r = classify_convergence("strand", v, V::Simple, LimitBehavior::settles(V::Suspend, 0));
        CHECK(r.status == ConvergenceStatus::Diverges);
        CHECK_FALSE(r.settle_stage);
    }
    SUBCASE("no oracle and a wrong final verdict stays undetermined") {
        const std::vector<V> v{V::Simple, V::Simple};
        CHECK(classify_convergence("w", v, V::Complex).status == ConvergenceStatus::Undetermined);
    }
    SUBCASE("oracle tail beyond the horizon") {
        const std::vector<V> v{V::Simple, V::Simple};
        const auto r = classify_convergence("w", v, V::Complex, LimitBehavior::settles(V::Complex, 5));
        CHECK(r.status == ConvergenceStatus::Undetermined);
    }
    SUBCASE("never settles") {
        const std::vector<V> v{V::Simple};
        const auto r = classify_convergence("w", v, V::Simple, LimitBehavior::never_settles());
        CHECK(r.status == ConvergenceStatus::Diverges);
    }
}

TEST_CASE("check_stability") {
    const std::vector<V> suspend(5, V::Suspend);
    CHECK(check_stability(suspend, V::Simple).pass);

    const std::vector<V> retract{V::Simple, V::Simple, V::Complex};
    const auto r = check_stability(retract, V::Simple);
    CHECK_FALSE(r.pass);
    REQUIRE(r.witness);
    CHECK(r.witness->first == 1);
    CHECK(r.witness->second == 2);
}

TEST_CASE("property: stability failures persist under extension") {
    for (int i = 0; i < gen::kCases; ++i) {
        auto r = gen::rng_for("stability-monotone", i);
        auto v = gen::verdicts(r);
        const V truth = gen::verdict(r);
        const auto before = check_stability(v, truth);
        for (int k = 0; k < 5; ++k) v.push_back(gen::verdict(r));
        const auto after = check_stability(v, truth);
        if (!before.pass) {
            CHECK_FALSE(after.pass);
            CHECK(after.witness == before.witness);
        }
    }
}

TEST_CASE("property: convergence implies a stable suffix") {
    for (int i = 0; i < gen::kCases; ++i) {
        auto r = gen::rng_for("converges-stable", i);
        const auto v = gen::verdicts(r);
        const V truth = gen::verdict(r);
        const auto rec = classify_convergence("w", v, truth);
        if (rec.status != ConvergenceStatus::Converges) continue;
        const std::span<const V> suffix(v.begin() + static_cast<std::ptrdiff_t>(*rec.settle_stage), v.end());
        CHECK(check_stability(suffix, truth).pass);
        for (auto x : suffix) CHECK(x == truth);
        if (*rec.settle_stage > 0) CHECK(v[*rec.settle_stage - 1] != truth);
    }
}

TEST_CASE("property: replaying evidence reproduces verdicts") {
    for (int i = 0; i < 50; ++i) {
        auto r = gen::rng_for("replay", i);
        const auto spec = gen::stream(r);
        const lineworld::LineWorld w{r.uniform(-0.5, 0.5)};
        for (const auto& m : {lineworld::mstar(), lineworld::early_complex(), lineworld::stubborn_complex(0.05)}) {
            const auto trace = lineworld::run_trace(m, w, spec, gen::usable_horizon(spec, w.theta, 25));
            std::vector<Interval> h;
            for (const auto& s : trace.stages) {
                h.push_back(s.evidence);
                CHECK(m(h) == s.verdict);
            }
        }
    }
}

TEST_CASE("stream intervals") {
    CHECK(stream_interval(0.0, StreamSpec::centered(1, 0.5), 2) == Interval{-0.25, 0.25});
    const auto e = stream_interval(0.3, StreamSpec::centered(1, 0.5), 0);
    CHECK(e.lo == doctest::Approx(-0.7));
    CHECK(e.hi == doctest::Approx(1.3));
    CHECK_THROWS_AS(stream_interval(0.0, StreamSpec::off_center(1, 0.5, {1.5}), 0), StreamError);
    // Alternating extreme offsets break nesting for slowly shrinking streams.
    CHECK_THROWS_AS(stream_intervals(0.0, StreamSpec::off_center(1, 0.9, {1.0, -1.0}), 3), StreamError);
    CHECK_THROWS_AS(StreamSpec::centered(1, 1.2).validate(), ConfigError);
    CHECK_THROWS_AS(StreamSpec::centered(0, 0.5).validate(), ConfigError);
}

TEST_CASE("property: streams contain the truth and nest") {
    for (int i = 0; i < gen::kCases; ++i) {
        auto r = gen::rng_for("stream-contract", i);
        const auto spec = gen::stream(r);
        const double x = r.uniform(-2, 2);
        const auto s = stream_intervals(x, spec, gen::usable_horizon(spec, x, 40));
        for (std::size_t t = 0; t < s.size(); ++t) {
            CHECK(s[t].contains(x));
            CHECK(s[t].width() == doctest::Approx(2 * spec.half_width(t)));
            if (t) CHECK(s[t].subset_of(s[t - 1]));
        }
    }
}

TEST_CASE("rng") {
    SUBCASE("fixed seed repeats") {
        Rng a(7), b(7);
        for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    }
    SUBCASE("derived seeds are distinct") {
        std::set<std::uint64_t> seen;
        for (std::uint64_t i = 0; i < 1000; ++i) {
            seen.insert(derive_seed(1, "a", i));
            seen.insert(derive_seed(1, "b", i));
        }
        CHECK(seen.size() == 2000);
    }
    SUBCASE("moments") {
        Rng r(11);
        const int n = 200000;
        double su = 0, sn = 0, sn2 = 0, se = 0;
        for (int i = 0; i < n; ++i) {
            su += r.uniform();
            const double z = r.normal();
            sn += z;
            sn2 += z * z;
            se += r.exponential(2.0);
        }
        CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
        CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
        CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
        CHECK(se / n == doctest::Approx(0.5).epsilon(0.02));
    }
}

TEST_CASE("parallel_for covers every index once") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                        if (i == 3) throw DomainError("boom");
                    }),
                    DomainError);
}

TEST_CASE("io helpers") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-10) == "-2.5e-10");
    CHECK(format_optional(std::nullopt).empty());

    CsvTable t({"a", "b"});
    t.add_row({"1", "x"});
    t.add_row({"", "2.5"});
    CHECK(t.str() == "a,b\n1,x\n,2.5\n");
    const auto j = t.records();
    CHECK(j[0]["a"] == 1.0);
    CHECK(j[0]["b"] == "x");
    CHECK(j[1]["a"].is_null());
    CHECK_THROWS_AS(t.add_row({"1"}), std::logic_error);

    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("witness and report serialization") {
    ModeReport r{Mode::Stability, true, {}, {{"traces", 3}}};
    r.fail({"retraction", {{"stages", {1, 2}}}});
    const nlohmann::json j = r;
    CHECK(j["mode"] == "STABILITY");
    CHECK(j["pass"] == false);
    CHECK(j["witnesses"][0]["replay"]["stages"][1] == 2);
    CHECK(verdict_from_string("COMPLEX") == V::Complex);
    CHECK(status_code(ConvergenceStatus::Undetermined) == -1);
}
