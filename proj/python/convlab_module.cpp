#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "convlab/config.hpp"
#include "convlab/errors.hpp"
#include "convlab/gaussian.hpp"
#include "convlab/lineworld.hpp"
#include "convlab/perrin.hpp"
#include "convlab/predsel.hpp"
#include "convlab/runner.hpp"

namespace py = pybind11;
using namespace convlab;

namespace {

// JSON crosses the boundary through Python's own parser.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

gaussian::TestRule rule_from(const py::object& rule) {
    if (py::isinstance<py::float_>(rule) || py::isinstance<py::int_>(rule))
        return gaussian::TestRule::fixed_z(rule.cast<double>());
    const auto name = rule.cast<std::string>();
    if (name == "AIC") return gaussian::TestRule::aic();
    if (name == "BIC") return gaussian::TestRule::bic();
    if (name == "M_DAGGER") return gaussian::TestRule::m_dagger();
    throw ConfigError("unknown rule '" + name + "' (expected AIC, BIC, M_DAGGER or a z value)");
}

predsel::TruthSpec truth_from(const std::string& kind, const std::vector<double>& coeffs, double sigma) {
    if (kind == "poly") return predsel::TruthSpec::poly(coeffs, sigma);
    if (kind == "abs") return predsel::TruthSpec::abs(sigma);
    throw ConfigError("unknown truth '" + kind + "' (expected poly or abs)");
}

}  // namespace

PYBIND11_MODULE(_convlab, m) {
    m.doc() = "Convergence and model-selection experiments";
    m.attr("__version__") = std::string(kVersion);

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(config_error.ptr(), e.what());
        } catch (const DomainError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const Error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def(
        "truth_prob_analytic",
        [](const py::object& rule, double theta, std::size_t n) {
            return gaussian::truth_prob_analytic(rule_from(rule), {theta}, n);
        },
        py::arg("rule"), py::arg("theta"), py::arg("n"),
        "Probability that the rule outputs the true answer at sample size n.");

    m.def(
        "truth_prob_mc",
        [](const py::object& rule, double theta, std::size_t n, std::size_t trials, std::uint64_t seed) {
            const auto r = gaussian::truth_prob_mc(rule_from(rule), {theta}, n, trials, seed);
            return py::make_tuple(r.probability, r.standard_error);
        },
        py::arg("rule"), py::arg("theta"), py::arg("n"), py::arg("trials") = 200000, py::arg("seed") = 1,
        "Monte Carlo estimate as (probability, standard_error).");

    m.def(
        "mstar_check",
        [](const std::vector<double>& thetas, std::size_t horizon, double ratio, std::vector<double> offsets) {
            std::vector<lineworld::LineWorld> worlds;
            for (double t : thetas) worlds.push_back({t});
            const StreamSpec spec{1.0, ratio, std::move(offsets)};
            spec.validate();
            const auto m = lineworld::mstar();
            py::list out;
            const auto recs = lineworld::check_pointwise(m, worlds, spec, horizon);
            for (std::size_t i = 0; i < worlds.size(); ++i) {
                nlohmann::json j = recs[i];
                j["stable"] = check_stability(lineworld::run_trace(m, worlds[i], spec, horizon), worlds[i].truth()).pass;
                out.append(to_py(j));
            }
            return out;
        },
        py::arg("thetas"), py::arg("horizon") = 60, py::arg("ratio") = 0.7, py::arg("offsets") = std::vector<double>{},
        "Pointwise convergence and stability of M* at each line world.");

    m.def(
        "refute_uniform",
        [](double length) {
            const auto r = lineworld::refute_uniform(lineworld::mstar(), length);
            nlohmann::json j;
            j["theta"] = r.world.theta;
            j["failing_stage"] = r.failing_stage;
            j["verdict"] = r.verdict;
            j["history"] = r.history;
            return to_py(j);
        },
        py::arg("length"), "Witness that M* misses a prescribed uniform evidence length.");

    m.def(
        "perrin_score_sheet",
        [](const std::string& method, double step, std::size_t horizon) {
            PerrinConfig pc;
            perrin::ScoreSheetConfig sc;
            sc.grid.step = step;
            sc.grid.validate();
            sc.horizon = horizon;
            return to_py(perrin::to_json(perrin::score_sheet(make_perrin_method(pc, method), sc)));
        },
        py::arg("method"), py::arg("step") = 0.02, py::arg("horizon") = 40,
        "Almost-everywhere, maximality and stability report for a built-in method.");

    m.def(
        "regime_experiment",
        [](const std::string& truth, std::vector<double> coeffs, double sigma, int min_degree, int max_degree,
           std::size_t n, std::size_t reps, std::uint64_t seed) {
            auto j = predsel::to_json(predsel::regime_experiment(truth_from(truth, coeffs, sigma), min_degree,
                                                                 max_degree, n, reps, seed));
            return to_py(j);
        },
        py::arg("truth"), py::arg("coeffs") = std::vector<double>{}, py::arg("sigma") = 1.0,
        py::arg("min_degree") = 0, py::arg("max_degree") = 6, py::arg("n") = 500, py::arg("reps") = 2000,
        py::arg("seed") = 1, "AIC vs BIC selection frequencies and excess risks.");

    m.def(
        "validate_config", [](const std::string& raw) { return to_py(to_json(validate_config(raw))); },
        py::arg("raw"), "Validate a JSON config and return it with defaults filled in.");

    m.def(
        "run",
        [](const std::string& raw, const std::string& out_dir) {
            auto c = validate_config(raw);
            c.out_dir = out_dir;
            const auto r = [&] {
                py::gil_scoped_release release;
                return run(c);
            }();
            nlohmann::json j;
            j["files"] = nlohmann::json::array();
            for (const auto& f : r.files) j["files"].push_back(f.string());
            j["violations"] = nlohmann::json::array();
            for (const auto& v : r.violations)
                j["violations"].push_back({{"module", v.module}, {"check", v.check}, {"detail", v.detail}});
            return to_py(j);
        },
        py::arg("config"), py::arg("out_dir"), "Run the configured experiments and write their outputs.");
}
