#include "convlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace convlab {

namespace {

using nlohmann::json;

const std::vector<std::string> kModules = {"lineworld", "gaussian", "predsel", "perrin"};

// Reads fields of one JSON object, tracking which keys were consumed so that
// leftovers can be rejected by name.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    template <class T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + ": wrong type");
        }
    }

    // Nested object; absent means defaults.
    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string where(const char* key = nullptr) const {
        std::string p = path_.empty() ? "/" : path_;
        if (key) p += (path_.empty() ? "" : "/") + std::string(key);
        return p;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError("unknown key '" + k + "' at " + where());
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& rule) {
    if (!ok) throw ConfigError(field + ": " + rule);
}

bool strictly_increasing(const std::vector<std::size_t>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

void read_lineworld(const json& j, LineworldConfig& c) {
    Fields f(j, "/lineworld");
    f.read("delta0", c.delta0);
    f.read("ratio", c.ratio);
    f.read("horizon", c.horizon);
    f.read("theta_min", c.theta_min);
    f.read("theta_max", c.theta_max);
    f.read("theta_step", c.theta_step);
    f.read("drifts", c.drifts);
    f.read("uniform_lengths", c.uniform_lengths);
    f.read("razor_stages", c.razor_stages);
    f.read("razor_continuation", c.razor_continuation);
    f.finish();
}

void read_gaussian(const json& j, GaussianConfig& c) {
    Fields f(j, "/gaussian");
    f.read("thetas", c.thetas);
    f.read("n_ladder", c.n_ladder);
    f.read("trials", c.trials);
    f.read("mc_max_n", c.mc_max_n);
    f.read("alphas", c.alphas);
    f.finish();
}

void read_regime(const json& j, const std::string& path, RegimeConfig& c) {
    Fields f(j, path);
    f.read("truth", c.truth);
    f.read("coeffs", c.coeffs);
    f.read("sigma", c.sigma);
    f.read("min_degree", c.min_degree);
    f.read("max_degree", c.max_degree);
    f.read("reps", c.reps);
    f.finish();
}

void read_predsel(const json& j, PredselConfig& c) {
    Fields f(j, "/predsel");
    f.read("n", c.n);
    if (auto* a = f.child("regime_a")) read_regime(*a, "/predsel/regime_a", c.regime_a);
    if (auto* b = f.child("regime_b")) read_regime(*b, "/predsel/regime_b", c.regime_b);
    if (auto* p = f.child("probe")) {
        Fields g(*p, "/predsel/probe");
        g.read("coeffs", c.probe.coeffs);
        g.read("sigma", c.probe.sigma);
        g.read("degree", c.probe.degree);
        g.read("reps", c.probe.reps);
        g.read("ladder", c.probe.ladder);
        g.read("seeds", c.probe.seeds);
        g.finish();
    }
    f.finish();
}

void read_perrin(const json& j, PerrinConfig& c) {
    Fields f(j, "/perrin");
    if (auto* g = f.child("grid")) {
        Fields h(*g, "/perrin/grid");
        h.read("lo", c.grid.lo);
        h.read("hi", c.grid.hi);
        h.read("step", c.grid.step);
        h.finish();
    }
    f.read("horizon", c.horizon);
    f.read("delta0", c.delta0);
    f.read("ratio", c.ratio);
    f.read("methods", c.methods);
    f.read("p", c.p);
    f.read("way1_eps", c.way1_eps);
    f.read("way2_delta0", c.way2_delta0);
    f.read("way3_delta0", c.way3_delta0);
    if (auto* e = f.child("estimator")) {
        Fields h(*e, "/perrin/estimator");
        auto& s = c.estimator;
        h.read("na", s.na);
        h.read("na_prime", s.na_prime);
        h.read("c", s.c);
        h.read("cprime", s.cprime);
        h.read("times", s.times);
        h.read("reps", s.reps);
        h.read("sizes", s.sizes);
        h.read("confidence", s.confidence);
        h.finish();
    }
    f.finish();
}

std::string line_column(std::string_view raw, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, raw.size()); ++i) {
        if (raw[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void validate_regime(const RegimeConfig& r, const std::string& path, std::size_t n) {
    require(r.truth == "poly" || r.truth == "abs", path + "/truth", "must be 'poly' or 'abs'");
    require(r.truth != "poly" || !r.coeffs.empty(), path + "/coeffs", "required for a polynomial truth");
    require(std::all_of(r.coeffs.begin(), r.coeffs.end(), [](double v) { return std::isfinite(v); }),
            path + "/coeffs", "must be finite");
    require(std::isfinite(r.sigma) && r.sigma > 0, path + "/sigma", "must be > 0");
    require(r.min_degree >= 0 && r.max_degree >= r.min_degree, path + "/max_degree",
            "need 0 <= min_degree <= max_degree");
    require(static_cast<std::size_t>(r.max_degree) + 2 <= n, path + "/max_degree", "need max_degree + 2 <= n");
    require(r.reps >= 100, path + "/reps", "must be >= 100");
}

}  // namespace

bool ExperimentConfig::runs(std::string_view experiment) const {
    return std::find(experiments.begin(), experiments.end(), experiment) != experiments.end();
}

void ExperimentConfig::validate() const {
    for (const auto& e : experiments)
        require(std::find(kModules.begin(), kModules.end(), e) != kModules.end(), "/experiment",
                "unknown experiment '" + e + "'");
    require(format == "csv" || format == "json", "/format", "must be 'csv' or 'json'");
    require(!out_dir.empty(), "/out_dir", "must be non-empty");

    const auto& l = lineworld;
    require(std::isfinite(l.delta0) && l.delta0 > 0, "/lineworld/delta0", "must be > 0");
    require(l.ratio > 0 && l.ratio < 1, "/lineworld/ratio", "must be in (0,1)");
    require(l.horizon >= 1, "/lineworld/horizon", "must be >= 1");
    require(l.theta_min <= l.theta_max, "/lineworld/theta_max", "must be >= theta_min");
    require(l.theta_step > 0, "/lineworld/theta_step", "must be > 0");
    require(!l.drifts.empty(), "/lineworld/drifts", "must list at least one stream");
    for (const auto& d : l.drifts)
        for (double o : d) require(std::isfinite(o) && std::abs(o) <= 1, "/lineworld/drifts", "offsets must lie in [-1,1]");
    for (double u : l.uniform_lengths) require(u > 0, "/lineworld/uniform_lengths", "lengths must be > 0");
    require(l.razor_stages >= 1 && l.razor_continuation >= 1, "/lineworld/razor_stages", "budgets must be >= 1");

    const auto& g = gaussian;
    require(!g.thetas.empty(), "/gaussian/thetas", "must be non-empty");
    for (double t : g.thetas) require(std::isfinite(t), "/gaussian/thetas", "must be finite");
    require(!g.n_ladder.empty() && g.n_ladder.front() >= 2 && strictly_increasing(g.n_ladder), "/gaussian/n_ladder",
            "must be strictly increasing with n >= 2");
    require(g.trials >= 1000, "/gaussian/trials", "must be >= 1000");
    require(!g.alphas.empty(), "/gaussian/alphas", "must be non-empty");
    for (double a : g.alphas) require(a > 0 && a < 1, "/gaussian/alphas", "must lie in (0,1)");

    const auto& p = predsel;
    require(p.n >= 2, "/predsel/n", "must be >= 2");
    validate_regime(p.regime_a, "/predsel/regime_a", p.n);
    validate_regime(p.regime_b, "/predsel/regime_b", p.n);
    require(std::isfinite(p.probe.sigma) && p.probe.sigma > 0, "/predsel/probe/sigma", "must be > 0");
    require(!p.probe.coeffs.empty() && static_cast<int>(p.probe.coeffs.size()) - 1 <= p.probe.degree,
            "/predsel/probe/degree", "truth must be representable at the probed degree");
    require(p.probe.reps >= 1 && p.probe.seeds >= 1, "/predsel/probe/reps", "must be >= 1");
    require(!p.probe.ladder.empty() && strictly_increasing(p.probe.ladder) &&
                p.probe.ladder.front() >= static_cast<std::size_t>(p.probe.degree) + 2,
            "/predsel/probe/ladder", "must be strictly increasing with n >= degree + 2");

    const auto& r = perrin;
    r.grid.validate();
    require(r.horizon >= 1, "/perrin/horizon", "must be >= 1");
    require(std::isfinite(r.delta0) && r.delta0 > 0, "/perrin/delta0", "must be > 0");
    require(r.ratio > 0 && r.ratio < 1, "/perrin/ratio", "must be in (0,1)");
    for (const auto& m : r.methods) make_perrin_method(r, m);
    const auto& e = r.estimator;
    require(e.na > 0 && e.na_prime > 0 && e.c > 0 && e.cprime > 0, "/perrin/estimator", "parameters must be > 0");
    require(!e.times.empty(), "/perrin/estimator/times", "must be non-empty");
    for (double t : e.times) require(t > 0, "/perrin/estimator/times", "must be > 0");
    require(e.reps >= 1, "/perrin/estimator/reps", "must be >= 1");
    require(!e.sizes.empty() && e.sizes.front() >= 2 && strictly_increasing(e.sizes), "/perrin/estimator/sizes",
            "must be strictly increasing with n >= 2");
    require(e.confidence > 0 && e.confidence < 1, "/perrin/estimator/confidence", "must lie in (0,1)");
}

perrin::Method make_perrin_method(const PerrinConfig& c, std::string_view name) {
    if (name == "OCKHAM") return perrin::Method::ockham();
    if (name == "ANTI_REALIST") return perrin::Method::anti_realist();
    try {
        if (name == "WAY1") return perrin::Method::way1(c.p, c.way1_eps);
        if (name == "WAY2") return perrin::Method::way2(c.p, c.way2_delta0);
        if (name == "WAY3") return perrin::Method::way3(c.way3_delta0);
    } catch (const ConfigError& e) {
        throw ConfigError("/perrin/" + std::string(name) + ": " + e.what());
    }
    throw ConfigError("/perrin/methods: unknown method '" + std::string(name) + "'");
}

ExperimentConfig validate_config(std::string_view raw) {
    json j;
    try {
        j = json::parse(raw.begin(), raw.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error at " + line_column(raw, e.byte) + ": " + e.what());
    }
    ExperimentConfig c;
    Fields f(j, "");
    if (auto* e = f.child("experiment")) {
        std::vector<std::string> names;
        if (e->is_string()) {
            names = {e->get<std::string>()};
        } else if (e->is_array() && std::all_of(e->begin(), e->end(), [](const json& v) { return v.is_string(); })) {
            names = e->get<std::vector<std::string>>();
        } else {
            throw ConfigError("/experiment: expected a name or a list of names");
        }
        c.experiments.clear();
        for (const auto& n : names) {
            if (n == "all")
                c.experiments.insert(c.experiments.end(), kModules.begin(), kModules.end());
            else
                c.experiments.push_back(n);
        }
    }
    f.read("seed", c.seed);
    f.read("out_dir", c.out_dir);
    f.read("check", c.check);
    f.read("format", c.format);
    if (auto* b = f.child("lineworld")) read_lineworld(*b, c.lineworld);
    if (auto* b = f.child("gaussian")) read_gaussian(*b, c.gaussian);
    if (auto* b = f.child("predsel")) read_predsel(*b, c.predsel);
    if (auto* b = f.child("perrin")) read_perrin(*b, c.perrin);
    f.finish();
    c.validate();
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    const auto regime = [](const RegimeConfig& r) {
        return json{{"truth", r.truth}, {"coeffs", r.coeffs}, {"sigma", r.sigma},
                    {"min_degree", r.min_degree}, {"max_degree", r.max_degree}, {"reps", r.reps}};
    };
    const auto& l = c.lineworld;
    const auto& g = c.gaussian;
    const auto& p = c.predsel;
    const auto& r = c.perrin;
    const auto& e = r.estimator;
    return {
        {"experiment", c.experiments},
        {"seed", c.seed},
        {"out_dir", c.out_dir},
        {"check", c.check},
        {"format", c.format},
        {"lineworld", {{"delta0", l.delta0}, {"ratio", l.ratio}, {"horizon", l.horizon},
                       {"theta_min", l.theta_min}, {"theta_max", l.theta_max}, {"theta_step", l.theta_step},
                       {"drifts", l.drifts}, {"uniform_lengths", l.uniform_lengths},
                       {"razor_stages", l.razor_stages}, {"razor_continuation", l.razor_continuation}}},
        {"gaussian", {{"thetas", g.thetas}, {"n_ladder", g.n_ladder}, {"trials", g.trials},
                      {"mc_max_n", g.mc_max_n}, {"alphas", g.alphas}}},
        {"predsel", {{"n", p.n}, {"regime_a", regime(p.regime_a)}, {"regime_b", regime(p.regime_b)},
                     {"probe", {{"coeffs", p.probe.coeffs}, {"sigma", p.probe.sigma}, {"degree", p.probe.degree},
                                {"reps", p.probe.reps}, {"ladder", p.probe.ladder}, {"seeds", p.probe.seeds}}}}},
        {"perrin", {{"grid", {{"lo", r.grid.lo}, {"hi", r.grid.hi}, {"step", r.grid.step}}},
                    {"horizon", r.horizon}, {"delta0", r.delta0}, {"ratio", r.ratio}, {"methods", r.methods},
                    {"p", r.p}, {"way1_eps", r.way1_eps}, {"way2_delta0", r.way2_delta0},
                    {"way3_delta0", r.way3_delta0},
                    {"estimator", {{"na", e.na}, {"na_prime", e.na_prime}, {"c", e.c}, {"cprime", e.cprime},
                                   {"times", e.times}, {"reps", e.reps}, {"sizes", e.sizes},
                                   {"confidence", e.confidence}}}}},
    };
}

}  // namespace convlab
