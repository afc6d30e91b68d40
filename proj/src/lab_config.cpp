#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "ckm/errors.hpp"
#include "ckm/lab.hpp"
#include "ckm/pair.hpp"

namespace ckm::lab {

namespace {

constexpr double pi = std::numbers::pi;

// Key whitelists per JSON object.
void reject_unknown(const json &obj, const std::string &where, std::initializer_list<const char *> allowed) {
    if (!obj.is_object()) {
        throw InvalidInput(where + " must be a JSON object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &item : obj.items()) {
        if (!ok.contains(item.key())) {
            throw InvalidInput("unknown key '" + item.key() + "' in " + where);
        }
    }
}

double number(const json &obj, const char *key, const std::string &where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw InvalidInput(where + "." + key + " is required");
    }
    if (!it->is_number()) {
        throw InvalidInput(where + "." + key + " must be a number");
    }
    return it->get<double>();
}

std::vector<double> numbers(const json &v, const std::string &where) {
    if (!v.is_array()) {
        throw InvalidInput(where + " must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto &e : v) {
        if (!e.is_number()) {
            throw InvalidInput(where + " must be an array of numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

std::pair<double, double> range(const json &v, const std::string &where) {
    const auto r = numbers(v, where);
    if (r.size() != 2 || !std::isfinite(r[0]) || !std::isfinite(r[1]) || !(r[1] >= r[0])) {
        throw InvalidInput(where + " must be [lo, hi] with lo <= hi");
    }
    return {r[0], r[1]};
}

std::size_t count(const json &obj, const char *key, const std::string &where) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_integer() || it->get<long long>() < 0) {
        throw InvalidInput(where + "." + key + " must be a non-negative integer");
    }
    return it->get<std::size_t>();
}

void coupling_pair(const json &obj, const std::string &where, double &omega, double &lambda) {
    reject_unknown(obj, where, {"omega", "lambda"});
    omega = number(obj, "omega", where);
    lambda = number(obj, "lambda", where);
}

void require_positive(double v, const std::string &what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidInput(what + " must be positive and finite");
    }
}

bool needs_system(Mode m) { return m == Mode::simulate || m == Mode::classify; }
bool needs_pair(Mode m) { return m == Mode::period || m == Mode::blowup_demo; }

} // namespace

const char *to_string(Mode m) noexcept {
    switch (m) {
    case Mode::simulate:
        return "simulate";
    case Mode::period:
        return "period";
    case Mode::equilibria:
        return "equilibria";
    case Mode::flowfield:
        return "flowfield";
    case Mode::blowup_demo:
        return "blowup-demo";
    case Mode::sweep:
        return "sweep";
    case Mode::classify:
        return "classify";
    }
    return "?";
}

Mode mode_from_string(const std::string &name) {
    for (Mode m : {Mode::simulate, Mode::period, Mode::equilibria, Mode::flowfield, Mode::blowup_demo, Mode::sweep,
                   Mode::classify}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw InvalidInput("unknown mode '" + name + "'");
}

RunConfig parse_config(const json &doc) {
    reject_unknown(doc, "config",
                   {"schema_version", "mode", "name", "system", "pair", "cherry", "initial", "seed", "horizon", "frame",
                    "integrator", "sync", "grid", "sweep", "input"});
    const auto ver = doc.find("schema_version");
    if (ver == doc.end() || !ver->is_number_integer() || ver->get<int>() != schema_version) {
        throw InvalidInput("schema_version must be " + std::to_string(schema_version));
    }
    RunConfig cfg;
    if (!doc.contains("mode") || !doc["mode"].is_string()) {
        throw InvalidInput("config.mode must be a string");
    }
    cfg.mode = mode_from_string(doc["mode"].get<std::string>());
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) {
            throw InvalidInput("config.name must be a string");
        }
        cfg.name = doc["name"].get<std::string>();
    }
    if (doc.contains("system")) {
        const auto &s = doc["system"];
        reject_unknown(s, "system", {"omegas", "lambda"});
        if (!s.contains("omegas")) {
            throw InvalidInput("system.omegas is required");
        }
        cfg.omegas = numbers(s["omegas"], "system.omegas");
        cfg.lambda = number(s, "lambda", "system");
    }
    if (doc.contains("pair")) {
        coupling_pair(doc["pair"], "pair", cfg.omega, cfg.lambda);
    }
    if (doc.contains("cherry")) {
        coupling_pair(doc["cherry"], "cherry", cfg.omega, cfg.lambda);
    }
    if (doc.contains("initial")) {
        const auto &ic = doc["initial"];
        reject_unknown(ic, "initial", {"x", "y", "random"});
        if (ic.contains("random")) {
            if (ic.contains("x") || ic.contains("y")) {
                throw InvalidInput("initial takes either explicit x/y or random, not both");
            }
            const auto &r = ic["random"];
            reject_unknown(r, "initial.random", {"x_range", "y_range"});
            if (!r.contains("x_range") || !r.contains("y_range")) {
                throw InvalidInput("initial.random needs x_range and y_range");
            }
            cfg.random_initial = RandomInitial{range(r["x_range"], "initial.random.x_range"),
                                               range(r["y_range"], "initial.random.y_range")};
        }
        if (ic.contains("x")) {
            cfg.x0 = numbers(ic["x"], "initial.x");
        }
        if (ic.contains("y")) {
            cfg.y0 = numbers(ic["y"], "initial.y");
        }
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            throw InvalidInput("seed must be a non-negative integer");
        }
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("horizon")) {
        cfg.horizon = number(doc, "horizon", "config");
    }
    if (doc.contains("frame")) {
        const auto f = doc["frame"].is_string() ? doc["frame"].get<std::string>() : std::string{};
        if (f != "centroid" && f != "lab") {
            throw InvalidInput("frame must be \"centroid\" or \"lab\"");
        }
        cfg.centered = f == "centroid";
    }
    if (doc.contains("integrator")) {
        const auto &ig = doc["integrator"];
        reject_unknown(ig, "integrator",
                       {"rel_tol", "abs_tol", "initial_step", "max_step", "blowup_threshold", "max_steps"});
        auto &c = cfg.integrator;
        if (ig.contains("rel_tol")) {
            c.rel_tol = number(ig, "rel_tol", "integrator");
        }
        if (ig.contains("abs_tol")) {
            c.abs_tol = ig["abs_tol"].is_array() ? numbers(ig["abs_tol"], "integrator.abs_tol")
                                                  : std::vector<double>{number(ig, "abs_tol", "integrator")};
        }
        if (ig.contains("initial_step")) {
            c.initial_step = number(ig, "initial_step", "integrator");
        }
        if (ig.contains("max_step")) {
            c.max_step = number(ig, "max_step", "integrator");
        }
        if (ig.contains("blowup_threshold")) {
            c.blowup_threshold = number(ig, "blowup_threshold", "integrator");
        }
        if (ig.contains("max_steps")) {
            c.max_steps = count(ig, "max_steps", "integrator");
        }
    }
    if (doc.contains("sync")) {
        const auto &s = doc["sync"];
        reject_unknown(s, "sync", {"eps_sync", "tail_fraction", "growth_margin"});
        if (s.contains("eps_sync")) {
            cfg.thresholds.eps_sync = number(s, "eps_sync", "sync");
        }
        if (s.contains("tail_fraction")) {
            cfg.thresholds.tail_fraction = number(s, "tail_fraction", "sync");
        }
        if (s.contains("growth_margin")) {
            cfg.thresholds.growth_margin = number(s, "growth_margin", "sync");
        }
    }
    if (doc.contains("grid")) {
        const auto &g = doc["grid"];
        reject_unknown(g, "grid", {"x_range", "y_range", "nx", "ny", "field"});
        if (!g.contains("x_range") || !g.contains("y_range")) {
            throw InvalidInput("grid needs x_range and y_range");
        }
        cfg.grid.x_range = range(g["x_range"], "grid.x_range");
        cfg.grid.y_range = range(g["y_range"], "grid.y_range");
        cfg.grid.nx = count(g, "nx", "grid");
        cfg.grid.ny = count(g, "ny", "grid");
        if (g.contains("field")) {
            if (!g["field"].is_string()) {
                throw InvalidInput("grid.field must be a string");
            }
            cfg.grid.field = g["field"].get<std::string>();
        }
    }
    if (doc.contains("sweep")) {
        const auto &s = doc["sweep"];
        reject_unknown(s, "sweep", {"omega", "lambdas"});
        cfg.omega = number(s, "omega", "sweep");
        if (!s.contains("lambdas")) {
            throw InvalidInput("sweep.lambdas is required");
        }
        cfg.sweep_lambdas = numbers(s["lambdas"], "sweep.lambdas");
    }
    if (doc.contains("input")) {
        if (!doc["input"].is_string()) {
            throw InvalidInput("input must be a path string");
        }
        cfg.input = doc["input"].get<std::string>();
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open config file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

void validate(const RunConfig &cfg) {
    const Mode m = cfg.mode;
    auto require_horizon = [&] { require_positive(cfg.horizon, "horizon"); };
    if (needs_system(m)) {
        if (cfg.omegas.size() < 2) {
            throw InvalidInput("system.omegas needs at least 2 oscillators, got " + std::to_string(cfg.omegas.size()));
        }
        for (double w : cfg.omegas) {
            if (!std::isfinite(w)) {
                throw InvalidInput("system.omegas must be finite");
            }
        }
        require_positive(cfg.lambda, "system.lambda");
        cfg.thresholds.validate();
    }
    if (needs_pair(m) || m == Mode::equilibria) {
        require_positive(cfg.omega, "omega");
        require_positive(cfg.lambda, "lambda");
    }
    const std::size_t n = cfg.omegas.size();
    switch (m) {
    case Mode::simulate:
        require_horizon();
        if (cfg.random_initial) {
            if (!cfg.x0.empty() || !cfg.y0.empty()) {
                throw InvalidInput("initial takes either explicit x/y or random, not both");
            }
        } else if (cfg.x0.size() != n || cfg.y0.size() != n) {
            throw InvalidInput("initial.x and initial.y must each have " + std::to_string(n) + " entries");
        }
        cfg.integrator.validate(2 * n);
        break;
    case Mode::classify:
        if (cfg.input.empty()) {
            throw InvalidInput("classify needs an input trajectory path");
        }
        break;
    case Mode::period: {
        const pair::PairParams p(cfg.omega, cfg.lambda);
        if (p.regime() != pair::Regime::weak) {
            throw InvalidInput("period mode needs lambda < omega");
        }
        if (cfg.x0.size() != 1 || cfg.y0.size() != 1) {
            throw InvalidInput("period mode needs one initial point: initial.x and initial.y of length 1");
        }
        cfg.integrator.validate(2);
        break;
    }
    case Mode::blowup_demo: {
        const pair::PairParams p(cfg.omega, cfg.lambda);
        if (cfg.x0.size() != 1 || cfg.y0.size() > 1) {
            throw InvalidInput("blowup-demo needs initial.x of length 1 (initial.y optional)");
        }
        (void)pair::blowup_manifold_y(cfg.x0[0], p);
        require_horizon();
        cfg.integrator.validate(2);
        break;
    }
    case Mode::equilibria:
        if (!(cfg.lambda < cfg.omega * (1.0 - 1e-12))) {
            throw InvalidInput("equilibria are analysed only for lambda below omega");
        }
        break;
    case Mode::flowfield:
        if (cfg.grid.nx < 2 || cfg.grid.ny < 2) {
            throw InvalidInput("grid needs nx, ny >= 2");
        }
        if (cfg.grid.field == "cherry") {
            require_positive(cfg.omega, "cherry.omega");
            require_positive(cfg.lambda, "cherry.lambda");
        } else if (cfg.grid.field != "homoclinic-invariant") {
            throw InvalidInput("grid.field must be \"cherry\" or \"homoclinic-invariant\"");
        }
        break;
    case Mode::sweep:
        require_positive(cfg.omega, "sweep.omega");
        if (cfg.sweep_lambdas.empty()) {
            throw InvalidInput("sweep.lambdas must not be empty");
        }
        for (double l : cfg.sweep_lambdas) {
            require_positive(l, "sweep lambda");
        }
        break;
    }
}

json to_json(const RunConfig &cfg) {
    json j;
    j["schema_version"] = schema_version;
    j["mode"] = to_string(cfg.mode);
    if (!cfg.name.empty()) {
        j["name"] = cfg.name;
    }
    switch (cfg.mode) {
    case Mode::simulate:
    case Mode::classify:
        j["system"] = {{"omegas", cfg.omegas}, {"lambda", cfg.lambda}};
        break;
    case Mode::period:
    case Mode::blowup_demo:
        j["pair"] = {{"omega", cfg.omega}, {"lambda", cfg.lambda}};
        break;
    case Mode::equilibria:
        j["cherry"] = {{"omega", cfg.omega}, {"lambda", cfg.lambda}};
        break;
    case Mode::flowfield:
        if (cfg.grid.field == "cherry") {
            j["cherry"] = {{"omega", cfg.omega}, {"lambda", cfg.lambda}};
        }
        break;
    case Mode::sweep:
        j["sweep"] = {{"omega", cfg.omega}, {"lambdas", cfg.sweep_lambdas}};
        break;
    }
    if (cfg.random_initial) {
        j["initial"]["random"] = {{"x_range", {cfg.random_initial->x_range.first, cfg.random_initial->x_range.second}},
                                  {"y_range", {cfg.random_initial->y_range.first, cfg.random_initial->y_range.second}}};
    } else if (!cfg.x0.empty() || !cfg.y0.empty()) {
        if (!cfg.x0.empty()) {
            j["initial"]["x"] = cfg.x0;
        }
        if (!cfg.y0.empty()) {
            j["initial"]["y"] = cfg.y0;
        }
    }
    j["seed"] = cfg.seed;
    if (cfg.horizon > 0.0) {
        j["horizon"] = cfg.horizon;
    }
    if (cfg.mode == Mode::simulate) {
        j["frame"] = cfg.centered ? "centroid" : "lab";
    }
    const auto &c = cfg.integrator;
    json ig = {{"rel_tol", c.rel_tol},
               {"blowup_threshold", c.blowup_threshold},
               {"max_steps", c.max_steps},
               {"initial_step", c.initial_step}};
    ig["abs_tol"] = c.abs_tol.size() == 1 ? json(c.abs_tol[0]) : json(c.abs_tol);
    if (std::isfinite(c.max_step)) {
        ig["max_step"] = c.max_step;
    }
    j["integrator"] = ig;
    if (needs_system(cfg.mode)) {
        j["sync"] = {{"eps_sync", cfg.thresholds.eps_sync},
                     {"tail_fraction", cfg.thresholds.tail_fraction},
                     {"growth_margin", cfg.thresholds.growth_margin}};
    }
    if (cfg.mode == Mode::flowfield) {
        j["grid"] = {{"x_range", {cfg.grid.x_range.first, cfg.grid.x_range.second}},
                     {"y_range", {cfg.grid.y_range.first, cfg.grid.y_range.second}},
                     {"nx", cfg.grid.nx},
                     {"ny", cfg.grid.ny},
                     {"field", cfg.grid.field}};
    }
    if (!cfg.input.empty()) {
        j["input"] = cfg.input;
    }
    return j;
}

std::pair<std::vector<double>, std::vector<double>> initial_phases(const RunConfig &cfg) {
    if (!cfg.random_initial) {
        return {cfg.x0, cfg.y0};
    }
    std::mt19937_64 gen(cfg.seed);
    auto draw = [&](std::pair<double, double> r) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        return r.first + (r.second - r.first) * u;
    };
    const std::size_t n = cfg.omegas.size();
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (auto &v : x) {
        v = draw(cfg.random_initial->x_range);
    }
    for (auto &v : y) {
        v = draw(cfg.random_initial->y_range);
    }
    return {x, y};
}

std::vector<std::string> preset_names() {
    return {"fig-strong",        "fig-strong-zero-omega", "fig-strong-random", "fig-counterexample",
            "fig-period",        "fig-blowup-weak",       "fig-blowup-critical", "fig-blowup-strong",
            "fig-homoclinic",    "fig-cherry-a",          "fig-cherry-b",      "fig-cherry-c",
            "fig-cherry-equilibria", "fig-cherry-sweep"};
}

RunConfig preset(const std::string &name) {
    RunConfig cfg;
    cfg.name = name;
    const std::vector<double> figure_omegas{-0.14, -0.20, -0.32, -0.02, 0.68};
    auto strong = [&](std::vector<double> omegas) {
        cfg.mode = Mode::simulate;
        cfg.omegas = std::move(omegas);
        cfg.lambda = 1.1;
        cfg.x0 = {0.85, 0.36, 0.62, 1.10, 0.33};
        cfg.y0 = {1.18, 0.66, 0.39, 1.53, 1.30};
        cfg.horizon = 50.0;
        cfg.integrator.rel_tol = 1e-10;
        // Pairwise y differences shrink far below 1e-16; only relative control is meaningful.
        cfg.integrator.abs_tol = {1e-300};
        cfg.integrator.max_step = 0.05;
    };
    auto blowup = [&](double omega, double lambda, double x0) {
        cfg.mode = Mode::blowup_demo;
        cfg.omega = omega;
        cfg.lambda = lambda;
        cfg.x0 = {x0};
        cfg.horizon = 20.0;
        cfg.integrator.rel_tol = 1e-10;
        cfg.integrator.abs_tol = {1e-12};
    };
    auto cherry_field = [&](double lambda) {
        cfg.mode = Mode::flowfield;
        cfg.omega = 1.0;
        cfg.lambda = lambda;
        cfg.grid = {{0.0, 2.0 * pi}, {-2.0, 2.0}, 41, 21, "cherry"};
    };

    if (name == "fig-strong") {
        strong(figure_omegas);
    } else if (name == "fig-strong-zero-omega") {
        strong(std::vector<double>(5, 0.0));
    } else if (name == "fig-strong-random") {
        strong(figure_omegas);
        cfg.x0.clear();
        cfg.y0.clear();
        cfg.random_initial = RandomInitial{{0.0, pi / 2.0}, {0.0, pi / 2.0}};
        cfg.seed = 1;
    } else if (name == "fig-counterexample") {
        const double period = 2.0 * pi / std::sqrt(3.0);
        cfg.mode = Mode::simulate;
        cfg.omegas = {1.0, -1.0};
        cfg.lambda = 1.0;
        cfg.x0 = {pi / 2.0, 0.0};
        cfg.y0 = {2.0, 0.0};
        cfg.horizon = 10.0 * period;
        cfg.integrator.rel_tol = 1e-10;
        cfg.integrator.abs_tol = {1e-12};
        cfg.integrator.max_step = period / 200.0;
    } else if (name == "fig-period") {
        cfg.mode = Mode::period;
        cfg.omega = 2.0;
        cfg.lambda = 1.0;
        cfg.x0 = {pi / 2.0};
        cfg.y0 = {2.0};
        cfg.integrator.rel_tol = 1e-10;
        cfg.integrator.abs_tol = {1e-12};
    } else if (name == "fig-blowup-weak") {
        blowup(1.0, 0.5, pi / 2.0);
    } else if (name == "fig-blowup-critical") {
        blowup(1.0, 1.0, 0.75 * pi);
    } else if (name == "fig-blowup-strong") {
        blowup(1.0, 2.0, pi - std::asin(0.5) + 0.1);
    } else if (name == "fig-homoclinic") {
        cfg.mode = Mode::flowfield;
        cfg.grid = {{-pi, pi}, {-2.0, 2.0}, 201, 200, "homoclinic-invariant"};
    } else if (name == "fig-cherry-a") {
        cherry_field(0.7);
    } else if (name == "fig-cherry-b") {
        cherry_field(cherry::capital_lambda_c_exact(1.0));
    } else if (name == "fig-cherry-c") {
        cherry_field(0.99);
    } else if (name == "fig-cherry-equilibria") {
        cfg.mode = Mode::equilibria;
        cfg.omega = 1.0;
        cfg.lambda = 0.7;
    } else if (name == "fig-cherry-sweep") {
        cfg.mode = Mode::sweep;
        cfg.omega = 1.0;
        cfg.sweep_lambdas = {0.5, 0.6, 0.7, 0.8, cherry::capital_lambda_c_exact(1.0), 0.9, 0.95, 0.99, 1.0};
    } else {
        throw InvalidInput("unknown preset '" + name + "'");
    }
    validate(cfg);
    return cfg;
}

} // namespace ckm::lab
