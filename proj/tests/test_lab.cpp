#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ckm/errors.hpp"
#include "ckm/lab.hpp"

using namespace ckm;
using namespace ckm::lab;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("ckm_test_lab_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json minimal_simulate() {
    return json::parse(R"({
        "schema_version": 1,
        "mode": "simulate",
        "system": {"omegas": [0.3, -0.3], "lambda": 1.0},
        "initial": {"x": [0.1, -0.1], "y": [0.2, 0.0]},
        "horizon": 5.0
    })");
}

} // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(minimal_simulate());
    CHECK(cfg.mode == Mode::simulate);
    CHECK(cfg.omegas == std::vector<double>{0.3, -0.3});
    CHECK(cfg.lambda == 1.0);
    CHECK(cfg.horizon == 5.0);
    CHECK(cfg.centered);

    auto j = minimal_simulate();
    j["integrator"] = {{"rel_tol", 1e-9}, {"abs_tol", {1e-11, 1e-11, 1e-12, 1e-12}}};
    j["frame"] = "lab";
    const auto c2 = parse_config(j);
    CHECK(c2.integrator.rel_tol == 1e-9);
    CHECK(c2.integrator.abs_tol.size() == 4);
    CHECK_FALSE(c2.centered);
}

TEST_CASE("config rejects malformed documents") {
    auto bad = [](auto edit) {
        auto j = minimal_simulate();
        edit(j);
        CHECK_THROWS_AS((void)parse_config(j), InvalidInput);
    };
    bad([](json &j) { j["colour"] = "blue"; });
    bad([](json &j) { j["system"]["gamma"] = 1.0; });
    bad([](json &j) { j["integrator"] = {{"rtol", 1e-8}}; });
    bad([](json &j) { j.erase("schema_version"); });
    bad([](json &j) { j["schema_version"] = 2; });
    bad([](json &j) { j["mode"] = "dance"; });
    bad([](json &j) { j["initial"]["x"] = {0.1}; });
    bad([](json &j) { j["horizon"] = -1.0; });
    bad([](json &j) { j["system"]["lambda"] = "big"; });
    bad([](json &j) { j["frame"] = "rotating"; });
    bad([](json &j) { j["seed"] = -3; });
    bad([](json &j) { j["initial"]["random"] = {{"x_range", {0, 1}}, {"y_range", {0, 1}}}; });
    CHECK_THROWS_AS((void)load_config("/nonexistent/config.json"), InvalidInput);
}

TEST_CASE("config serialization round trips for every preset") {
    for (const auto &name : preset_names()) {
        CAPTURE(name);
        const auto cfg = preset(name);
        const json j = to_json(cfg);
        CHECK(to_json(parse_config(j)) == j);
    }
    CHECK_THROWS_AS((void)preset("fig-none"), InvalidInput);
}

TEST_CASE("strong-coupling presets carry the reference values digit for digit") {
    for (const char *name : {"fig-strong", "fig-strong-zero-omega"}) {
        const auto cfg = preset(name);
        CHECK(cfg.lambda == 1.1);
        CHECK(cfg.horizon == 50.0);
        CHECK(cfg.x0 == std::vector<double>{0.85, 0.36, 0.62, 1.10, 0.33});
        CHECK(cfg.y0 == std::vector<double>{1.18, 0.66, 0.39, 1.53, 1.30});
    }
    CHECK(preset("fig-strong").omegas == std::vector<double>{-0.14, -0.20, -0.32, -0.02, 0.68});
    CHECK(preset("fig-strong-zero-omega").omegas == std::vector<double>(5, 0.0));
    CHECK(preset("fig-cherry-a").lambda == 0.7);
    CHECK(preset("fig-cherry-b").lambda == cherry::capital_lambda_c_exact(1.0));
    CHECK(preset("fig-cherry-c").lambda == 0.99);
    for (const char *name : {"fig-cherry-a", "fig-cherry-b", "fig-cherry-c"}) {
        const auto g = preset(name).grid;
        CHECK(g.x_range == std::pair<double, double>{0.0, 2.0 * pi});
        CHECK(g.y_range == std::pair<double, double>{-2.0, 2.0});
    }
}

TEST_CASE("seeded random initial phases") {
    auto cfg = preset("fig-strong-random");
    const auto a = initial_phases(cfg);
    const auto b = initial_phases(cfg);
    CHECK(a == b);
    std::mt19937_64 gen(cfg.seed);
    const double u = static_cast<double>(gen() >> 11) / 9007199254740992.0;
    CHECK(a.first[0] == cfg.random_initial->x_range.first +
                            (cfg.random_initial->x_range.second - cfg.random_initial->x_range.first) * u);
    for (double v : a.first) {
        CHECK(v >= 0.0);
        CHECK(v < pi / 2.0);
    }
    cfg.seed = 2;
    CHECK(initial_phases(cfg) != a);
}

TEST_CASE("simulate then classify from the written CSV gives the same report") {
    const auto dir = scratch("roundtrip");
    const auto sim = run(preset("fig-strong"), {dir / "sim", 1});
    REQUIRE(sim.report["status"] == "completed");
    CHECK(fs::exists(dir / "sim" / "trajectory.csv"));
    CHECK(fs::exists(dir / "sim" / "config.json"));
    const auto header = read_csv(dir / "sim" / "trajectory.csv").header;
    CHECK(header == std::vector<std::string>{"t", "x_1", "x_2", "x_3", "x_4", "x_5", "y_1", "y_2", "y_3", "y_4", "y_5"});

    auto cls = preset("fig-strong");
    cls.mode = Mode::classify;
    cls.input = (dir / "sim" / "trajectory.csv").string();
    const auto out = run(cls, {dir / "cls", 1});
    const auto a = sync_report_from_json(sim.report["sync"]);
    const auto b = sync_report_from_json(out.report["sync"]);
    CHECK(a == b);
    CHECK(a.full_phase_locking);
    CHECK(a.frequency_sync);
    CHECK_FALSE(a.phase_sync);
    CHECK(sync_report_from_json(to_json(a)) == a);
}

TEST_CASE("period, blow-up, equilibria and flow-field runs") {
    const auto dir = scratch("modes");
    const auto per = run(preset("fig-period"), {dir / "period", 1});
    CHECK(std::abs(per.report["relative_error"].get<double>()) < 1e-6);
    CHECK(std::abs(per.report["residue_period"].get<double>() - 2.0 * pi / std::sqrt(3.0)) < 1e-6);

    for (const char *name : {"fig-blowup-weak", "fig-blowup-critical", "fig-blowup-strong"}) {
        const auto b = run(preset(name), {dir / name, 1});
        CHECK(b.report["status"] == "blow_up");
        CHECK(b.report["max_energy_deviation_below_10"].get<double>() < 1e-6);
        CHECK(b.report["termination_time"].get<double>() <= b.report["escape_time_bound"].get<double>());
    }

    const auto eq = run(preset("fig-cherry-equilibria"), {dir / "eq", 1});
    CHECK(eq.report["equilibria"].size() == 2);

    const auto ff = run(preset("fig-cherry-a"), {dir / "ff", 1});
    const auto table = read_csv(dir / "ff" / "flowfield.csv");
    CHECK(table.header == std::vector<std::string>{"x", "y", "xdot", "ydot"});
    CHECK(table.rows.size() == 41 * 21);
    CHECK(parse_config(json::parse(slurp(dir / "ff" / "config.json"))).lambda == 0.7);
    CHECK(json::parse(slurp(dir / "ff" / "equilibria.json"))["equilibria"].size() == 2);

    const auto hc = run(preset("fig-homoclinic"), {dir / "hc", 1});
    const auto ht = read_csv(dir / "hc" / "homoclinic.csv");
    CHECK(ht.header == std::vector<std::string>{"x", "y", "C"});
    CHECK(ht.rows.size() == 201 * 200);
}

TEST_CASE("sweep census and worker independence") {
    const auto dir = scratch("sweep");
    const auto cfg = preset("fig-cherry-sweep");
    const auto one = run(cfg, {dir / "w1", 1});
    const auto four = run(cfg, {dir / "w4", 4});
    CHECK(slurp(dir / "w1" / "summary.csv") == slurp(dir / "w4" / "summary.csv"));
    for (std::size_t i = 0; i < cfg.sweep_lambdas.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu.json", i);
        CHECK(slurp(dir / "w1" / "sweep_points" / name) == slurp(dir / "w4" / "sweep_points" / name));
    }
    const auto &rows = one.report["rows"];
    REQUIRE(rows.size() == 9);
    const std::vector<std::string> regimes{"below", "below", "below", "below", "at",
                                           "between", "between", "between", "beyond"};
    const std::vector<int> counts{2, 2, 2, 2, 2, 3, 3, 3, -1};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CAPTURE(i);
        CHECK(rows[i]["regime"] == regimes[i]);
        if (counts[i] < 0) {
            CHECK(rows[i]["equilibria_count"].is_null());
            CHECK(rows[i]["stability_tags"] == "unsupported");
        } else {
            CHECK(rows[i]["equilibria_count"] == counts[i]);
        }
    }
    CHECK(rows[0]["stability_tags"] == "unstable;stable");
    CHECK(rows[4]["stability_tags"] == "semistable-real-axis;stable");
    CHECK(rows[5]["stability_tags"] == "stable;unstable;stable");
    const auto summary = slurp(dir / "w1" / "summary.csv");
    CHECK(summary.rfind("lambda,regime,equilibria_count,stability_tags\n", 0) == 0);
}

TEST_CASE("CSV reading and writing") {
    const auto dir = scratch("csv");
    const std::vector<std::vector<double>> rows{{0.1, 1.0 / 3.0}, {-2.5e-300, 6.02214076e23}};
    write_csv(dir / "a.csv", {"p", "q"}, rows);
    const auto t = read_csv(dir / "a.csv");
    CHECK(t.header == std::vector<std::string>{"p", "q"});
    CHECK(t.rows == rows);
    CHECK(format_double(0.1) == "0.10000000000000001");

    {
        std::ofstream out(dir / "ragged.csv");
        out << "a,b\n1,2\n3\n";
    }
    try {
        (void)read_csv(dir / "ragged.csv");
        FAIL("expected an error");
    } catch (const InvalidInput &e) {
        CHECK(std::string(e.what()).find("ragged.csv:3:") != std::string::npos);
    }
    {
        std::ofstream out(dir / "text.csv");
        out << "a,b\n1,zebra\n";
    }
    CHECK_THROWS_AS((void)read_csv(dir / "text.csv"), InvalidInput);
    CHECK_THROWS_AS((void)read_csv(dir / "missing.csv"), InvalidInput);

    ode::Trajectory tr;
    tr.times = {0.0, 0.5};
    tr.states = {{1.0, 2.0}, {1.5, 2.5}};
    write_trajectory_csv(dir / "pair.csv", tr);
    CHECK(read_csv(dir / "pair.csv").header == std::vector<std::string>{"t", "x", "y"});
    const auto back = read_trajectory_csv(dir / "pair.csv");
    CHECK(back.times == tr.times);
    CHECK(back.states == tr.states);
    CHECK(back.termination.status == ode::Status::completed);
    CHECK(back.termination.time == 0.5);
}
