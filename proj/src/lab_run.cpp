#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <thread>

#include "ckm/ensemble_flow.hpp"
#include "ckm/errors.hpp"
#include "ckm/lab.hpp"
#include "ckm/pair.hpp"

namespace ckm::lab {

namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

void write_json(const fs::path &path, const json &j, RunResult &result) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
    result.artifacts.push_back(path);
}

json header(const RunConfig &cfg) {
    json j;
    j["schema_version"] = schema_version;
    j["mode"] = to_string(cfg.mode);
    if (!cfg.name.empty()) {
        j["name"] = cfg.name;
    }
    return j;
}

json equilibria_report(const cherry::CherryParams &p) {
    json j;
    j["omega"] = p.omega();
    j["lambda"] = p.lambda();
    j["regime"] = cherry::to_string(p.regime());
    j["capital_lambda_c"] = cherry::capital_lambda_c_exact(p.omega());
    j["lambda_c"] = p.omega();
    const auto r = cherry::critical_xs();
    j["critical_xs"] = {r[0], r[1], r[2], r[3]};
    json list = json::array();
    for (const auto &rec : cherry::equilibria_cherry(p)) {
        list.push_back(to_json(rec));
    }
    j["equilibria"] = list;
    return j;
}

void run_simulate(const RunConfig &cfg, const fs::path &dir, RunResult &result) {
    const SystemParams params(cfg.omegas, cfg.lambda);
    const auto [x, y] = initial_phases(cfg);
    const auto state = EnsembleState::from_parts(x, y);
    const auto ens = simulate_ensemble(params, state, cfg.horizon, cfg.integrator, cfg.centered);
    const auto &traj = ens.trajectory;

    const auto csv = dir / "trajectory.csv";
    write_trajectory_csv(csv, traj);
    result.artifacts.push_back(csv);

    json j = header(cfg);
    j["status"] = ode::to_string(traj.termination.status);
    j["termination_time"] = traj.termination.time;
    j["frame"] = ens.centered ? "centroid" : "lab";
    j["centroid"] = {{"x", ens.centroid.real()}, {"y", ens.centroid.imag()}};
    j["frame_rotation"] = params.frame_rotation();
    j["omegas"] = std::vector<double>(params.omegas().begin(), params.omegas().end());
    j["lambda"] = params.lambda();
    j["lambda_c"] = lambda_c(params.omegas());
    j["initial"] = {{"x", x}, {"y", y}};
    j["samples"] = traj.size();
    j["accepted_steps"] = traj.accepted_steps;
    j["rejected_steps"] = traj.rejected_steps;
    if (traj.termination.status == ode::Status::completed) {
        j["sync"] = to_json(classify(traj, params, cfg.thresholds));
    } else {
        j["sync"] = nullptr;
    }
    j["trajectory"] = csv.filename().string();
    write_json(dir / "report.json", j, result);
    result.report = j;
}

void run_classify(const RunConfig &cfg, const fs::path &dir, RunResult &result) {
    const SystemParams params(cfg.omegas, cfg.lambda);
    const auto traj = read_trajectory_csv(cfg.input);
    if (traj.states.front().size() != 2 * params.size()) {
        throw InvalidInput("trajectory has " + std::to_string(traj.states.front().size() / 2) +
                           " oscillators, system.omegas has " + std::to_string(params.size()));
    }
    json j = header(cfg);
    j["input"] = cfg.input;
    j["samples"] = traj.size();
    j["sync"] = to_json(classify(traj, params, cfg.thresholds));
    write_json(dir / "report.json", j, result);
    result.report = j;
}

void run_period(const RunConfig &cfg, const fs::path &dir, RunResult &result) {
    const pair::PairParams p(cfg.omega, cfg.lambda);
    const double x0 = cfg.x0[0];
    const double y0 = cfg.y0[0];
    const double analytic = pair::analytic_period(p);
    const double measured = pair::measured_period(x0, y0, p, cfg.integrator);
    const auto zeros = pair::zero_set(p, 0, 0);
    const auto contour = pair::contour_integral_circle(zeros[0], 0.1, p);

    auto sampling = cfg.integrator;
    sampling.max_step = std::min(sampling.max_step, measured / 400.0);
    const auto orbit = pair::integrate_pair(x0, y0, measured, p, sampling);
    const auto csv = dir / "trajectory.csv";
    write_trajectory_csv(csv, orbit);
    result.artifacts.push_back(csv);

    json j = header(cfg);
    j["omega"] = p.omega();
    j["lambda"] = p.lambda();
    j["regime"] = pair::to_string(p.regime());
    j["initial"] = {{"x", x0}, {"y", y0}};
    j["analytic_period"] = analytic;
    j["measured_period"] = measured;
    j["relative_error"] = measured / analytic - 1.0;
    j["residue_period"] = contour.value.real();
    j["residue_imag"] = contour.value.imag();
    j["residue_doubling_gap"] = contour.doubling_gap;
    j["trajectory"] = csv.filename().string();
    write_json(dir / "period.json", j, result);
    result.report = j;
}

void run_blowup(const RunConfig &cfg, const fs::path &dir, RunResult &result) {
    const pair::PairParams p(cfg.omega, cfg.lambda);
    const double x0 = cfg.x0[0];
    const double y0 = cfg.y0.empty() ? pair::blowup_manifold_y(x0, p) : cfg.y0[0];
    const auto traj = pair::integrate_pair(x0, y0, cfg.horizon, p, cfg.integrator);
    const double v = pair::min_escape_speed(p, x0);
    const double target = p.omega() / p.lambda();
    double drift = 0.0;
    for (const auto &s : traj.states) {
        if (std::abs(s[1]) > 10.0) {
            break;
        }
        drift = std::max(drift, std::abs(pair::conserved_E(s[0], s[1], p) - target));
    }
    const auto csv = dir / "trajectory.csv";
    write_trajectory_csv(csv, traj);
    result.artifacts.push_back(csv);

    json j = header(cfg);
    j["omega"] = p.omega();
    j["lambda"] = p.lambda();
    j["regime"] = pair::to_string(p.regime());
    j["initial"] = {{"x", x0}, {"y", y0}};
    j["status"] = ode::to_string(traj.termination.status);
    j["termination_time"] = traj.termination.time;
    j["blowup_threshold"] = cfg.integrator.blowup_threshold;
    j["min_escape_speed"] = v;
    j["escape_time_bound"] = (pi - x0) / v;
    j["energy_level"] = target;
    j["max_energy_deviation_below_10"] = drift;
    j["trajectory"] = csv.filename().string();
    write_json(dir / "blowup.json", j, result);
    result.report = j;
}

void run_equilibria(const RunConfig &cfg, const fs::path &dir, RunResult &result) {
    json j = header(cfg);
    j.update(equilibria_report(cherry::CherryParams(cfg.omega, cfg.lambda)));
    write_json(dir / "equilibria.json", j, result);
    result.report = j;
}

void run_flowfield(const RunConfig &cfg, const fs::path &dir, RunResult &result) {
    const auto &g = cfg.grid;
    json j = header(cfg);
    j["field"] = g.field;
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    j["x_range"] = {g.x_range.first, g.x_range.second};
    j["y_range"] = {g.y_range.first, g.y_range.second};
    std::vector<std::vector<double>> rows;
    if (g.field == "cherry") {
        const cherry::CherryParams p(cfg.omega, cfg.lambda);
        const auto ff = cherry::flow_field(p, g.x_range, g.y_range, g.nx, g.ny);
        for (std::size_t iy = 0; iy < ff.ny; ++iy) {
            for (std::size_t ix = 0; ix < ff.nx; ++ix) {
                rows.push_back({ff.x[ix], ff.y[iy], ff.xdot[iy * ff.nx + ix], ff.ydot[iy * ff.nx + ix]});
            }
        }
        const auto csv = dir / "flowfield.csv";
        write_csv(csv, {"x", "y", "xdot", "ydot"}, rows);
        result.artifacts.push_back(csv);
        j["omega"] = p.omega();
        j["lambda"] = p.lambda();
        j["regime"] = cherry::to_string(p.regime());
        j["csv"] = csv.filename().string();
        if (p.regime() != cherry::Regime::beyond) {
            json eq = header(cfg);
            eq.update(equilibria_report(p));
            write_json(dir / "equilibria.json", eq, result);
        }
    } else {
        for (std::size_t iy = 0; iy < g.ny; ++iy) {
            const double y = g.y_range.first + (g.y_range.second - g.y_range.first) * static_cast<double>(iy) /
                                                   static_cast<double>(g.ny - 1);
            for (std::size_t ix = 0; ix < g.nx; ++ix) {
                const double x = g.x_range.first + (g.x_range.second - g.x_range.first) * static_cast<double>(ix) /
                                                       static_cast<double>(g.nx - 1);
                double c = std::numeric_limits<double>::quiet_NaN();
                try {
                    c = pair::homoclinic_invariant(x, y);
                } catch (const Undefined &) {
                }
                rows.push_back({x, y, c});
            }
        }
        const auto csv = dir / "homoclinic.csv";
        write_csv(csv, {"x", "y", "C"}, rows);
        result.artifacts.push_back(csv);
        j["csv"] = csv.filename().string();
    }
    write_json(dir / "flowfield.json", j, result);
    result.report = j;
}

struct SweepRow {
    double lambda = 0.0;
    std::string regime;
    std::string count;
    std::string tags;
    json detail;
};

SweepRow sweep_point(double omega, double lambda) {
    SweepRow row;
    row.lambda = lambda;
    const cherry::CherryParams p(omega, lambda);
    row.regime = cherry::to_string(p.regime());
    if (p.regime() == cherry::Regime::beyond) {
        row.tags = "unsupported";
        row.detail = {{"omega", omega}, {"lambda", lambda}, {"regime", row.regime}, {"equilibria", nullptr}};
        return row;
    }
    row.detail = equilibria_report(p);
    const auto &list = row.detail["equilibria"];
    row.count = std::to_string(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
        row.tags += (i ? ";" : "") + list[i]["stability"].get<std::string>();
    }
    return row;
}

void run_sweep(const RunConfig &cfg, const RunOptions &options, const fs::path &dir, RunResult &result) {
    const std::size_t count = cfg.sweep_lambdas.size();
    std::vector<SweepRow> rows(count);
    std::vector<std::string> failures(count);
    const fs::path point_dir = dir / "sweep_points";
    fs::create_directories(point_dir);
    std::vector<fs::path> point_files(count);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                rows[i] = sweep_point(cfg.omega, cfg.sweep_lambdas[i]);
                char name[32];
                std::snprintf(name, sizeof name, "point_%04zu.json", i);
                point_files[i] = point_dir / name;
                std::ofstream out(point_files[i]);
                out << rows[i].detail.dump(2) << '\n';
                if (!out) {
                    failures[i] = "cannot write " + point_files[i].string();
                }
            } catch (const std::exception &e) {
                failures[i] = e.what();
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!failures[i].empty()) {
            throw Error("sweep point " + std::to_string(i) + " failed: " + failures[i]);
        }
    }
    result.artifacts.insert(result.artifacts.end(), point_files.begin(), point_files.end());

    const auto csv = dir / "summary.csv";
    {
        std::ofstream out(csv);
        out << "lambda,regime,equilibria_count,stability_tags\n";
        for (const auto &r : rows) {
            out << format_double(r.lambda) << ',' << r.regime << ',' << r.count << ',' << r.tags << '\n';
        }
        if (!out) {
            throw Error("cannot write " + csv.string());
        }
    }
    result.artifacts.push_back(csv);

    json j = header(cfg);
    j["omega"] = cfg.omega;
    j["capital_lambda_c"] = cherry::capital_lambda_c_exact(cfg.omega);
    json list = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        const auto &r = rows[i];
        list.push_back({{"lambda", r.lambda},
                        {"regime", r.regime},
                        {"equilibria_count", r.count.empty() ? json(nullptr) : json(std::stoi(r.count))},
                        {"stability_tags", r.tags},
                        {"detail", point_files[i].filename().string()}});
    }
    j["rows"] = list;
    write_json(dir / "sweep.json", j, result);
    result.report = j;
}

} // namespace

RunResult run(const RunConfig &cfg, const RunOptions &options) {
    validate(cfg);
    fs::create_directories(options.out_dir);
    RunResult result;
    write_json(options.out_dir / "config.json", to_json(cfg), result);
    switch (cfg.mode) {
    case Mode::simulate:
        run_simulate(cfg, options.out_dir, result);
        break;
    case Mode::classify:
        run_classify(cfg, options.out_dir, result);
        break;
    case Mode::period:
        run_period(cfg, options.out_dir, result);
        break;
    case Mode::blowup_demo:
        run_blowup(cfg, options.out_dir, result);
        break;
    case Mode::equilibria:
        run_equilibria(cfg, options.out_dir, result);
        break;
    case Mode::flowfield:
        run_flowfield(cfg, options.out_dir, result);
        break;
    case Mode::sweep:
        run_sweep(cfg, options, options.out_dir, result);
        break;
    }
    return result;
}

} // namespace ckm::lab
