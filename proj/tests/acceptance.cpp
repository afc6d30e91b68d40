// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ckm/cherry.hpp"
#include "ckm/ensemble_flow.hpp"
#include "ckm/errors.hpp"
#include "ckm/pair.hpp"
#include "ckm/sync.hpp"

using namespace ckm;

namespace {

constexpr double pi = std::numbers::pi;

const std::vector<double> figure_omegas{-0.14, -0.20, -0.32, -0.02, 0.68};
const std::vector<double> figure_x{0.85, 0.36, 0.62, 1.10, 0.33};
const std::vector<double> figure_y{1.18, 0.66, 0.39, 1.53, 1.30};
const std::vector<std::pair<double, double>> weak_pairs{{2.0, 1.0}, {1.0, 0.3}, {5.0, 4.9}};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ode::IntegratorConfig tight() {
    ode::IntegratorConfig c;
    c.rel_tol = 1e-10;
    c.abs_tol = {1e-12};
    return c;
}

ode::IntegratorConfig strong_config() {
    ode::IntegratorConfig c;
    c.rel_tol = 1e-10;
    c.abs_tol = {1e-300};
    c.max_step = 0.05;
    return c;
}

double golden_max(const std::function<double(double)> &f, double a, double b) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    while (b - a > 1e-15) {
        if (f(c) > f(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return 0.5 * (a + b);
}

double max_pair_gap(std::span<const double> v) {
    double lo = v[0];
    double hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi - lo;
}

Outcome period_law() {
    double worst = 0.0;
    for (auto [w, l] : weak_pairs) {
        const pair::PairParams p(w, l);
        const double m = pair::measured_period(pi / 2.0, std::log(w / l) + 1.0, p, tight());
        worst = std::max(worst, std::abs(m / pair::analytic_period(p) - 1.0));
    }
    const double m21 = pair::measured_period(pi / 2.0, 2.0, pair::PairParams(2.0, 1.0), tight());
    worst = std::max(worst, std::abs(m21 / (2.0 * pi / std::sqrt(3.0)) - 1.0));
    return {worst <= 1e-5 && std::abs(m21 - 3.6275987) < 1e-6, "worst rel err " + fmt("%.2e", worst)};
}

Outcome residue() {
    double worst = 0.0;
    for (auto [w, l] : weak_pairs) {
        const pair::PairParams p(w, l);
        const auto r = pair::contour_integral_circle({pi / 2.0, std::acosh(w / l)}, 0.1, p);
        worst = std::max(worst, std::abs(r.value - pair::analytic_period(p)) / pair::analytic_period(p));
    }
    return {worst <= 1e-6, "worst rel err " + fmt("%.2e", worst)};
}

Outcome capital_lambda() {
    const double closed = cherry::capital_lambda_c_exact(1.0);
    const double xm = golden_max([](double x) { return std::sin(x) + std::sin(2.0 * x); }, 0.0, pi / 2.0);
    const double numeric = 1.5 / (std::sin(xm) + std::sin(2.0 * xm));
    const auto general = capital_lambda_c(std::vector<double>{0.5, 0.0, -0.5});
    const bool ok = std::abs(closed - numeric) <= 1e-10 && std::abs(closed - 0.85218915) <= 1e-8 &&
                    std::abs(numeric - 0.85218915) <= 1e-8 && std::abs(general.capital_lambda_c - closed) <= 1e-10;
    return {ok, "closed " + fmt("%.12f", closed) + ", numeric " + fmt("%.12f", numeric)};
}

Outcome cherry_census() {
    using namespace cherry;
    const auto r = critical_xs();
    bool ok = true;
    {
        const CherryParams p(1.0, 0.7);
        const auto e = equilibria_cherry(p);
        ok = ok && e.size() == 2;
        if (e.size() == 2) {
            ok = ok && e[0].x > pi / 4.0 && e[0].x < r[0] && e[0].y > 0.0 && e[0].linearization > 0.0 &&
                 e[0].stability == Stability::unstable;
            ok = ok && e[1].x > r[2] && e[1].x < 1.25 * pi && e[1].y > 0.0 && e[1].linearization < 0.0 &&
                 e[1].stability == Stability::stable;
            ok = ok && e[0].residual < 1e-10 && e[1].residual < 1e-10;
        }
    }
    {
        const CherryParams p(1.0, capital_lambda_c_exact(1.0));
        const auto e = equilibria_cherry(p);
        ok = ok && e.size() == 2;
        if (e.size() == 2) {
            ok = ok && std::abs(e[0].x - r[0]) < 1e-12 && e[0].y == 0.0 &&
                 e[0].stability == Stability::semistable_real_axis;
            ok = ok && e[1].y > 0.0 && e[1].stability == Stability::stable;
        }
    }
    {
        const CherryParams p(1.0, 0.99);
        const auto e = equilibria_cherry(p);
        ok = ok && e.size() == 3;
        if (e.size() == 3) {
            ok = ok && e[0].y == 0.0 && e[0].x < r[0] && e[0].stability == Stability::stable;
            ok = ok && e[1].y == 0.0 && e[1].x > r[0] && e[1].stability == Stability::unstable;
            ok = ok && e[2].y > 0.0 && e[2].stability == Stability::stable;
            for (const auto &q : e) {
                ok = ok && q.residual < 1e-10;
            }
        }
    }
    return {ok, "lambda 0.7 / Lambda_c / 0.99"};
}

EnsembleRun figure_run(const std::vector<double> &omegas) {
    return simulate_ensemble(SystemParams(omegas, 1.1), EnsembleState::from_parts(figure_x, figure_y), 50.0,
                             strong_config());
}

Outcome strong_reproduction() {
    const SystemParams p(figure_omegas, 1.1);
    const auto run = figure_run(figure_omegas);
    if (run.trajectory.termination.status != ode::Status::completed) {
        return {false, "run did not complete"};
    }
    const auto &tr = run.trajectory;
    const std::size_t n = 5;
    double spread = 0.0;
    for (const auto &s : tr.states) {
        spread = std::max(spread, max_pair_gap(std::span<const double>(s).first(n)));
    }
    const auto &last = tr.back();
    const auto d = tr.derivatives.back();
    const double ygap = max_pair_gap(std::span<const double>(last).subspan(n, n));
    const double ydot_gap = max_pair_gap(std::span<const double>(d).subspan(n, n));
    const auto rep = classify(tr, p);

    const SystemParams zero(std::vector<double>(5, 0.0), 1.1);
    const auto zrun = figure_run(std::vector<double>(5, 0.0));
    const auto zrep = classify(zrun.trajectory, zero);

    const bool ok = ydot_gap < 1e-6 && ygap < 1e-6 && spread < pi / 2.0 && rep.full_phase_locking &&
                    rep.frequency_sync && !rep.phase_sync && zrep.phase_sync && zrep.final_pair_z_gap < 1e-6;
    return {ok, "y gap " + fmt("%.1e", ygap) + ", ydot gap " + fmt("%.1e", ydot_gap) + ", spread max " +
                    fmt("%.4f", spread) + ", zero-omega z gap " + fmt("%.1e", zrep.final_pair_z_gap)};
}

Outcome decay_envelope() {
    const auto run = figure_run(figure_omegas);
    const auto dc = decay_rate_check(run.trajectory, SystemParams(figure_omegas, 1.1), 0.1);
    return {dc.onset_found && dc.bound_satisfied,
            "onset t " + fmt("%.3f", dc.onset_time) + ", worst log excess " + fmt("%.2e", dc.worst_log_excess)};
}

Outcome blowup() {
    bool ok = true;
    std::string detail;
    {
        const pair::PairParams p(1.0, 0.5);
        auto c = tight();
        const auto tr = pair::integrate_pair(pi / 2.0, std::log(2.0), 20.0, p, c);
        const double v = pair::min_escape_speed(p, pi / 2.0);
        double drift = 0.0;
        for (const auto &s : tr.states) {
            if (std::abs(s[1]) > 10.0) {
                break;
            }
            drift = std::max(drift, std::abs(pair::conserved_E(s[0], s[1], p) - 2.0));
        }
        ok = ok && tr.termination.status == ode::Status::blow_up && tr.termination.time <= 4.2 &&
             std::abs(v - 0.375) < 1e-15 && drift < 1e-6;
        detail = "weak t* " + fmt("%.6f", tr.termination.time) + " E drift " + fmt("%.1e", drift);
    }
    const std::vector<std::pair<pair::PairParams, double>> others{{pair::PairParams(1.0, 1.0), 0.75 * pi},
                                                                  {pair::PairParams(1.0, 2.0), pi - std::asin(0.5) + 0.1}};
    for (const auto &[p, x0] : others) {
        const auto tr = pair::integrate_pair(x0, pair::blowup_manifold_y(x0, p), 20.0, p, tight());
        ok = ok && tr.termination.status == ode::Status::blow_up;
        detail += std::string(", ") + pair::to_string(p.regime()) + " " + ode::to_string(tr.termination.status);
    }
    return {ok, detail};
}

Outcome conservation() {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> ux(0.3, pi - 0.3);
    std::uniform_real_distribution<double> uoff(0.3, 2.0);
    const pair::PairParams p(2.0, 1.0);
    double c_drift = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double x0 = ux(gen);
        const double y0 = std::log(2.0 / std::sin(x0)) + uoff(gen);
        const auto tr = pair::integrate_pair(x0, y0, 10.0 * pair::analytic_period(p), p, tight());
        const double c0 = pair::conserved_C(x0, y0, p);
        for (const auto &s : tr.states) {
            c_drift = std::max(c_drift, std::abs(pair::conserved_C(s[0], s[1], p) / c0 - 1.0));
        }
    }

    const pair::PairParams h(1.0, 1.0);
    const auto ht = pair::integrate_pair(0.5, 0.8, 30.0, h, tight());
    const double h0 = pair::homoclinic_invariant(0.5, 0.8);
    double h_drift = 0.0;
    for (const auto &s : ht.states) {
        h_drift = std::max(h_drift, std::abs(pair::homoclinic_invariant(s[0], s[1]) / h0 - 1.0));
    }

    // Mean phase in the lab frame over the ensemble runs used elsewhere.
    double sum_drift = 0.0;
    auto check_sum = [&](const SystemParams &sp, const EnsembleState &init, double horizon,
                         const ode::IntegratorConfig &cfg) {
        const auto run = simulate_ensemble(sp, init, horizon, cfg, false);
        const std::size_t n = sp.size();
        cplx s0{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            s0 += cplx(run.trajectory.states[0][i], run.trajectory.states[0][n + i]);
        }
        for (const auto &s : run.trajectory.states) {
            cplx sum{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                sum += cplx(s[i], s[n + i]);
            }
            sum_drift = std::max(sum_drift, std::abs(sum - s0));
        }
    };
    check_sum(SystemParams(figure_omegas, 1.1), EnsembleState::from_parts(figure_x, figure_y), 50.0, strong_config());
    check_sum(SystemParams(std::vector<double>(5, 0.0), 1.1), EnsembleState::from_parts(figure_x, figure_y), 50.0,
              strong_config());
    check_sum(SystemParams({1.0, -1.0}, 1.0),
              EnsembleState::from_parts(std::vector<double>{pi / 2.0, 0.0}, std::vector<double>{2.0, 0.0}), 36.0,
              tight());
    check_sum(SystemParams({0.5, 0.0, -0.5}, 0.7),
              EnsembleState::from_parts(std::vector<double>{3.8, 0.0, -3.8}, std::vector<double>{0.9, 0.0, -0.9}),
              20.0, tight());

    std::uniform_real_distribution<double> px(-2.0 * pi, 2.0 * pi);
    std::uniform_real_distribution<double> py(1e-3, 5.0);
    double ce = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const auto [w, l] = weak_pairs[static_cast<std::size_t>(k) % 3];
        const pair::PairParams q(w, l);
        const double x = px(gen);
        const double y = (k % 2 ? 1.0 : -1.0) * py(gen);
        double c = 0.0;
        try {
            c = pair::conserved_C(x, y, q);
        } catch (const Undefined &) {
            continue;
        }
        const double e = pair::conserved_E(x, y, q);
        const double rhs = (std::sqrt(w * w - l * l) / l) * (c + 1.0) / (c - 1.0);
        ce = std::max(ce, std::abs(e - rhs) / std::max(1.0, std::abs(e)));
    }
    const bool ok = c_drift < 1e-7 && h_drift < 1e-7 && sum_drift < 1e-9 && ce < 1e-10;
    return {ok, "C " + fmt("%.1e", c_drift) + ", homoclinic " + fmt("%.1e", h_drift) + ", sum z " +
                    fmt("%.1e", sum_drift) + ", C-E " + fmt("%.1e", ce)};
}

Outcome counterexample() {
    const double period = 2.0 * pi / std::sqrt(3.0);
    const SystemParams p({1.0, -1.0}, 1.0);
    auto c = tight();
    c.max_step = period / 200.0;
    const auto run = simulate_ensemble(
        p, EnsembleState::from_parts(std::vector<double>{pi / 2.0, 0.0}, std::vector<double>{2.0, 0.0}),
        10.0 * period, c);
    const auto rep = classify(run.trajectory, p);
    const pair::PairParams pp(2.0, 1.0);
    double min_rate = INFINITY;
    for (std::size_t k = 0; k < run.trajectory.size() && run.trajectory.times[k] <= period; ++k) {
        const auto &s = run.trajectory.states[k];
        min_rate = std::min(min_rate, std::abs(pair::f_pair({s[0] - s[1], s[2] - s[3]}, pp)));
    }
    return {rep.full_phase_locking && !rep.frequency_sync && min_rate > 0.1,
            "min |zdot| " + fmt("%.4f", min_rate)};
}

Outcome full_vs_reduced() {
    const cherry::CherryParams cp(1.0, 0.7);
    const SystemParams sys({0.5, 0.0, -0.5}, 0.7);
    auto sym = [](cplx z) {
        return EnsembleState::from_parts(std::vector<double>{z.real(), 0.0, -z.real()},
                                         std::vector<double>{z.imag(), 0.0, -z.imag()});
    };
    ode::IntegratorConfig c;
    c.rel_tol = 1e-11;
    c.abs_tol = {1e-13};
    const cplx z0(3.5, 0.6);
    const auto full = simulate_ensemble(sys, sym(z0), 20.0, c);
    ode::Rhs reduced = [&](double, std::span<const double> s, std::span<double> d) {
        const auto [xd, yd] = cherry::F_split(s[0], s[1], cp);
        d[0] = xd;
        d[1] = yd;
    };
    const auto red = ode::integrate(reduced, {z0.real(), z0.imag()}, {0.0, 20.0}, c);
    double worst = 0.0;
    for (std::size_t k = 0; k < full.trajectory.size(); ++k) {
        const auto &s = full.trajectory.states[k];
        const auto r = ode::evaluate_dense(red, full.trajectory.times[k]);
        worst = std::max(worst, std::hypot(s[0] - s[1] - r[0], s[3] - s[4] - r[1]));
        worst = std::max(worst, std::hypot(s[1] - s[2] - r[0], s[4] - s[5] - r[1]));
    }

    const auto eqs = cherry::equilibria_cherry(cp);
    const auto &e = eqs.back();
    bool locked = true;
    auto ca = c;
    ca.max_step = 0.1;
    for (int k = 0; k < 4; ++k) {
        const cplx start = cplx(e.x, e.y) + std::polar(0.049, pi / 2.0 * k + 0.3);
        const auto run = simulate_ensemble(sys, sym(start), 200.0, ca);
        if (run.trajectory.termination.status != ode::Status::completed) {
            locked = false;
            continue;
        }
        const auto rep = classify(run.trajectory, sys);
        locked = locked && rep.frequency_sync && rep.full_phase_locking;
    }
    return {worst < 1e-7 && locked, "max deviation " + fmt("%.1e", worst) + ", attraction " + (locked ? "yes" : "no")};
}

} // namespace

int main() {
    struct Criterion {
        const char *name;
        Outcome (*fn)();
        double time_limit;
    };
    const Criterion criteria[] = {
        {"period-law", period_law, 5.0},
        {"residue-cross-check", residue, 1.0},
        {"capital-lambda-c-exactness", capital_lambda, INFINITY},
        {"cherry-regime-census", cherry_census, 1.0},
        {"strong-coupling-n5-reproduction", strong_reproduction, 10.0},
        {"exponential-decay-envelope", decay_envelope, INFINITY},
        {"blow-up-demo", blowup, INFINITY},
        {"conservation-suite", conservation, INFINITY},
        {"not-frequency-synchronized-counterexample", counterexample, INFINITY},
        {"full-vs-reduced-consistency", full_vs_reduced, INFINITY},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.time_limit;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s %s: %s; %.2f s%s\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                    in_time ? "" : " (over time limit)");
    }
    return failures == 0 ? 0 : 1;
}
