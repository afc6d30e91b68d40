#include "ckm/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ckm/errors.hpp"

namespace ckm::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller: h_new = h * safety * err^-alpha * err_prev^beta.
constexpr double safety = 0.9;
constexpr double alpha = 0.7 / 5.0;
constexpr double beta = 0.4 / 5.0;
constexpr double grow_max = 5.0;
constexpr double shrink_max = 0.2;

constexpr double eps = std::numeric_limits<double>::epsilon();

struct StepResult {
    State y;
    State f; // derivative at the new point (FSAL)
    double err = 0.0;
    bool ok = false;
};

class Stepper {
  public:
    Stepper(const Rhs &rhs, const IntegratorConfig &cfg, std::size_t dim)
        : rhs_(rhs), cfg_(cfg), dim_(dim), tmp_(dim) {
        for (auto &k : k_) {
            k.resize(dim);
        }
    }

    double atol(std::size_t i) const { return cfg_.abs_tol.size() == 1 ? cfg_.abs_tol[0] : cfg_.abs_tol[i]; }

    bool eval(double t, std::span<const double> y, std::span<double> out) const {
        try {
            rhs_(t, y, out);
        } catch (const OverflowError &) {
            return false;
        }
        return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
    }

    // One DP step of size h from (t, y) with f = f(t, y). With `estimate` false the
    // error norm is skipped (used for exact sub-steps during event refinement).
    StepResult step(double t, const State &y, const State &f, double h, bool estimate = true) {
        StepResult r;
        auto &k2 = k_[0];
        auto &k3 = k_[1];
        auto &k4 = k_[2];
        auto &k5 = k_[3];
        auto &k6 = k_[4];
        auto stage = [&](auto &&combine, double ct, State &k) {
            for (std::size_t i = 0; i < dim_; ++i) {
                tmp_[i] = y[i] + h * combine(i);
            }
            return eval(t + ct * h, tmp_, k);
        };
        if (!stage([&](std::size_t i) { return a21 * f[i]; }, c2, k2) ||
            !stage([&](std::size_t i) { return a31 * f[i] + a32 * k2[i]; }, c3, k3) ||
            !stage([&](std::size_t i) { return a41 * f[i] + a42 * k2[i] + a43 * k3[i]; }, c4, k4) ||
            !stage([&](std::size_t i) { return a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; }, c5, k5) ||
            !stage([&](std::size_t i) {
                return a61 * f[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
            }, 1.0, k6)) {
            return r;
        }
        r.y.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            r.y[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        }
        r.f.resize(dim_);
        if (!eval(t + h, r.y, r.f)) {
            return r;
        }
        if (estimate) {
            double acc = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                const double e = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * r.f[i]);
                const double sc = atol(i) + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(r.y[i]));
                acc += (e / sc) * (e / sc);
            }
            r.err = std::sqrt(acc / static_cast<double>(dim_));
            if (!std::isfinite(r.err)) {
                return r;
            }
        }
        r.ok = true;
        return r;
    }

    double initial_step(double t, const State &y, const State &f, double span) {
        double d0 = 0.0;
        double d1 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double sc = atol(i) + cfg_.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (f[i] / sc) * (f[i] / sc);
        }
        d0 = std::sqrt(d0 / static_cast<double>(dim_));
        d1 = std::sqrt(d1 / static_cast<double>(dim_));
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min({h0, span, cfg_.max_step});
        State y1(dim_);
        State f1(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            y1[i] = y[i] + h0 * f[i];
        }
        if (!eval(t + h0, y1, f1)) {
            return h0 * 1e-3;
        }
        double d2 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double sc = atol(i) + cfg_.rel_tol * std::abs(y[i]);
            d2 += ((f1[i] - f[i]) / sc) * ((f1[i] - f[i]) / sc);
        }
        d2 = std::sqrt(d2 / static_cast<double>(dim_)) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, span, cfg_.max_step});
    }

  private:
    const Rhs &rhs_;
    const IntegratorConfig &cfg_;
    std::size_t dim_;
    State tmp_;
    std::array<State, 5> k_;
};

bool crossed(double g0, double g1, Direction dir) {
    if (g0 == 0.0) {
        return false;
    }
    const bool rising = g0 < 0.0 && g1 >= 0.0;
    const bool falling = g0 > 0.0 && g1 <= 0.0;
    switch (dir) {
    case Direction::rising:
        return rising;
    case Direction::falling:
        return falling;
    case Direction::any:
        return rising || falling;
    }
    return false;
}

double monitored_peak(const State &y, const IntegratorConfig &cfg) {
    double peak = 0.0;
    for (std::size_t k : cfg.blowup_components) {
        peak = std::max(peak, std::abs(y[k]));
    }
    return peak;
}

} // namespace

const char *to_string(Status s) noexcept {
    switch (s) {
    case Status::completed:
        return "completed";
    case Status::blow_up:
        return "blow_up";
    case Status::event_hit:
        return "event_hit";
    case Status::step_limit:
        return "step_limit";
    }
    return "?";
}

void IntegratorConfig::validate(std::size_t dim) const {
    if (!(rel_tol > 0.0)) {
        throw InvalidInput("rel_tol must be positive");
    }
    if (abs_tol.empty() || (abs_tol.size() != 1 && abs_tol.size() != dim)) {
        throw InvalidInput("abs_tol must have one entry or one per component");
    }
    for (double a : abs_tol) {
        if (!(a > 0.0)) {
            throw InvalidInput("abs_tol entries must be positive");
        }
    }
    if (!(blowup_threshold > 0.0)) {
        throw InvalidInput("blowup_threshold must be positive");
    }
    if (max_steps == 0) {
        throw InvalidInput("max_steps must be positive");
    }
    if (!(max_step > 0.0)) {
        throw InvalidInput("max_step must be positive");
    }
    for (std::size_t k : blowup_components) {
        if (k >= dim) {
            throw InvalidInput("blow-up component index out of range");
        }
    }
}

void hermite(double t0, double t1, std::span<const double> y0, std::span<const double> f0,
             std::span<const double> y1, std::span<const double> f1, double t, std::span<double> out) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}

Trajectory integrate(const Rhs &rhs, State initial, std::pair<double, double> t_span, const IntegratorConfig &config,
                     std::span<const EventSpec> events) {
    const std::size_t dim = initial.size();
    if (dim == 0) {
        throw InvalidInput("empty initial state");
    }
    config.validate(dim);
    const auto [t0, t_end] = t_span;
    if (!(t_end > t0) || !std::isfinite(t0) || !std::isfinite(t_end)) {
        throw InvalidInput("time span must be finite with end > start");
    }
    for (double v : initial) {
        if (!std::isfinite(v)) {
            throw InvalidInput("initial state is not finite");
        }
    }
    for (const auto &ev : events) {
        if (!(ev.tolerance > 0.0) || !ev.fn) {
            throw InvalidInput("event needs a function and a positive tolerance");
        }
    }

    Stepper stepper(rhs, config, dim);
    Trajectory traj;
    State y = std::move(initial);
    State f(dim);
    if (!stepper.eval(t0, y, f)) {
        throw OverflowError("right-hand side is not finite at the initial state", 0);
    }
    traj.times.push_back(t0);
    traj.states.push_back(y);
    traj.derivatives.push_back(f);

    if (!config.blowup_components.empty() && monitored_peak(y, config) >= config.blowup_threshold) {
        traj.termination = {Status::blow_up, t0};
        return traj;
    }

    std::vector<double> g_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        g_prev[e] = events[e].fn(t0, y);
    }

    double t = t0;
    double h = config.initial_step > 0.0 ? config.initial_step : stepper.initial_step(t, y, f, t_end - t0);
    h = std::min(h, config.max_step);
    double err_prev = 1e-4;
    bool last_rejected = false;
    State buf(dim);

    while (t < t_end) {
        if (traj.accepted_steps + traj.rejected_steps >= config.max_steps) {
            traj.termination = {Status::step_limit, t};
            return traj;
        }
        // Stretch by up to 1% rather than leave a sliver before t_end.
        const bool final_step = t + 1.01 * h >= t_end;
        if (final_step) {
            h = t_end - t;
        }
        if (!final_step && h < 1e3 * eps * std::abs(t)) {
            throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t) +
                                        " (stiffness or blow-up suspected)",
                                    t, h);
        }

        StepResult r = stepper.step(t, y, f, h);
        if (!r.ok) {
            ++traj.rejected_steps;
            h *= shrink_max;
            last_rejected = true;
            continue;
        }
        if (r.err > 1.0) {
            ++traj.rejected_steps;
            const double fac = std::max(shrink_max, safety * std::pow(r.err, -alpha));
            h *= fac;
            last_rejected = true;
            continue;
        }

        const double t_new = final_step ? t_end : t + h;
        ++traj.accepted_steps;

        // Events: earliest crossing inside (t, t_new].
        std::size_t hit_event = events.size();
        double hit_t = t_new;
        State hit_state;
        std::vector<double> g_new(events.size());
        for (std::size_t e = 0; e < events.size(); ++e) {
            g_new[e] = events[e].fn(t_new, r.y);
            if (!crossed(g_prev[e], g_new[e], events[e].direction)) {
                continue;
            }
            const auto &ev = events[e];
            auto g_at = [&](double tt) {
                hermite(t, t_new, y, f, r.y, r.f, tt, buf);
                return ev.fn(tt, buf);
            };
            double lo = t;
            double hi = t_new;
            const double glo = g_prev[e];
            while (hi - lo > ev.tolerance) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) {
                    break;
                }
                if ((g_at(mid) < 0.0) == (glo < 0.0) && g_at(mid) != 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // Secant polish on exact sub-steps from the step start.
            double te = 0.5 * (lo + hi);
            State ye;
            {
                auto exact_g = [&](double tt, State &out) {
                    StepResult s = stepper.step(t, y, f, tt - t, false);
                    if (!s.ok) {
                        return std::numeric_limits<double>::quiet_NaN();
                    }
                    out = std::move(s.y);
                    return ev.fn(tt, out);
                };
                double ta = lo;
                double tb = hi;
                State ya;
                State yb;
                double ga = ta > t ? exact_g(ta, ya) : glo;
                double gb = exact_g(tb, yb);
                if (ta <= t) {
                    ya = y;
                }
                for (int it = 0; it < 4 && std::isfinite(ga) && std::isfinite(gb) && ga != gb; ++it) {
                    const double tc = tb - gb * (tb - ta) / (gb - ga);
                    if (!(tc > t && tc <= t_new)) {
                        break;
                    }
                    State yc;
                    const double gc = exact_g(tc, yc);
                    if (!std::isfinite(gc)) {
                        break;
                    }
                    ta = tb;
                    ga = gb;
                    ya = std::move(yb);
                    tb = tc;
                    gb = gc;
                    yb = std::move(yc);
                    if (std::abs(tb - ta) < 1e-3 * ev.tolerance) {
                        break;
                    }
                }
                if (std::isfinite(gb) && std::abs(tb - te) <= std::max(hi - lo, ev.tolerance) * 4.0 + 1e-14) {
                    te = tb;
                    ye = std::move(yb);
                } else {
                    ye.resize(dim);
                    hermite(t, t_new, y, f, r.y, r.f, te, ye);
                }
            }
            // A crossing glued to the start time is the seed point itself.
            if (te - t0 <= 10.0 * ev.tolerance) {
                continue;
            }
            if (te < hit_t || hit_event == events.size()) {
                if (ev.terminal) {
                    hit_event = e;
                    hit_t = te;
                    hit_state = ye;
                } else {
                    traj.events.push_back({e, te, ye});
                }
            } else if (!ev.terminal) {
                traj.events.push_back({e, te, ye});
            }
        }

        // Blow-up crossing inside the step.
        double blow_t = std::numeric_limits<double>::infinity();
        if (!config.blowup_components.empty() && monitored_peak(r.y, config) >= config.blowup_threshold) {
            auto excess = [&](double tt) {
                hermite(t, t_new, y, f, r.y, r.f, tt, buf);
                return monitored_peak(buf, config) - config.blowup_threshold;
            };
            double lo = t;
            double hi = t_new;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) {
                    break;
                }
                (excess(mid) >= 0.0 ? hi : lo) = mid;
            }
            blow_t = hi;
        }

        if (hit_event < events.size() && hit_t <= blow_t) {
            State fe(dim);
            if (!stepper.eval(hit_t, hit_state, fe)) {
                throw OverflowError("right-hand side not finite at event state", 0);
            }
            traj.events.push_back({hit_event, hit_t, hit_state});
            if (hit_t > t) {
                traj.times.push_back(hit_t);
                traj.states.push_back(hit_state);
                traj.derivatives.push_back(fe);
            }
            traj.termination = {Status::event_hit, hit_t};
            return traj;
        }

        t = t_new;
        y = std::move(r.y);
        f = std::move(r.f);
        traj.times.push_back(t);
        traj.states.push_back(y);
        traj.derivatives.push_back(f);
        g_prev = std::move(g_new);

        if (std::isfinite(blow_t)) {
            traj.termination = {Status::blow_up, blow_t};
            return traj;
        }

        double fac = safety * std::pow(std::max(r.err, 1e-10), -alpha) * std::pow(err_prev, beta);
        fac = std::clamp(fac, shrink_max, grow_max);
        if (last_rejected) {
            fac = std::min(fac, 1.0);
        }
        err_prev = std::max(r.err, 1e-4);
        last_rejected = false;
        h = std::min(h * fac, config.max_step);
    }
    traj.termination = {Status::completed, t};
    return traj;
}

State evaluate_dense(const Trajectory &traj, double t) {
    if (traj.times.empty()) {
        throw RangeError("empty trajectory");
    }
    if (!(t >= traj.times.front() && t <= traj.times.back())) {
        throw RangeError("time outside trajectory range");
    }
    const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    const auto i = static_cast<std::size_t>(it - traj.times.begin());
    if (*it == t) {
        return traj.states[i];
    }
    if (traj.derivatives.size() != traj.times.size()) {
        throw InvalidInput("trajectory carries no derivatives for dense output");
    }
    State out(traj.states[i].size());
    hermite(traj.times[i - 1], traj.times[i], traj.states[i - 1], traj.derivatives[i - 1], traj.states[i],
            traj.derivatives[i], t, out);
    return out;
}

} // namespace ckm::ode
