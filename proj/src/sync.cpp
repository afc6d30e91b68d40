#include "ckm/sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ckm/errors.hpp"

namespace ckm {

namespace {

double spread(std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

std::size_t oscillators(std::span<const double> split) {
    if (split.size() < 4 || split.size() % 2 != 0) {
        throw InvalidInput("split state must hold 2N values with N >= 2");
    }
    return split.size() / 2;
}

double max_pair_modulus(std::span<const double> re, std::span<const double> im) {
    double best = 0.0;
    for (std::size_t n = 0; n < re.size(); ++n) {
        for (std::size_t m = n + 1; m < re.size(); ++m) {
            best = std::max(best, std::hypot(re[n] - re[m], im[n] - im[m]));
        }
    }
    return best;
}

// Second-half maximum does not exceed the first-half maximum beyond the margins.
bool non_growing(std::span<const double> t, std::span<const double> g, const SyncThresholds &th) {
    const double mid = 0.5 * (t.front() + t.back());
    double first = 0.0;
    double second = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        double &half = t[k] < mid ? first : second;
        half = std::max(half, g[k]);
    }
    return second <= first * (1.0 + th.growth_margin) + th.eps_sync;
}

std::optional<double> log_slope(std::span<const double> t, std::span<const double> y) {
    double st = 0.0;
    double sl = 0.0;
    double stt = 0.0;
    double stl = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(y[k] > 0.0)) {
            continue;
        }
        const double l = std::log(y[k]);
        st += t[k];
        sl += l;
        stt += t[k] * t[k];
        stl += t[k] * l;
        ++count;
    }
    if (count < 2) {
        return std::nullopt;
    }
    const double c = static_cast<double>(count);
    const double den = c * stt - st * st;
    if (!(den > 0.0)) {
        return std::nullopt;
    }
    return (c * stl - st * sl) / den;
}

} // namespace

void SyncThresholds::validate() const {
    if (!(eps_sync > 0.0) || !(growth_margin > 0.0) || !(tail_fraction > 0.0 && tail_fraction < 1.0)) {
        throw InvalidInput("sync thresholds must be positive with tail_fraction in (0, 1)");
    }
}

double real_spread(std::span<const double> split) { return spread(split.first(oscillators(split))); }

double imag_spread(std::span<const double> split) { return spread(split.last(oscillators(split))); }

double real_spread(const EnsembleState &state) { return real_spread(state.to_split()); }

double imag_spread(const EnsembleState &state) { return imag_spread(state.to_split()); }

double pair_z_gap(std::span<const double> split) {
    const std::size_t n = oscillators(split);
    return max_pair_modulus(split.first(n), split.last(n));
}

double pair_zdot_gap(std::span<const double> split, const SystemParams &params) {
    const std::size_t n = oscillators(split);
    std::vector<double> d(2 * n);
    rhs_split_into(split, params, d);
    return max_pair_modulus(std::span<const double>(d).first(n), std::span<const double>(d).last(n));
}

std::vector<double> dissipation_integral(const ode::Trajectory &traj, const SystemParams &params) {
    std::vector<double> h(traj.size(), 0.0);
    if (traj.size() == 0) {
        return h;
    }
    const std::size_t n = params.size();
    std::vector<double> d(2 * n);
    auto integrand = [&](std::size_t k) {
        rhs_split_into(traj.states[k], params, d);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += d[i] * d[i];
        }
        return s;
    };
    double prev = integrand(0);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double cur = integrand(k);
        h[k] = h[k - 1] + 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev + cur);
        prev = cur;
    }
    return h;
}

SyncReport classify(const ode::Trajectory &traj, const SystemParams &params, const SyncThresholds &thresholds) {
    thresholds.validate();
    if (traj.termination.status != ode::Status::completed) {
        throw NotClassifiable(std::string("trajectory ended with status ") + ode::to_string(traj.termination.status));
    }
    if (traj.size() == 0 || traj.states.front().size() != 2 * params.size()) {
        throw InvalidInput("trajectory does not match the oscillator count");
    }
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    const double start = t1 - thresholds.tail_fraction * (t1 - t0);
    const auto first = static_cast<std::size_t>(std::lower_bound(traj.times.begin(), traj.times.end(), start) -
                                                traj.times.begin());
    const std::size_t tail = traj.size() - first;
    if (tail < 10) {
        throw InvalidInput("tail window holds " + std::to_string(tail) + " samples, at least 10 are needed");
    }

    SyncReport r;
    for (const auto &s : traj.states) {
        r.real_spread_max = std::max(r.real_spread_max, real_spread(s));
        r.imag_spread_max = std::max(r.imag_spread_max, imag_spread(s));
    }

    std::vector<double> t(tail);
    std::vector<double> zg(tail);
    std::vector<double> dg(tail);
    std::vector<double> yg(tail);
    for (std::size_t k = 0; k < tail; ++k) {
        const auto &s = traj.states[first + k];
        t[k] = traj.times[first + k];
        zg[k] = pair_z_gap(s);
        dg[k] = pair_zdot_gap(s, params);
        yg[k] = imag_spread(s);
    }
    r.max_pair_z_gap_tail = *std::max_element(zg.begin(), zg.end());
    r.max_pair_zdot_gap_tail = *std::max_element(dg.begin(), dg.end());
    r.final_pair_z_gap = zg.back();
    r.final_pair_zdot_gap = dg.back();

    r.phase_sync = r.final_pair_z_gap < thresholds.eps_sync;
    r.full_phase_locking = r.phase_sync || non_growing(t, zg, thresholds);
    r.frequency_sync = r.final_pair_zdot_gap < thresholds.eps_sync && non_growing(t, dg, thresholds);
    r.fitted_Y_decay_rate = log_slope(t, yg);
    r.H_final = dissipation_integral(traj, params).back();
    return r;
}

DecayCheck decay_rate_check(const ode::Trajectory &traj, const SystemParams &params, double delta0) {
    if (!(delta0 > 0.0 && delta0 < std::numbers::pi / 2.0)) {
        throw InvalidInput("delta0 must lie in (0, pi/2)");
    }
    DecayCheck out;
    const double limit = std::numbers::pi / 2.0 - delta0;
    std::size_t onset = traj.size();
    for (std::size_t k = traj.size(); k-- > 0;) {
        if (!(real_spread(traj.states[k]) < limit)) {
            break;
        }
        onset = k;
    }
    if (onset == traj.size()) {
        return out;
    }
    out.onset_found = true;
    out.onset_time = traj.times[onset];

    const double rate = params.lambda() * std::sin(delta0);
    const double slack = std::log1p(1e-6);
    // With W(t) = log Y(t) + rate (t - T), the bound reads W(t2) <= W(t1) + slack.
    double min_w = std::numeric_limits<double>::infinity();
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<double> t;
    std::vector<double> y;
    for (std::size_t k = onset; k < traj.size(); ++k) {
        const double yk = imag_spread(traj.states[k]);
        const double w = std::log(yk) + rate * (traj.times[k] - out.onset_time);
        if (k > onset && !(yk == 0.0 && min_w == -std::numeric_limits<double>::infinity())) {
            worst = std::max(worst, w - min_w);
        }
        min_w = std::min(min_w, w);
        t.push_back(traj.times[k]);
        y.push_back(yk);
    }
    out.worst_log_excess = std::isfinite(worst) ? worst : 0.0;
    out.bound_satisfied = !(worst > slack);
    out.fitted_rate = log_slope(t, y);
    return out;
}

} // namespace ckm
