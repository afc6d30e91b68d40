#include "ckm/ensemble.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "ckm/cherry.hpp"
#include "ckm/errors.hpp"

namespace ckm {

namespace {

void require_finite(std::span<const double> v, const char *what) {
    for (double d : v) {
        if (!std::isfinite(d)) {
            throw InvalidInput(std::string(what) + ": non-finite entry");
        }
    }
}

} // namespace

EnsembleState::EnsembleState(std::vector<ComplexPhase> phases) : phases_(std::move(phases)) {
    if (phases_.size() < 2) {
        throw InvalidInput("ensemble needs at least two oscillators");
    }
    for (const auto &p : phases_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw InvalidInput("ensemble state has a non-finite phase");
        }
    }
}

EnsembleState EnsembleState::from_split(std::span<const double> split) {
    if (split.size() % 2 != 0) {
        throw InvalidInput("split state must have even length");
    }
    const std::size_t n = split.size() / 2;
    return from_parts(split.first(n), split.subspan(n));
}

EnsembleState EnsembleState::from_parts(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InvalidInput("real and imaginary parts differ in length");
    }
    std::vector<ComplexPhase> phases(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        phases[i] = {x[i], y[i]};
    }
    return EnsembleState(std::move(phases));
}

std::vector<double> EnsembleState::to_split() const {
    const std::size_t n = phases_.size();
    std::vector<double> out(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = phases_[i].x;
        out[n + i] = phases_[i].y;
    }
    return out;
}

cplx EnsembleState::centroid() const {
    cplx sum{0.0, 0.0};
    for (const auto &p : phases_) {
        sum += p.value();
    }
    return sum / static_cast<double>(phases_.size());
}

EnsembleState EnsembleState::shifted(cplx offset) const {
    std::vector<ComplexPhase> out(phases_.size());
    for (std::size_t i = 0; i < phases_.size(); ++i) {
        out[i] = ComplexPhase::from(phases_[i].value() + offset);
    }
    return EnsembleState(std::move(out));
}

SystemParams::SystemParams(std::vector<double> omegas, double lambda) : lambda_(lambda) {
    if (omegas.size() < 2) {
        throw InvalidInput("system needs at least two natural frequencies");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidInput("coupling strength must be a positive finite number");
    }
    require_finite(omegas, "natural frequencies");
    rotation_ = std::accumulate(omegas.begin(), omegas.end(), 0.0) / static_cast<double>(omegas.size());
    omegas_ = normalize_frame(omegas);
}

std::vector<double> normalize_frame(std::span<const double> omegas) {
    if (omegas.empty()) {
        throw InvalidInput("frequency list is empty");
    }
    require_finite(omegas, "natural frequencies");
    const double mean = std::accumulate(omegas.begin(), omegas.end(), 0.0) / static_cast<double>(omegas.size());
    std::vector<double> out(omegas.begin(), omegas.end());
    for (double &w : out) {
        w -= mean;
    }
    return out;
}

std::vector<cplx> rhs(const EnsembleState &state, const SystemParams &params) {
    const std::size_t n = state.size();
    if (params.size() != n) {
        throw InvalidInput("state and parameters disagree on N");
    }
    const double k = params.lambda() / static_cast<double>(n);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = params.omegas()[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx d = state[j].value() - state[i].value();
            if (std::abs(d.imag()) > hyperbolic_guard) {
                throw OverflowError("imaginary phase gap exceeds hyperbolic guard", i);
            }
            const cplx s = k * std::sin(d);
            out[i] += s;
            out[j] -= s;
        }
    }
    return out;
}

void rhs_split_into(std::span<const double> split, const SystemParams &params, std::span<double> out) {
    const std::size_t n = params.size();
    const double k = params.lambda() / static_cast<double>(n);
    const auto x = split.first(n);
    const auto y = split.subspan(n, n);
    auto dx = out.first(n);
    auto dy = out.subspan(n, n);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double ddy = y[j] - y[i];
            if (!(std::abs(ddy) <= hyperbolic_guard)) {
                throw OverflowError("imaginary phase gap exceeds hyperbolic guard", i);
            }
            const double ddx = x[j] - x[i];
            // sin(z_j - z_i) = sin(dx)cosh(dy) + i cos(dx)sinh(dy); odd in (dx, dy).
            const double re = k * std::sin(ddx) * std::cosh(ddy);
            const double im = k * std::cos(ddx) * std::sinh(ddy);
            dx[i] += re;
            dx[j] -= re;
            dy[i] += im;
            dy[j] -= im;
        }
    }
    // Frequencies go in last so that for N = 3 the reflection z_n -> -z_{N+1-n}
    // is preserved bit for bit (two-term sums commute exactly).
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] += params.omegas()[i];
    }
}

std::vector<cplx> rhs_split(const EnsembleState &state, const SystemParams &params) {
    const std::size_t n = state.size();
    if (params.size() != n) {
        throw InvalidInput("state and parameters disagree on N");
    }
    const auto split = state.to_split();
    std::vector<double> d(2 * n);
    rhs_split_into(split, params, d);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = {d[i], d[n + i]};
    }
    return out;
}

double lambda_c(std::span<const double> omegas) {
    if (omegas.size() < 2) {
        throw InvalidInput("lambda_c needs at least two frequencies");
    }
    require_finite(omegas, "natural frequencies");
    const auto [lo, hi] = std::minmax_element(omegas.begin(), omegas.end());
    return *hi - *lo;
}

namespace {

// Residual of the real locking equations for oscillators 0..N-2, with the
// last phase held fixed as gauge.
Eigen::VectorXd locking_residual(std::span<const double> w, double lambda, const std::vector<double> &x) {
    const std::size_t n = w.size();
    const double k = lambda / static_cast<double>(n);
    Eigen::VectorXd r(static_cast<Eigen::Index>(n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double s = w[i];
        for (std::size_t j = 0; j < n; ++j) {
            s += k * std::sin(x[j] - x[i]);
        }
        r(static_cast<Eigen::Index>(i)) = s;
    }
    return r;
}

Eigen::MatrixXd locking_jacobian(std::span<const double> w, double lambda, const std::vector<double> &x) {
    const std::size_t n = w.size();
    const double k = lambda / static_cast<double>(n);
    const auto m = static_cast<Eigen::Index>(n - 1);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double diag = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double c = k * std::cos(x[j] - x[i]);
            diag -= c;
            if (j + 1 < n) {
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
            }
        }
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag;
    }
    return jac;
}

} // namespace

bool solve_real_locking(std::span<const double> omegas, double lambda, std::vector<double> &seed) {
    const std::size_t n = omegas.size();
    if (seed.size() != n || n < 2) {
        throw InvalidInput("locking seed must have one phase per oscillator");
    }
    double scale = 1.0;
    for (double w : omegas) {
        scale = std::max(scale, std::abs(w));
    }
    const double target = 1e-13 * scale;
    std::vector<double> x = seed;
    Eigen::VectorXd r = locking_residual(omegas, lambda, x);
    for (int iter = 0; iter < 100; ++iter) {
        if (r.lpNorm<Eigen::Infinity>() < target) {
            seed = std::move(x);
            return true;
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(locking_jacobian(omegas, lambda, x));
        if (!lu.isInvertible()) {
            return false;
        }
        const Eigen::VectorXd step = lu.solve(-r);
        const double norm0 = r.norm();
        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-8) {
            std::vector<double> trial = x;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                trial[i] += alpha * step(static_cast<Eigen::Index>(i));
            }
            Eigen::VectorXd rt = locking_residual(omegas, lambda, trial);
            if (rt.norm() < (1.0 - 1e-4 * alpha) * norm0) {
                x = std::move(trial);
                r = std::move(rt);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            return false;
        }
    }
    return false;
}

namespace {

// Natural-parameter continuation of the locked branch from (from, x) down to `to`.
bool continue_branch(std::span<const double> w, double from, double to, std::vector<double> &x, double min_step) {
    double current = from;
    double h = from - to;
    std::vector<double> cur = x;
    while (current > to) {
        const double next = std::max(to, current - h);
        std::vector<double> trial = cur;
        if (solve_real_locking(w, next, trial)) {
            current = next;
            cur = std::move(trial);
            h *= 1.5;
        } else {
            h *= 0.5;
            if (h < min_step) {
                return false;
            }
        }
    }
    x = std::move(cur);
    return true;
}

bool is_three_term_progression(std::span<const double> w) {
    if (w.size() != 3) {
        return false;
    }
    std::array<double, 3> s{w[0], w[1], w[2]};
    std::sort(s.begin(), s.end());
    const double scale = std::max(std::abs(s[0]), std::abs(s[2]));
    return std::abs((s[2] - s[1]) - (s[1] - s[0])) <= 1e-12 * scale;
}

} // namespace

CriticalCouplings capital_lambda_c(std::span<const double> omegas, double tol) {
    if (omegas.size() < 2) {
        throw InvalidInput("critical couplings need at least two frequencies");
    }
    if (!(tol > 0.0)) {
        throw InvalidInput("tolerance must be positive");
    }
    const auto w = normalize_frame(omegas);
    CriticalCouplings out;
    out.lambda_c = lambda_c(w);
    if (w.size() == 2 || out.lambda_c == 0.0) {
        out.capital_lambda_c = out.lambda_c;
        out.capital_lambda_c_kind = CouplingEstimate::exact;
        return out;
    }
    if (is_three_term_progression(w)) {
        out.capital_lambda_c = cherry::capital_lambda_c_exact(out.lambda_c);
        out.capital_lambda_c_kind = CouplingEstimate::exact;
        return out;
    }

    const double lc = out.lambda_c;
    const double start = 4.0 * lc;
    std::vector<double> x(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        x[i] = w[i] / start;
    }
    const double min_step = 1e-3 * tol * lc;
    if (!solve_real_locking(w, start, x) || !continue_branch(w, start, lc, x, min_step)) {
        throw EstimateFailed("locked branch could not be continued to lambda_c", 0.0, lc);
    }
    double lo = 0.0;
    double hi = lc;
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        std::vector<double> trial = x;
        if (continue_branch(w, hi, mid, trial, min_step)) {
            hi = mid;
            x = std::move(trial);
        } else {
            lo = mid;
        }
    }
    out.capital_lambda_c = hi;
    out.capital_lambda_c_kind = CouplingEstimate::numeric_estimate;
    return out;
}

} // namespace ckm
