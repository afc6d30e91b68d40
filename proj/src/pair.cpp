#include "ckm/pair.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ckm/errors.hpp"

namespace ckm::pair {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double guard_distance = 1e-6;

// Gauss-Legendre rule on [-1, 1], built once by Newton on P_n.
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> x{};
    std::array<double, N> w{};

    GaussLegendre() {
        for (std::size_t i = 0; i < N; ++i) {
            double r = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = r;
                for (std::size_t k = 2; k <= N; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(N) * (r * p1 - p0) / (r * r - 1.0);
                const double step = p1 / dp;
                r -= step;
                if (std::abs(step) < 1e-16) {
                    break;
                }
            }
            x[i] = r;
            w[i] = 2.0 / ((1.0 - r * r) * dp * dp);
        }
    }
};

const GaussLegendre<8> &rule() {
    static const GaussLegendre<8> gl;
    return gl;
}

void check_clear(cplx z, const PairParams &p) {
    if (distance_to_zero_set(z, p) < guard_distance) {
        throw NearSingularity("path passes within 1e-6 of a zero of f");
    }
}

double point_segment_distance(cplx q, cplx a, cplx b) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    const double s = len2 > 0.0 ? std::clamp(((q - a) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
    return std::abs(q - (a + s * d));
}

// Zeros of f in one period cell, shifted by 2 pi k.
std::vector<cplx> cell_zeros(const PairParams &p) {
    switch (p.regime()) {
    case Regime::weak: {
        const double a = std::acosh(p.omega() / p.lambda());
        return {{pi / 2.0, a}, {pi / 2.0, -a}};
    }
    case Regime::critical:
        return {{pi / 2.0, 0.0}};
    case Regime::strong: {
        const double s = std::asin(p.omega() / p.lambda());
        return {{s, 0.0}, {pi - s, 0.0}};
    }
    }
    return {};
}

void check_segment_clear(cplx a, cplx b, const PairParams &p) {
    const double lo = std::min(a.real(), b.real());
    const double hi = std::max(a.real(), b.real());
    const auto k_lo = static_cast<long long>(std::floor(lo / (2.0 * pi))) - 1;
    const auto k_hi = static_cast<long long>(std::ceil(hi / (2.0 * pi))) + 1;
    const auto base = cell_zeros(p);
    for (long long k = k_lo; k <= k_hi; ++k) {
        for (const cplx &z : base) {
            if (point_segment_distance(z + cplx(2.0 * pi * static_cast<double>(k), 0.0), a, b) < guard_distance) {
                throw NearSingularity("path passes within 1e-6 of a zero of f");
            }
        }
    }
}

cplx segment_rule(cplx a, cplx b, const PairParams &p) {
    const auto &gl = rule();
    const cplx mid = 0.5 * (a + b);
    const cplx half = 0.5 * (b - a);
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
        const cplx z = mid + half * gl.x[i];
        check_clear(z, p);
        s += gl.w[i] / f_pair(z, p);
    }
    return s * half;
}

cplx adaptive_segment(cplx a, cplx b, cplx whole, const PairParams &p, int depth) {
    const cplx m = 0.5 * (a + b);
    const cplx left = segment_rule(a, m, p);
    const cplx right = segment_rule(m, b, p);
    const cplx both = left + right;
    if (depth >= 30 || std::abs(both - whole) <= 1e-14 * (std::abs(both) + std::abs(b - a))) {
        return both;
    }
    return adaptive_segment(a, m, left, p, depth + 1) + adaptive_segment(m, b, right, p, depth + 1);
}

void require_weak(const PairParams &p, const char *what) {
    if (p.regime() != Regime::weak) {
        throw UnsupportedRegime(std::string(what) + " requires the weak regime lambda < omega");
    }
}

} // namespace

const char *to_string(Regime r) noexcept {
    switch (r) {
    case Regime::weak:
        return "weak";
    case Regime::critical:
        return "critical";
    case Regime::strong:
        return "strong";
    }
    return "?";
}

PairParams::PairParams(double omega, double lambda) : omega_(omega), lambda_(lambda) {
    if (!(omega > 0.0) || !std::isfinite(omega) || !(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidInput("pair parameters need positive finite omega and lambda");
    }
    const double tol = 1e-12 * omega;
    if (std::abs(lambda - omega) <= tol) {
        regime_ = Regime::critical;
    } else {
        regime_ = lambda < omega ? Regime::weak : Regime::strong;
    }
}

double PairParams::root_gap() const {
    require_weak(*this, "sqrt(omega^2 - lambda^2)");
    return std::sqrt((omega_ - lambda_) * (omega_ + lambda_));
}

cplx f_pair(cplx z, const PairParams &p) { return p.omega() - p.lambda() * std::sin(z); }

cplx f_pair_prime(cplx z, const PairParams &p) { return -p.lambda() * std::cos(z); }

std::vector<cplx> zero_set(const PairParams &p, int k_lo, int k_hi) {
    require_weak(p, "the zero set formula");
    if (k_lo > k_hi) {
        throw InvalidInput("empty k range");
    }
    const double a = std::acosh(p.omega() / p.lambda());
    std::vector<cplx> out;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double x = pi / 2.0 + 2.0 * pi * k;
        out.emplace_back(x, a);
        out.emplace_back(x, -a);
    }
    return out;
}

double distance_to_zero_set(cplx z, const PairParams &p) {
    const double x = z.real();
    const double y = z.imag();
    switch (p.regime()) {
    case Regime::weak: {
        const double a = std::acosh(p.omega() / p.lambda());
        return std::hypot(std::remainder(x - pi / 2.0, 2.0 * pi), std::abs(std::abs(y) - a));
    }
    case Regime::critical:
        return std::hypot(std::remainder(x - pi / 2.0, 2.0 * pi), y);
    case Regime::strong: {
        const double s = std::asin(p.omega() / p.lambda());
        const double dx =
            std::min(std::abs(std::remainder(x - s, 2.0 * pi)), std::abs(std::remainder(x - (pi - s), 2.0 * pi)));
        return std::hypot(dx, y);
    }
    }
    return 0.0;
}

double conserved_C(double x, double y, const PairParams &p) {
    const double r = p.root_gap();
    const double base = p.omega() * std::cosh(y) - p.lambda() * std::sin(x);
    const double num = base + r * std::sinh(y);
    const double den = base - r * std::sinh(y);
    const double c = num / den;
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw Undefined("C is undefined at an equilibrium");
    }
    return c;
}

double conserved_E(double x, double y, const PairParams &p) {
    if (y == 0.0) {
        throw Undefined("E is undefined on the real axis");
    }
    return (p.omega() / p.lambda()) * (std::cosh(y) / std::sinh(y)) - std::sin(x) / std::sinh(y);
}

cplx primitive_along_path(std::span<const cplx> path, const PairParams &p) {
    cplx total{0.0, 0.0};
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (!std::isfinite(path[k].real()) || !std::isfinite(path[k].imag())) {
            throw InvalidInput("path samples must be finite");
        }
        check_clear(path[k], p);
    }
    for (std::size_t k = 1; k < path.size(); ++k) {
        if (path[k] == path[k - 1]) {
            continue;
        }
        check_segment_clear(path[k - 1], path[k], p);
        const cplx whole = segment_rule(path[k - 1], path[k], p);
        total += adaptive_segment(path[k - 1], path[k], whole, p, 0);
    }
    return total;
}

ContourResult contour_integral_circle(cplx center, double radius, const PairParams &p, std::size_t nodes) {
    if (!(radius > 0.0) || nodes < 4) {
        throw InvalidInput("contour needs a positive radius and at least 4 nodes");
    }
    auto trapezoid = [&](std::size_t n) {
        cplx s{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const double theta = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
            const cplx e = std::polar(1.0, theta);
            const cplx z = center + radius * e;
            check_clear(z, p);
            s += cplx(0.0, radius) * e / f_pair(z, p);
        }
        return s * (2.0 * pi / static_cast<double>(n));
    };
    const cplx coarse = trapezoid(nodes);
    const cplx fine = trapezoid(2 * nodes);
    return {fine, std::abs(fine - coarse)};
}

double analytic_period(const PairParams &p) {
    if (p.regime() != Regime::weak) {
        throw Undefined("the period is defined only for lambda < omega");
    }
    return 2.0 * pi / p.root_gap();
}

ode::Trajectory integrate_pair(double x0, double y0, double horizon, const PairParams &p,
                               ode::IntegratorConfig config, std::span<const ode::EventSpec> events) {
    if (config.blowup_components.empty()) {
        config.blowup_components = {1};
    }
    const double w = p.omega();
    const double l = p.lambda();
    ode::Rhs rhs = [w, l](double, std::span<const double> s, std::span<double> d) {
        if (std::abs(s[1]) > hyperbolic_guard) {
            throw OverflowError("cosh/sinh argument out of range", 1);
        }
        d[0] = w - l * std::sin(s[0]) * std::cosh(s[1]);
        d[1] = -l * std::cos(s[0]) * std::sinh(s[1]);
    };
    return ode::integrate(rhs, {x0, y0}, {0.0, horizon}, config, events);
}

double measured_period(double x0, double y0, const PairParams &p, ode::IntegratorConfig config) {
    require_weak(p, "measured_period");
    const double period = analytic_period(p);
    const double xdot = p.omega() - p.lambda() * std::sin(x0) * std::cosh(y0);
    if (xdot == 0.0) {
        throw InvalidInput("the section x = x0 is tangent to the flow at the initial point");
    }
    ode::EventSpec section;
    section.fn = [x0](double, std::span<const double> s) { return s[0] - x0; };
    section.direction = xdot > 0.0 ? ode::Direction::rising : ode::Direction::falling;
    section.tolerance = 1e-12;
    ode::Trajectory traj;
    try {
        traj = integrate_pair(x0, y0, 5.0 * period, p, config, std::span<const ode::EventSpec>(&section, 1));
    } catch (const StepSizeUnderflow &) {
        throw NotPeriodic("orbit escapes to infinity before returning to the section");
    }
    if (traj.termination.status != ode::Status::event_hit) {
        throw NotPeriodic(std::string("no return to the section within 5 periods (status ") +
                          ode::to_string(traj.termination.status) + ")");
    }
    if ((traj.back()[1] > 0.0) != (y0 > 0.0)) {
        throw NotPeriodic("return landed on the opposite half-plane");
    }
    return traj.termination.time;
}

double blowup_manifold_y(double x, const PairParams &p) {
    bool ok = false;
    switch (p.regime()) {
    case Regime::weak:
        ok = x > 0.0 && x < pi;
        break;
    case Regime::critical:
        ok = x > pi / 2.0 && x < pi;
        break;
    case Regime::strong:
        ok = x > pi - std::asin(p.omega() / p.lambda()) && x < pi;
        break;
    }
    if (!ok) {
        throw InvalidInput(std::string("x lies outside the blow-up window of the ") + to_string(p.regime()) +
                           " regime");
    }
    return std::log((p.omega() / p.lambda()) / std::sin(x));
}

double min_escape_speed(const PairParams &p, double x0) {
    (void)blowup_manifold_y(x0, p);
    const double ratio = p.lambda() / p.omega();
    if (p.regime() == Regime::weak) {
        return 0.5 * p.omega() * (1.0 - ratio * ratio);
    }
    const double s = std::sin(x0);
    return 0.5 * p.omega() * (1.0 - ratio * ratio * s * s);
}

double homoclinic_invariant(double x, double y) {
    const double den = std::sin(x) - std::cosh(y);
    if (den == 0.0) {
        throw Undefined("the invariant is undefined at the equilibrium");
    }
    return std::sinh(y) / den;
}

cplx homoclinic_exact(double t, cplx c) {
    if (std::abs(std::abs(c.imag()) - 1.0) < 1e-12) {
        throw Undefined("Im c = +-1 is excluded: the solution is singular at a real time");
    }
    const cplx u = t + c;
    if (u + 2.0 == cplx(0.0, 0.0)) {
        return {pi, 0.0};
    }
    return 2.0 * std::atan(u / (u + 2.0));
}

} // namespace ckm::pair
