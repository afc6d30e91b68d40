#include "ckm/cherry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ckm/errors.hpp"
#include "ckm/roots.hpp"

namespace ckm::cherry {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double bracket_tol = 1e-13;
constexpr std::size_t scan_cells = 4096;

double cos_r1() { return (-1.0 + std::sqrt(33.0)) / 8.0; }
double cos_r2() { return (-1.0 - std::sqrt(33.0)) / 8.0; }

bool singular_g2(double x) { return std::abs(std::cos(2.0 * x)) < 1e-9; }

// f(x, G(x)) written through g = g2(x): cosh G = g/2, cosh 2G = g^2/2 - 1.
double cut_residual(double x, const CherryParams &p) {
    const double g = g2(x);
    return p.level() - (std::sin(x) * 0.5 * g + std::sin(2.0 * x) * (0.5 * g * g - 1.0));
}

double cut_height(double x) { return std::acosh(std::max(1.0, 0.5 * g2(x))); }

// Complex Newton polish of an equilibrium; returns the start point if the
// iteration wanders off or fails to reduce |F|.
cplx polish(cplx z0, const CherryParams &p) {
    cplx z = z0;
    for (int i = 0; i < 20; ++i) {
        const cplx d = F_prime(z, p);
        if (std::abs(d) == 0.0) {
            break;
        }
        const cplx step = F(z, p) / d;
        z -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) {
            break;
        }
    }
    if (std::abs(z - z0) > 1e-6 || !(std::abs(F(z, p)) <= std::abs(F(z0, p)))) {
        return z0;
    }
    return z;
}

EquilibriumRecord make_record(cplx z, std::pair<double, double> bracket, const CherryParams &p) {
    EquilibriumRecord rec;
    rec.x = z.real();
    rec.y = std::abs(z.imag()) < 1e-300 ? 0.0 : z.imag();
    rec.residual = std::abs(F({rec.x, rec.y}, p));
    rec.linearization = stability_reF(rec.x, rec.y, p);
    rec.stability = rec.linearization < 0.0 ? Stability::stable : Stability::unstable;
    rec.bracket = bracket;
    return rec;
}

} // namespace

const char *to_string(Regime r) noexcept {
    switch (r) {
    case Regime::below:
        return "below";
    case Regime::at:
        return "at";
    case Regime::between:
        return "between";
    case Regime::beyond:
        return "beyond";
    }
    return "?";
}

const char *to_string(Stability s) noexcept {
    switch (s) {
    case Stability::stable:
        return "stable";
    case Stability::unstable:
        return "unstable";
    case Stability::semistable_real_axis:
        return "semistable-real-axis";
    }
    return "?";
}

CherryParams::CherryParams(double omega, double lambda) : omega_(omega), lambda_(lambda) {
    if (!(omega > 0.0) || !std::isfinite(omega) || !(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidInput("Cherry parameters need positive finite omega and lambda");
    }
    const double tol = 1e-12 * omega;
    const double big_lambda = capital_lambda_c_exact(omega);
    if (std::abs(lambda - big_lambda) <= tol) {
        regime_ = Regime::at;
    } else if (lambda < big_lambda) {
        regime_ = Regime::below;
    } else if (lambda < omega - tol) {
        regime_ = Regime::between;
    } else {
        regime_ = Regime::beyond;
    }
}

cplx F(cplx z, const CherryParams &p) {
    return 0.5 * p.omega() - (p.lambda() / 3.0) * (std::sin(z) + std::sin(2.0 * z));
}

cplx F_prime(cplx z, const CherryParams &p) {
    return -(p.lambda() / 3.0) * (std::cos(z) + 2.0 * std::cos(2.0 * z));
}

std::pair<double, double> F_split(double x, double y, const CherryParams &p) {
    const double k = p.lambda() / 3.0;
    const double xdot = 0.5 * p.omega() - k * (std::sin(x) * std::cosh(y) + std::sin(2.0 * x) * std::cosh(2.0 * y));
    const double ydot = -k * (std::cos(x) * std::sinh(y) + std::cos(2.0 * x) * std::sinh(2.0 * y));
    return {xdot, ydot};
}

double h(double x) { return std::sin(x) + std::sin(2.0 * x); }

double h_prime(double x) { return std::cos(x) + 2.0 * std::cos(2.0 * x); }

double max_h() {
    const double c = cos_r1();
    const double s = std::sqrt(1.0 - c * c);
    return s * (1.0 + 2.0 * c);
}

double capital_lambda_c_exact(double omega) { return std::sqrt((69.0 - 11.0 * std::sqrt(33.0)) / 8.0) * omega; }

std::array<double, 4> critical_xs() {
    const double r1 = std::acos(cos_r1());
    const double r2 = std::acos(cos_r2());
    return {r1, r2, 2.0 * pi - r2, 2.0 * pi - r1};
}

double g1(double y) { return 2.0 * std::cosh(y); }

double g2(double x) { return -std::cos(x) / std::cos(2.0 * x); }

double cubic_p(double s, const CherryParams &p) {
    const double a = 6.0 * p.omega() / p.lambda();
    return ((4.0 * s + a) * s - 3.0) * s - a;
}

double cubic_sin2x_root(const CherryParams &p) {
    const double a = 6.0 * p.omega() / p.lambda();
    auto f = [&](double s) { return cubic_p(s, p); };
    auto df = [&](double s) { return (12.0 * s + 2.0 * a) * s - 3.0; };
    if (!(f(0.0) < 0.0 && f(1.0) > 0.0)) {
        throw InvalidInput("cubic has no sign change on (0, 1)");
    }
    return roots::safeguarded_newton(f, df, 0.0, 1.0, bracket_tol);
}

std::vector<CutRoot> horizontal_cut_scan(double lo, double hi, const CherryParams &p) {
    if (!(hi > lo)) {
        throw InvalidInput("cut interval must have lo < hi");
    }
    const double inset = 1e-10 * (hi - lo);
    const double a = singular_g2(lo) ? lo + inset : lo;
    const double b = singular_g2(hi) ? hi - inset : hi;

    std::vector<double> grid(scan_cells + 1);
    std::vector<double> vals(scan_cells + 1);
    for (std::size_t i = 0; i <= scan_cells; ++i) {
        const double x = (i == scan_cells) ? b : a + (b - a) * static_cast<double>(i) / scan_cells;
        if (!(g2(x) >= 2.0 - 1e-9)) {
            throw DomainError("g2 drops below 2 on the cut interval");
        }
        grid[i] = x;
        vals[i] = cut_residual(x, p);
    }

    std::vector<CutRoot> out;
    auto residual = [&](double x) { return cut_residual(x, p); };
    for (std::size_t i = 0; i < scan_cells; ++i) {
        const bool change = (vals[i] < 0.0) != (vals[i + 1] < 0.0) && vals[i] != 0.0;
        const bool hit_left = (i == 0 && vals[0] == 0.0);
        if (!change && !hit_left) {
            continue;
        }
        const double root = hit_left ? grid[0] : roots::bisect(residual, grid[i], grid[i + 1], bracket_tol);
        const cplx z = polish({root, cut_height(root)}, p);
        out.push_back({z.real(), std::abs(z.imag()), {grid[i], grid[i + 1]}});
    }
    return out;
}

std::optional<CutRoot> horizontal_cut_find(double lo, double hi, const CherryParams &p) {
    auto all = horizontal_cut_scan(lo, hi, p);
    if (all.empty()) {
        return std::nullopt;
    }
    return all.front();
}

double stability_reF(double x, double y, const CherryParams &p) {
    if (!(std::abs(F({x, y}, p)) < 1e-8)) {
        throw InvalidInput("stability requested away from an equilibrium");
    }
    return -(p.lambda() / 3.0) * (std::cos(x) * std::cosh(y) + 2.0 * std::cos(2.0 * x) * std::cosh(2.0 * y));
}

std::vector<EquilibriumRecord> equilibria_cherry(const CherryParams &p) {
    if (p.regime() == Regime::beyond) {
        throw UnsupportedRegime("Cherry equilibria are analysed only for lambda < lambda_c");
    }
    const auto r = critical_xs();
    std::vector<EquilibriumRecord> out;

    auto add_cut = [&](double lo, double hi) {
        for (const auto &c : horizontal_cut_scan(lo, hi, p)) {
            out.push_back(make_record({c.x, c.y}, c.bracket, p));
        }
    };

    switch (p.regime()) {
    case Regime::below:
        add_cut(pi / 4.0, r[0]);
        break;
    case Regime::at: {
        EquilibriumRecord rec;
        rec.x = r[0];
        rec.y = 0.0;
        rec.residual = std::abs(F({r[0], 0.0}, p));
        rec.linearization = -p.lambda() * h_prime(r[0]) / 3.0;
        rec.stability = Stability::semistable_real_axis;
        rec.bracket = {r[0], r[0]};
        out.push_back(rec);
        break;
    }
    case Regime::between: {
        const double level = p.level();
        auto f = [&](double x) { return h(x) - level; };
        auto df = [](double x) { return h_prime(x); };
        const double s1 = roots::safeguarded_newton(f, df, 0.0, r[0], bracket_tol);
        const double s2 = roots::safeguarded_newton(f, df, r[0], r[1], bracket_tol);
        out.push_back(make_record({s1, 0.0}, {0.0, r[0]}, p));
        out.push_back(make_record({s2, 0.0}, {r[0], r[1]}, p));
        add_cut(pi / 4.0, r[0]);
        break;
    }
    case Regime::beyond:
        break;
    }
    add_cut(r[2], 1.25 * pi);

    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.x < b.x; });
    return out;
}

FlowField flow_field(const CherryParams &p, std::pair<double, double> x_range, std::pair<double, double> y_range,
                     std::size_t nx, std::size_t ny) {
    if (nx < 2 || ny < 2) {
        throw InvalidInput("flow field needs at least a 2x2 grid");
    }
    FlowField ff;
    ff.nx = nx;
    ff.ny = ny;
    ff.x.resize(nx);
    ff.y.resize(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        ff.x[i] = x_range.first + (x_range.second - x_range.first) * static_cast<double>(i) / static_cast<double>(nx - 1);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        ff.y[j] = y_range.first + (y_range.second - y_range.first) * static_cast<double>(j) / static_cast<double>(ny - 1);
    }
    ff.xdot.resize(nx * ny);
    ff.ydot.resize(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const auto [xd, yd] = F_split(ff.x[i], ff.y[j], p);
            ff.xdot[j * nx + i] = xd;
            ff.ydot[j * nx + i] = yd;
        }
    }
    return ff;
}

} // namespace ckm::cherry
