#pragma once

// Reference computations used only by the tests. Deliberately simple and
// independent of the library code they check.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Vec = std::vector<double>;
using Field = std::function<Vec(double, const Vec &)>;

/// Classical fixed-step RK4 from t0 to t1 with n steps.
inline Vec rk4(const Field &f, Vec y, double t0, double t1, std::size_t n) {
    const double h = (t1 - t0) / static_cast<double>(n);
    auto axpy = [](const Vec &a, double s, const Vec &b) {
        Vec r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            r[i] = a[i] + s * b[i];
        }
        return r;
    };
    double t = t0;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec k1 = f(t, y);
        const Vec k2 = f(t + h / 2, axpy(y, h / 2, k1));
        const Vec k3 = f(t + h / 2, axpy(y, h / 2, k2));
        const Vec k4 = f(t + h, axpy(y, h, k3));
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        }
        t = t0 + h * static_cast<double>(k + 1);
    }
    return y;
}

/// RK4 that stops at the first step where `stop(y)` holds; returns the time.
inline double rk4_until(const Field &f, Vec y, double t0, double t_max, double h,
                        const std::function<bool(const Vec &)> &stop) {
    double t = t0;
    while (t < t_max) {
        y = rk4(f, y, t, t + h, 1);
        t += h;
        if (stop(y)) {
            return t;
        }
    }
    return NAN;
}

/// Golden-section search for the maximum of a unimodal f on [a, b].
inline double golden_max(const std::function<double(double)> &f, double a, double b, double tol = 1e-14) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Bisection to machine resolution; f(a), f(b) of opposite sign.
inline double bisect(const std::function<double(double)> &f, double a, double b) {
    double fa = f(a);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) {
            break;
        }
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Direct complex evaluation of w_n + (lambda/N) sum_m sin(z_m - z_n).
inline std::vector<cplx> kuramoto(const std::vector<cplx> &z, const Vec &w, double lambda) {
    const std::size_t n = z.size();
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx s = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            s += std::sin(z[m] - z[i]);
        }
        out[i] = w[i] + lambda / static_cast<double>(n) * s;
    }
    return out;
}

/// The same field on split vectors [x..., y...].
inline Field kuramoto_field(const Vec &w, double lambda) {
    return [w, lambda](double, const Vec &s) {
        const std::size_t n = s.size() / 2;
        std::vector<cplx> z(n);
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = {s[i], s[n + i]};
        }
        const auto d = kuramoto(z, w, lambda);
        Vec out(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = d[i].real();
            out[n + i] = d[i].imag();
        }
        return out;
    };
}

/// Split field of dz/dt = w - lambda sin z.
inline Field pair_field(double w, double lambda) {
    return [w, lambda](double, const Vec &s) {
        const cplx d = w - lambda * std::sin(cplx(s[0], s[1]));
        return Vec{d.real(), d.imag()};
    };
}

} // namespace oracle
