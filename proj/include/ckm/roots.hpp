#pragma once

#include <cmath>
#include <utility>

#include "ckm/errors.hpp"

namespace ckm::roots {

/// Plain bisection on a sign change of `f` over [a, b]; stops at width `tol`.
template <class Fn>
double bisect(Fn &&f, double a, double b, double tol) {
    double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    if ((fa < 0.0) == (fb < 0.0)) {
        throw InvalidInput("bisection bracket has no sign change");
    }
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) {
            break;
        }
        const double fm = f(m);
        if (fm == 0.0) {
            return m;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Newton iteration kept inside a shrinking sign-change bracket; falls back to
/// bisection whenever the Newton step leaves the bracket or stalls.
template <class Fn, class Dfn>
double safeguarded_newton(Fn &&f, Dfn &&df, double a, double b, double tol) {
    double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    if ((fa < 0.0) == (fb < 0.0)) {
        throw InvalidInput("Newton bracket has no sign change");
    }
    double x = 0.5 * (a + b);
    for (int iter = 0; iter < 200; ++iter) {
        const double fx = f(x);
        if (fx == 0.0) {
            return x;
        }
        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        const double d = df(x);
        double next = (d != 0.0) ? x - fx / d : 0.5 * (a + b);
        if (!(next > a && next < b)) {
            next = 0.5 * (a + b);
        }
        if (std::abs(next - x) <= tol || b - a <= tol) {
            return next;
        }
        x = next;
    }
    return x;
}

} // namespace ckm::roots
