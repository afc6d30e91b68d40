#pragma once

// Two-oscillator reduction: z = z_1 - z_2 obeys dz/dt = f(z) = w - lambda sin z,
// with w = w_1 - w_2 > 0. Split form:
//   dx/dt = w - lambda sin x cosh y,   dy/dt = -lambda cos x sinh y.

#include <optional>
#include <span>
#include <vector>

#include "ckm/ensemble.hpp"
#include "ckm/integrator.hpp"

namespace ckm::pair {

enum class Regime { weak, critical, strong };

[[nodiscard]] const char *to_string(Regime r) noexcept;

class PairParams {
  public:
    /// Throws InvalidInput unless omega and lambda are positive and finite.
    /// lambda within 1e-12 omega of omega counts as critical.
    PairParams(double omega, double lambda);

    [[nodiscard]] double omega() const noexcept { return omega_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] Regime regime() const noexcept { return regime_; }
    /// sqrt(omega^2 - lambda^2); throws UnsupportedRegime outside the weak regime.
    [[nodiscard]] double root_gap() const;

  private:
    double omega_;
    double lambda_;
    Regime regime_;
};

[[nodiscard]] cplx f_pair(cplx z, const PairParams &p);
[[nodiscard]] cplx f_pair_prime(cplx z, const PairParams &p);

/// Zeros pi/2 + 2k pi +- i acosh(w/lambda) for k in [k_lo, k_hi], upper one first
/// for each k. Throws UnsupportedRegime unless weak, InvalidInput if k_lo > k_hi.
[[nodiscard]] std::vector<cplx> zero_set(const PairParams &p, int k_lo, int k_hi);

/// Distance from z to the nearest zero of f (any regime).
[[nodiscard]] double distance_to_zero_set(cplx z, const PairParams &p);

/// (w cosh y - lambda sin x + r sinh y) / (w cosh y - lambda sin x - r sinh y),
/// r = sqrt(w^2 - lambda^2). Weak regime only; throws Undefined on the zero set.
[[nodiscard]] double conserved_C(double x, double y, const PairParams &p);

/// (w / lambda) coth y - sin x / sinh y. Throws Undefined at y = 0.
[[nodiscard]] double conserved_E(double x, double y, const PairParams &p);

/// Line integral of dz / f(z) along the polygon through `path`.
/// Throws NearSingularity if a vertex or quadrature node comes within 1e-6 of a zero.
[[nodiscard]] cplx primitive_along_path(std::span<const cplx> path, const PairParams &p);

struct ContourResult {
    cplx value;
    /// |I(2n) - I(n)| from the doubling check.
    double doubling_gap = 0.0;
};

/// Counterclockwise integral of dz / f(z) over a circle, trapezoid rule on
/// `nodes` points; the returned value uses 2 * nodes.
[[nodiscard]] ContourResult contour_integral_circle(cplx center, double radius, const PairParams &p,
                                                    std::size_t nodes = 512);

/// 2 pi / sqrt(w^2 - lambda^2). Throws Undefined unless weak.
[[nodiscard]] double analytic_period(const PairParams &p);

/// Integrates the split pair system from (x0, y0) over [0, horizon].
[[nodiscard]] ode::Trajectory integrate_pair(double x0, double y0, double horizon, const PairParams &p,
                                             ode::IntegratorConfig config, std::span<const ode::EventSpec> events = {});

/// First return time to the section x = x0 crossed in the initial direction of
/// dx/dt. Throws NotPeriodic if there is no return within 5 analytic periods or
/// the orbit blows up, UnsupportedRegime unless weak.
[[nodiscard]] double measured_period(double x0, double y0, const PairParams &p, ode::IntegratorConfig config = {});

/// log((w/lambda) csc x): the level E = w/lambda from which orbits escape to
/// infinity. Admissible x: weak (0, pi); critical (pi/2, pi);
/// strong (pi - asin(w/lambda), pi). Throws InvalidInput outside.
[[nodiscard]] double blowup_manifold_y(double x, const PairParams &p);

/// Lower bound on dx/dt along orbits started on the blow-up manifold at x0.
[[nodiscard]] double min_escape_speed(const PairParams &p, double x0);

/// sinh y / (sin x - cosh y), conserved when w = lambda = 1.
[[nodiscard]] double homoclinic_invariant(double x, double y);

/// z(t) with tan(z/2) = (t + c) / (t + c + 2), solving dz/dt = 1 - sin z.
/// Throws Undefined when Im c = +-1.
[[nodiscard]] cplx homoclinic_exact(double t, cplx c);

} // namespace ckm::pair
