#pragma once

// Three oscillators with frequencies in arithmetic progression and equal
// phase gaps z = z_1 - z_2 = z_2 - z_3 reduce to the scalar flow
//
//   dz/dt = F(z) = omega/2 - (lambda/3) (sin z + sin 2z),
//
// where omega is the full frequency spread (omega = lambda_c).

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "ckm/ensemble.hpp"

namespace ckm::cherry {

enum class Regime {
    below,   ///< lambda < Lambda_c
    at,      ///< lambda == Lambda_c (to 1e-12 omega)
    between, ///< Lambda_c < lambda < lambda_c
    beyond,  ///< lambda >= lambda_c, outside the analysed range
};

[[nodiscard]] const char *to_string(Regime r) noexcept;

class CherryParams {
  public:
    /// Throws InvalidInput unless both values are positive and finite.
    CherryParams(double omega, double lambda);

    [[nodiscard]] double omega() const noexcept { return omega_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] Regime regime() const noexcept { return regime_; }
    /// 3 omega / (2 lambda), the level that h(x) = sin x + sin 2x must meet on the real axis.
    [[nodiscard]] double level() const noexcept { return 1.5 * omega_ / lambda_; }

  private:
    double omega_;
    double lambda_;
    Regime regime_;
};

enum class Stability { stable, unstable, semistable_real_axis };

[[nodiscard]] const char *to_string(Stability s) noexcept;

struct EquilibriumRecord {
    double x = 0.0;
    double y = 0.0;
    double residual = 0.0;      ///< |F| at the location
    double linearization = 0.0; ///< Re F'
    Stability stability = Stability::unstable;
    std::pair<double, double> bracket{0.0, 0.0};
};

[[nodiscard]] cplx F(cplx z, const CherryParams &p);
[[nodiscard]] cplx F_prime(cplx z, const CherryParams &p);

/// (xdot, ydot) from the real/imaginary split of F.
[[nodiscard]] std::pair<double, double> F_split(double x, double y, const CherryParams &p);

/// h(x) = sin x + sin 2x and its derivative.
[[nodiscard]] double h(double x);
[[nodiscard]] double h_prime(double x);
/// max h, attained where cos x solves 4c^2 + c - 2 = 0.
[[nodiscard]] double max_h();

/// sqrt((69 - 11 sqrt 33) / 8) * omega.
[[nodiscard]] double capital_lambda_c_exact(double omega);

/// r1 < r2 < r3 < r4: the points of [0, 2 pi) where g2(x) = 2.
[[nodiscard]] std::array<double, 4> critical_xs();

[[nodiscard]] double g1(double y);
[[nodiscard]] double g2(double x);

/// p(s) = 4 s^3 + (6 omega / lambda) s^2 - 3 s - 6 omega / lambda.
[[nodiscard]] double cubic_p(double s, const CherryParams &p);

/// The root of p in (0, 1); sin 2x of every equilibrium with y != 0.
[[nodiscard]] double cubic_sin2x_root(const CherryParams &p);

struct CutRoot {
    double x = 0.0;
    double y = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
};

/// Every root of f(x, G(x)) on [lo, hi], with G the inverse of g1 on y >= 0
/// composed with g2. Singular endpoints (cos 2x = 0) are approached from inside.
/// Throws DomainError if g2 < 2 somewhere on the interval.
[[nodiscard]] std::vector<CutRoot> horizontal_cut_scan(double lo, double hi, const CherryParams &p);

/// First root found by horizontal_cut_scan, or nullopt when there is no sign change.
[[nodiscard]] std::optional<CutRoot> horizontal_cut_find(double lo, double hi, const CherryParams &p);

/// Re F' at an equilibrium. Throws InvalidInput if |F| >= 1e-8 there.
[[nodiscard]] double stability_reF(double x, double y, const CherryParams &p);

/// Equilibria in R_0 = [0, 2 pi) x [0, inf), sorted by x.
/// Throws UnsupportedRegime for lambda >= lambda_c.
[[nodiscard]] std::vector<EquilibriumRecord> equilibria_cherry(const CherryParams &p);

struct FlowField {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> x;    ///< nx abscissae
    std::vector<double> y;    ///< ny ordinates
    std::vector<double> xdot; ///< row-major, index iy * nx + ix
    std::vector<double> ydot;
};

/// Split form of F sampled on a uniform nx-by-ny grid (nx, ny >= 2).
[[nodiscard]] FlowField flow_field(const CherryParams &p, std::pair<double, double> x_range,
                                   std::pair<double, double> y_range, std::size_t nx, std::size_t ny);

} // namespace ckm::cherry
