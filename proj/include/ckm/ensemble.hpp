#pragma once

// Domain types and vector field of the complexified Kuramoto ensemble
//
//   dz_n/dt = w_n + (lambda/N) sum_m sin(z_m - z_n),   z_n = x_n + i y_n.
//
// Real-vector ("split") layout used everywhere a state is handed to the
// integrator or written to disk: [x_1 .. x_N, y_1 .. y_N].

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ckm {

using cplx = std::complex<double>;

/// Phase of one oscillator. Stored values are never wrapped.
struct ComplexPhase {
    double x = 0.0; ///< real phase (rad)
    double y = 0.0; ///< imaginary part

    [[nodiscard]] cplx value() const { return {x, y}; }
    [[nodiscard]] static ComplexPhase from(cplx z) { return {z.real(), z.imag()}; }
    friend bool operator==(const ComplexPhase &, const ComplexPhase &) = default;
};

/// Ordered phases of an N >= 2 ensemble.
class EnsembleState {
  public:
    explicit EnsembleState(std::vector<ComplexPhase> phases);

    /// Builds a state from the split layout [x..., y...].
    [[nodiscard]] static EnsembleState from_split(std::span<const double> split);
    [[nodiscard]] static EnsembleState from_parts(std::span<const double> x, std::span<const double> y);

    [[nodiscard]] std::vector<double> to_split() const;

    [[nodiscard]] std::size_t size() const noexcept { return phases_.size(); }
    [[nodiscard]] const ComplexPhase &operator[](std::size_t i) const { return phases_[i]; }
    [[nodiscard]] std::span<const ComplexPhase> phases() const noexcept { return phases_; }

    /// Arithmetic mean of the phases.
    [[nodiscard]] cplx centroid() const;
    /// Every phase shifted by the same complex constant.
    [[nodiscard]] EnsembleState shifted(cplx offset) const;

  private:
    std::vector<ComplexPhase> phases_;
};

/// Natural frequencies (always in the zero-mean rotating frame) and coupling.
class SystemParams {
  public:
    /// Normalizes `omegas` to zero mean; requires N >= 2 and lambda > 0.
    SystemParams(std::vector<double> omegas, double lambda);

    [[nodiscard]] std::span<const double> omegas() const noexcept { return omegas_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] std::size_t size() const noexcept { return omegas_.size(); }
    /// Mean that was removed from the raw frequencies.
    [[nodiscard]] double frame_rotation() const noexcept { return rotation_; }

  private:
    std::vector<double> omegas_;
    double lambda_;
    double rotation_ = 0.0;
};

enum class CouplingEstimate { exact, numeric_estimate };

struct CriticalCouplings {
    double lambda_c = 0.0;
    double capital_lambda_c = 0.0;
    CouplingEstimate capital_lambda_c_kind = CouplingEstimate::exact;
};

/// Subtracts the mean. Throws InvalidInput on an empty or non-finite list.
[[nodiscard]] std::vector<double> normalize_frame(std::span<const double> omegas);

/// Phase velocities evaluated with the complex sine.
[[nodiscard]] std::vector<cplx> rhs(const EnsembleState &state, const SystemParams &params);

/// Phase velocities evaluated through the real/imaginary split
/// (sin x cosh y, cos x sinh y). Agrees with rhs() to rounding.
[[nodiscard]] std::vector<cplx> rhs_split(const EnsembleState &state, const SystemParams &params);

/// Split-layout right-hand side for the integrator; `out` has size 2N.
/// Throws OverflowError if a pairwise |y_m - y_n| exceeds the hyperbolic guard.
void rhs_split_into(std::span<const double> split, const SystemParams &params, std::span<double> out);

/// Largest |y| difference accepted by the hyperbolic functions.
inline constexpr double hyperbolic_guard = 700.0;

/// Maximum pairwise frequency gap. Requires N >= 2.
[[nodiscard]] double lambda_c(std::span<const double> omegas);

/// Both critical couplings. The real locking threshold is exact for N = 2,
/// for identical frequencies and for the N = 3 arithmetic progression;
/// otherwise it is bracketed by bisection on lambda over solvability of the
/// real phase-locked equations, to relative bracket width `tol`.
[[nodiscard]] CriticalCouplings capital_lambda_c(std::span<const double> omegas, double tol = 1e-10);

/// Damped-Newton solve of w_n + (lambda/N) sum sin(x_m - x_n) = 0 seeded at
/// `seed` (size N). Returns true and overwrites `seed` with the root on success.
bool solve_real_locking(std::span<const double> omegas, double lambda, std::vector<double> &seed);

} // namespace ckm
