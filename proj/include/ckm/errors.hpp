#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ckm {

/// Root of every error the library raises.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    /// Stable machine-readable tag, used by the CLI error JSON.
    [[nodiscard]] virtual const char *kind() const noexcept { return "error"; }
};

class InvalidInput : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "invalid-input"; }
};

/// cosh/sinh argument left the representable range.
class OverflowError : public Error {
  public:
    OverflowError(const std::string &what, std::size_t index) : Error(what), index_(index) {}
    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] const char *kind() const noexcept override { return "overflow"; }

  private:
    std::size_t index_;
};

/// Numeric estimate of the real locking threshold did not converge.
class EstimateFailed : public Error {
  public:
    EstimateFailed(const std::string &what, double lo, double hi) : Error(what), lo_(lo), hi_(hi) {}
    [[nodiscard]] double bracket_lo() const noexcept { return lo_; }
    [[nodiscard]] double bracket_hi() const noexcept { return hi_; }
    [[nodiscard]] const char *kind() const noexcept override { return "estimate-failed"; }

  private:
    double lo_;
    double hi_;
};

class RangeError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "range"; }
};

/// Step size collapsed below the resolution of the time axis.
class StepSizeUnderflow : public Error {
  public:
    StepSizeUnderflow(const std::string &what, double t, double h) : Error(what), t_(t), h_(h) {}
    [[nodiscard]] double time() const noexcept { return t_; }
    [[nodiscard]] double step() const noexcept { return h_; }
    [[nodiscard]] const char *kind() const noexcept override { return "step-underflow"; }

  private:
    double t_;
    double h_;
};

class NotClassifiable : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "not-classifiable"; }
};

class UnsupportedRegime : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "unsupported-regime"; }
};

/// Quantity is undefined at the given point (equilibrium, y = 0, excluded branch).
class Undefined : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "undefined"; }
};

class NearSingularity : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "near-singularity"; }
};

class NotPeriodic : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "not-periodic"; }
};

class DomainError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "domain"; }
};

} // namespace ckm
