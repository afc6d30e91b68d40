#pragma once

// Adaptive Dormand-Prince 5(4) integration of real ODE systems with cubic
// Hermite dense output, event localization and blow-up termination.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace ckm::ode {

using State = std::vector<double>;

/// dydt = f(t, y); `dydt` has the size of `y`.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorConfig {
    double rel_tol = 1e-8;
    /// Per-component absolute tolerance; a single entry applies to every component.
    std::vector<double> abs_tol{1e-10};
    /// Initial step; <= 0 selects one automatically.
    double initial_step = 0.0;
    double max_step = std::numeric_limits<double>::infinity();
    /// Integration stops with blow_up once any monitored |y_k| reaches this.
    double blowup_threshold = 20.0;
    /// Components watched for blow-up (the imaginary parts in split layout).
    std::vector<std::size_t> blowup_components;
    std::size_t max_steps = 2'000'000;

    /// Throws InvalidInput on non-positive tolerances, threshold or step budget.
    void validate(std::size_t dim) const;
};

enum class Direction { rising, falling, any };

struct EventSpec {
    std::function<double(double t, std::span<const double> y)> fn;
    Direction direction = Direction::any;
    /// Width of the final localization bracket (time units).
    double tolerance = 1e-12;
    bool terminal = true;
};

enum class Status { completed, blow_up, event_hit, step_limit };

[[nodiscard]] const char *to_string(Status s) noexcept;

struct Termination {
    Status status = Status::completed;
    /// Final time, blow-up crossing time t*, or event time, depending on status.
    double time = 0.0;
};

struct EventHit {
    std::size_t event = 0;
    double t = 0.0;
    State state;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<State> derivatives; ///< f(t, y) at each node; may be empty for loaded data
    Termination termination;
    std::vector<EventHit> events;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] const State &back() const { return states.back(); }
};

/// Integrates from t_span.first toward t_span.second (> first).
/// Throws StepSizeUnderflow if the step drops below 1e3 ulp-multiples of |t|.
[[nodiscard]] Trajectory integrate(const Rhs &rhs, State initial, std::pair<double, double> t_span,
                                   const IntegratorConfig &config, std::span<const EventSpec> events = {});

/// Cubic Hermite value at t; exact at nodes. Throws RangeError outside the node range
/// and InvalidInput if the trajectory carries no derivatives.
[[nodiscard]] State evaluate_dense(const Trajectory &traj, double t);

/// Hermite interpolant on one step.
void hermite(double t0, double t1, std::span<const double> y0, std::span<const double> f0,
             std::span<const double> y1, std::span<const double> f1, double t, std::span<double> out);

} // namespace ckm::ode
