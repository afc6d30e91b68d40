#pragma once

// Synchronization diagnostics on finite trajectories of the ensemble.
//
// Verdicts are finite-horizon proxies for limits. Each is decided on the tail
// window (the last `tail_fraction` of the time span), split into two halves:
//   full phase-locking  max pairwise |z_n - z_m| does not grow from the first
//                       half to the second (within growth_margin + eps_sync)
//   frequency sync      final max pairwise |dz_n/dt - dz_m/dt| < eps_sync and
//                       the same non-growth test holds for that gap
//   phase sync          final max pairwise |z_n - z_m| < eps_sync
// Phase sync implies full phase-locking by construction.

#include <optional>
#include <span>
#include <vector>

#include "ckm/ensemble.hpp"
#include "ckm/integrator.hpp"

namespace ckm {

struct SyncThresholds {
    double eps_sync = 1e-6;
    double tail_fraction = 0.2;
    double growth_margin = 1e-3;

    /// Throws InvalidInput unless all are positive and tail_fraction < 1.
    void validate() const;
};

struct SyncReport {
    bool full_phase_locking = false;
    bool frequency_sync = false;
    bool phase_sync = false;
    double max_pair_z_gap_tail = 0.0;
    double max_pair_zdot_gap_tail = 0.0;
    double final_pair_z_gap = 0.0;
    double final_pair_zdot_gap = 0.0;
    double real_spread_max = 0.0;
    double imag_spread_max = 0.0;
    /// Least-squares slope of log Y over the tail; empty when Y vanishes there.
    std::optional<double> fitted_Y_decay_rate;
    double H_final = 0.0;

    friend bool operator==(const SyncReport &, const SyncReport &) = default;
};

/// max |x_n - x_m| and max |y_n - y_m|.
[[nodiscard]] double real_spread(const EnsembleState &state);
[[nodiscard]] double imag_spread(const EnsembleState &state);
/// Same, on a split-layout vector [x..., y...].
[[nodiscard]] double real_spread(std::span<const double> split);
[[nodiscard]] double imag_spread(std::span<const double> split);

/// max |z_n - z_m| and max |dz_n/dt - dz_m/dt| for one split-layout state.
[[nodiscard]] double pair_z_gap(std::span<const double> split);
[[nodiscard]] double pair_zdot_gap(std::span<const double> split, const SystemParams &params);

/// Throws NotClassifiable unless the trajectory completed, InvalidInput if the
/// tail window holds fewer than 10 samples.
[[nodiscard]] SyncReport classify(const ode::Trajectory &traj, const SystemParams &params,
                                  const SyncThresholds &thresholds = {});

struct DecayCheck {
    bool onset_found = false;
    double onset_time = 0.0;
    bool bound_satisfied = false;
    /// Slope of log Y over [onset, end]; empty when Y is identically zero.
    std::optional<double> fitted_rate;
    /// Largest log(Y(t2) / (Y(t1) exp(-lambda sin(delta0) (t2 - t1)))) over sample pairs.
    double worst_log_excess = 0.0;
};

/// Checks Y(t2) <= Y(t1) exp(-lambda sin(delta0) (t2 - t1)) (1 + 1e-6) for all
/// sample pairs after the onset, the first sample from which the real spread
/// stays below pi/2 - delta0. No onset leaves onset_found false.
[[nodiscard]] DecayCheck decay_rate_check(const ode::Trajectory &traj, const SystemParams &params, double delta0);

/// H at each sample: trapezoid integral of sum_n (dx_n/dt)^2 from the first sample.
[[nodiscard]] std::vector<double> dissipation_integral(const ode::Trajectory &traj, const SystemParams &params);

} // namespace ckm
