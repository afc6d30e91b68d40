#pragma once

// Time integration of the N-oscillator ensemble in split layout.

#include "ckm/ensemble.hpp"
#include "ckm/integrator.hpp"

namespace ckm {

struct EnsembleRun {
    /// States in split layout. When `centered` is set they are taken relative
    /// to `centroid`, which is conserved by the flow.
    ode::Trajectory trajectory;
    cplx centroid{0.0, 0.0};
    bool centered = false;

    /// Stored state k with the centroid added back.
    [[nodiscard]] EnsembleState absolute_state(std::size_t k) const;
};

/// Integrates the ensemble over [0, horizon]. With `centered` the mean phase is
/// removed from the initial state first, so small pairwise differences keep
/// full relative precision. Imaginary components are monitored for blow-up
/// unless `config.blowup_components` is already set.
[[nodiscard]] EnsembleRun simulate_ensemble(const SystemParams &params, const EnsembleState &initial, double horizon,
                                            ode::IntegratorConfig config, bool centered = true);

/// The right-hand side in the integrator's calling convention.
[[nodiscard]] ode::Rhs ensemble_rhs(const SystemParams &params);

} // namespace ckm
