#include "ckm/ensemble_flow.hpp"

#include <cmath>

#include "ckm/errors.hpp"

namespace ckm {

EnsembleState EnsembleRun::absolute_state(std::size_t k) const {
    const auto state = EnsembleState::from_split(trajectory.states.at(k));
    return centered ? state.shifted(centroid) : state;
}

ode::Rhs ensemble_rhs(const SystemParams &params) {
    return [params](double, std::span<const double> y, std::span<double> out) { rhs_split_into(y, params, out); };
}

EnsembleRun simulate_ensemble(const SystemParams &params, const EnsembleState &initial, double horizon,
                              ode::IntegratorConfig config, bool centered) {
    const std::size_t n = params.size();
    if (initial.size() != n) {
        throw InvalidInput("initial state has " + std::to_string(initial.size()) + " oscillators, parameters have " +
                           std::to_string(n));
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidInput("horizon must be positive and finite");
    }
    if (config.blowup_components.empty()) {
        for (std::size_t k = n; k < 2 * n; ++k) {
            config.blowup_components.push_back(k);
        }
    }
    EnsembleRun run;
    run.centered = centered;
    EnsembleState start = initial;
    if (centered) {
        run.centroid = initial.centroid();
        start = initial.shifted(-run.centroid);
    }
    run.trajectory = ode::integrate(ensemble_rhs(params), start.to_split(), {0.0, horizon}, config);
    return run;
}

} // namespace ckm
