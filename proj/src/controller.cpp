#include "fvd/controller.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "fvd/errors.hpp"

namespace fvd {

void ControllerState::validate() const {
  if (!(alpha_star > 0.0 && alpha_star < 1.0)) {
    throw ParameterError(
        fmt::format("alpha_star must lie in (0, 1) (got {})", alpha_star));
  }
  if (!(eta0 > 0.0)) throw ParameterError("eta0 must be > 0");
  if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  if (!(delta_floor >= 0.0)) throw ParameterError("delta_floor must be >= 0");
  if (!(lambda_min <= lambda_max) || !std::isfinite(lambda_min) ||
      !std::isfinite(lambda_max)) {
    throw ParameterError(fmt::format("need lambda_min <= lambda_max (got {}, {})",
                                     lambda_min, lambda_max));
  }
  if (!(lambda >= lambda_min && lambda <= lambda_max)) {
    throw ParameterError(fmt::format("lambda = {} outside [{}, {}]", lambda,
                                     lambda_min, lambda_max));
  }
}

double learning_rate(const ControllerState& state) {
  return state.eta0 / (1.0 + state.gamma * static_cast<double>(state.k));
}

ControllerState rm_update(ControllerState state, double alpha_t,
                          double log_potential_std) {
  if (!(alpha_t >= 0.0 && alpha_t <= 1.0)) {
    throw ParameterError(fmt::format("alpha_t = {} outside [0, 1]", alpha_t));
  }
  if (!(log_potential_std >= 0.0)) {
    throw ParameterError("log-potential std must be >= 0");
  }
  if (!state.enabled || log_potential_std < state.delta_floor) return state;
  const double step = learning_rate(state) * (alpha_t - state.alpha_star);
  state.lambda = std::clamp(state.lambda - step, state.lambda_min,
                            state.lambda_max);
  ++state.k;
  return state;
}

}  // namespace fvd
