#pragma once

#include <cstdint>

namespace fvd {

/// Robbins-Monro state for adapting lambda toward a target absorption rate.
struct ControllerState {
  double lambda = 1.0;
  double alpha_star = 0.5;
  double eta0 = 0.5;
  double gamma = 0.1;
  std::uint64_t k = 0;
  double lambda_min = 0.0;
  double lambda_max = 10.0;
  double delta_floor = 1e-3;
  bool enabled = true;

  /// Throws ParameterError on an invalid combination.
  void validate() const;
};

/// eta_k = eta0 / (1 + gamma * k).
double learning_rate(const ControllerState& state);

/// One gated update. When enabled and log_potential_std >= delta_floor,
/// lambda <- clip(lambda - eta_k (alpha_t - alpha_star)) and k advances;
/// otherwise the state is returned unchanged.
ControllerState rm_update(ControllerState state, double alpha_t,
                          double log_potential_std);

}  // namespace fvd
