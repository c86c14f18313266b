#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "fvd/diffusion.hpp"
#include "fvd/priors.hpp"

namespace fvd {

/// r(x) = -0.5 * ||x - target||^2 / scale^2; maximal (zero) at the target.
struct QuadraticReward {
  State target;
  double scale = 1.0;
};

/// r(x) = log p(c | x) under class-conditional mixtures and class priors.
struct ClassLogitReward {
  std::vector<GaussianMixture> classes;
  std::vector<double> class_priors;
  std::size_t target_class = 0;
};

/// Piecewise-linear interpolation of tabulated values over a strictly
/// increasing 1-D grid; constant extrapolation outside the grid.
struct TabulatedReward {
  std::vector<double> grid;
  std::vector<double> values;
};

class RewardSpec {
 public:
  using Kind = std::variant<QuadraticReward, ClassLogitReward, TabulatedReward>;

  /// Validates the parameters of the chosen kind.
  explicit RewardSpec(Kind kind);

  const Kind& kind() const { return kind_; }
  /// Sample-space dimension the reward accepts, when it is fixed.
  std::optional<std::size_t> dim() const;

 private:
  Kind kind_;
};

double eval_reward(const RewardSpec& spec, const State& x);

}  // namespace fvd
