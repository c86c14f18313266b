#include "fvd/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/core.h>

#include "fvd/errors.hpp"

namespace fvd {

double PotentialConfig::share() const {
  if (resample_steps.empty()) {
    throw ParameterError("potential share needs at least one resample step");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError(fmt::format("lambda must be >= 0 (got {})", lambda));
  }
  return lambda / static_cast<double>(resample_steps.size());
}

bool PotentialConfig::is_barrier(int t) const {
  return std::find(resample_steps.begin(), resample_steps.end(), t) !=
         resample_steps.end();
}

std::vector<int> default_resample_steps(int steps, std::size_t n) {
  if (n == 0) return {};
  if (static_cast<long>(n) >= steps) {
    throw ParameterError(fmt::format(
        "{} resample steps do not fit strictly inside (0, {})", n, steps));
  }
  std::vector<int> out;
  out.reserve(n);
  for (auto j = static_cast<long>(n); j >= 1; --j) {
    out.push_back(static_cast<int>(j * steps / static_cast<long>(n + 1)));
  }
  return normalize_resample_steps(std::move(out), steps);
}

std::vector<int> normalize_resample_steps(std::vector<int> steps, int T) {
  std::sort(steps.begin(), steps.end(), std::greater<>());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < 1 || steps[i] > T) {
      throw ParameterError(
          fmt::format("resample step {} outside [1, {}]", steps[i], T));
    }
    if (i > 0 && steps[i] == steps[i - 1]) {
      throw ParameterError(fmt::format("duplicate resample step {}", steps[i]));
    }
  }
  return steps;
}

double log_potential(const PotentialConfig& cfg, double reward) {
  return cfg.share() * reward;
}

std::vector<double> survival_probs(const PotentialConfig& cfg,
                                   std::span<const double> rewards) {
  if (rewards.empty()) throw ParameterError("survival_probs: empty rewards");
  const double c = cfg.share();
  double r_max = rewards[0];
  for (double r : rewards) {
    if (!std::isfinite(r)) throw InputError("survival_probs: non-finite reward");
    r_max = std::max(r_max, r);
  }
  std::vector<double> s(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    // c * 0 == 0 even for huge c, so the arg-max gets exp(0) == 1 exactly.
    const double gap = rewards[i] - r_max;
    s[i] = gap == 0.0 ? 1.0 : std::exp(c * gap);
  }
  return s;
}

double expected_absorption(const PotentialConfig& cfg,
                           std::span<const double> rewards) {
  const auto s = survival_probs(cfg, rewards);
  double acc = 0.0;
  // -expm1(c * gap) == 1 - s_i without cancellation for tiny gaps.
  double r_max = *std::max_element(rewards.begin(), rewards.end());
  const double c = cfg.share();
  for (double r : rewards) acc += -std::expm1(c * (r - r_max));
  return acc / static_cast<double>(s.size());
}

double absorption_upper_bound(const PotentialConfig& cfg,
                              std::span<const double> rewards) {
  if (rewards.empty()) throw ParameterError("absorption bound: empty rewards");
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  return -std::expm1(-cfg.share() * (*hi - *lo));
}

double terminal_log_correction(double accumulated_log_potentials,
                               double terminal_reward, double lambda) {
  const double target = lambda * terminal_reward;
  const double acc = accumulated_log_potentials;
  double c = target - acc;
  double best = c;
  double best_err = std::abs((acc + c) - target);
  // acc + c is monotone in c, so nudge c one ulp at a time toward the
  // target and stop on a hit or once the sum jumps past it.
  const bool below = acc + c < target;
  for (int i = 0; i < 64 && best_err != 0.0; ++i) {
    c = std::nextafter(c, below ? INFINITY : -INFINITY);
    const double sum = acc + c;
    const double err = std::abs(sum - target);
    if (err < best_err) {
      best = c;
      best_err = err;
    }
    if ((sum < target) != below && sum != target) break;
  }
  return best;
}

}  // namespace fvd
