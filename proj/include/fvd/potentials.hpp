#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fvd {

/// Exponential potential family G_t = exp((lambda / |T|) * r(x0_hat)).
struct PotentialConfig {
  double lambda = 1.0;
  /// Resampling barriers, strictly decreasing (the order they are visited).
  std::vector<int> resample_steps;

  std::size_t n_resample() const { return resample_steps.size(); }
  /// Per-barrier share lambda / |T|. Throws if there are no barriers.
  double share() const;
  bool is_barrier(int t) const;
};

/// n barriers evenly spaced over (0, T), excluding t = T:
/// t_j = floor(j * T / (n + 1)) for j = n..1.
std::vector<int> default_resample_steps(int steps, std::size_t n);

/// Sorts descending and checks 1 <= t <= T and uniqueness.
std::vector<int> normalize_resample_steps(std::vector<int> steps, int T);

double log_potential(const PotentialConfig& cfg, double reward);

/// s_i = exp(share * (r_i - r_max)); every arg-max gets exactly 1.
std::vector<double> survival_probs(const PotentialConfig& cfg,
                                   std::span<const double> rewards);

/// (1/K) sum (1 - s_i).
double expected_absorption(const PotentialConfig& cfg,
                           std::span<const double> rewards);

/// 1 - exp(-share * (r_max - r_min)).
double absorption_upper_bound(const PotentialConfig& cfg,
                              std::span<const double> rewards);

/// log G_0 = lambda * r(x0) - accumulated. The returned value c satisfies
/// accumulated + c == lambda * terminal_reward in floating point whenever
/// such a double exists. When |accumulated| is much larger than the target
/// the representable sums can skip over it; c then brings the sum as close
/// as possible.
double terminal_log_correction(double accumulated_log_potentials,
                               double terminal_reward, double lambda);

}  // namespace fvd
