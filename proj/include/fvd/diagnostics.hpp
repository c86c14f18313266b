#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fvd/population.hpp"
#include "fvd/resampling.hpp"
#include "fvd/rng.hpp"

namespace fvd {

/// Collapse statistics accumulated over a run's barriers.
struct DeathStats {
  double mean_death_rate = 0.0;
  std::size_t final_distinct_lineages = 0;
  /// NaN when nothing was ever killed.
  double mean_killed_rank = 0.0;
  std::map<double, double> frac_killed_rank_above;
};

std::size_t distinct_lineages(const Population& population);

/// Mid-ranks normalised to [0, 1]: (ascending position) / (K - 1), ties
/// sharing the mean of their positions.
std::vector<double> normalized_ranks(std::span<const double> rewards);

/// Normalised ranks of the killed entries only, in index order.
std::vector<double> killed_reward_ranks(std::span<const double> rewards,
                                        const DeathMask& final_death_mask);

DeathStats death_stats(const std::vector<ResampleEvent>& events,
                       std::size_t final_lineages,
                       std::span<const double> thresholds = {});

/// Median pairwise distance of the pooled sample (first 1000 points of
/// each set at most).
double median_heuristic_bandwidth(const std::vector<State>& a,
                                  const std::vector<State>& b);

/// Unbiased squared MMD with k(x, y) = exp(-|x - y|^2 / (2 h^2)).
/// `bandwidth` == nullopt selects the median heuristic. Can be slightly
/// negative.
double mmd_rbf(const std::vector<State>& a, const std::vector<State>& b,
               std::optional<double> bandwidth = std::nullopt);

/// Biased (V-statistic) squared MMD; zero for identical sets.
double mmd_rbf_biased(const std::vector<State>& a, const std::vector<State>& b,
                      std::optional<double> bandwidth = std::nullopt);

struct MmdPermutationTest {
  double statistic = 0.0;
  double null_mean = 0.0;
  double null_std = 0.0;
  double p_value = 1.0;
};

/// Calibrates mmd_rbf by random relabelling of the pooled sample. The
/// bandwidth is fixed once from the pooled data.
MmdPermutationTest mmd_permutation_test(const std::vector<State>& a,
                                        const std::vector<State>& b,
                                        std::size_t permutations, Rng& rng,
                                        std::optional<double> bandwidth =
                                            std::nullopt);

/// Mean Euclidean distance over unordered pairs. This stands in for the
/// "diversity" column of reward-alignment benchmarks.
double pairwise_diversity(const std::vector<State>& samples);

}  // namespace fvd
