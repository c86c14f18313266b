#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fvd/diffusion.hpp"
#include "fvd/priors.hpp"
#include "fvd/rewards.hpp"
#include "fvd/rng.hpp"

/// Brute-force ground truths used to check the sampler: densities on
/// grids, exhaustive enumeration, and exact finite laws.
namespace fvd::oracle {

/// n evenly spaced points from lo to hi inclusive.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 2;

  double spacing() const;
  double point(std::size_t i) const;
};

/// A 1-D grid or a 2-D Cartesian lattice (axes[0] is the slow index).
struct GridSpec {
  std::vector<Axis> axes;

  std::size_t dim() const { return axes.size(); }
  std::size_t size() const;
  State point(std::size_t flat) const;
  /// Flat index of the cell containing x (each point owns the interval of
  /// half a spacing either side), or size() if x is off the grid.
  std::size_t cell_of(const State& x) const;
};

/// 2048 points (1-D) or 256 x 256 (2-D) spanning +-6 pooled standard
/// deviations around the prior's pooled mean.
GridSpec default_grid(const GaussianMixture& prior);

/// Probability mass per grid cell.
class GridDistribution {
 public:
  GridDistribution(GridSpec spec, std::vector<double> probs);

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t dim() const { return spec_.dim(); }

  State mean() const;
  /// Per-dimension variance.
  State variance() const;

 private:
  GridSpec spec_;
  std::vector<double> probs_;
};

/// prior(x) * exp(lambda * r(x)) on the grid, trapezoid-normalised.
/// Throws CoverageError if the grid holds less than 0.9999 of the prior.
GridDistribution tilted_target(const GaussianMixture& prior,
                               const RewardSpec& reward, double lambda,
                               const GridSpec& grid);

/// Grid points per TV cell along each axis so that the default 1-D grid
/// gives 64 cells and the default 2-D lattice 32 x 32.
std::size_t default_tv_block(const GridSpec& grid);

/// Half the L1 distance between the (optionally weighted) sample histogram
/// and the target, both aggregated into blocks of `block` grid cells per
/// axis. Off-grid samples count fully toward the distance. block == 0
/// selects default_tv_block.
double tv_distance(const std::vector<State>& samples,
                   const GridDistribution& target, std::size_t block = 0,
                   std::span<const double> weights = {});

/// Draws cells by probability, then a uniform point inside the cell.
std::vector<State> sample_grid(const GridDistribution& target, std::size_t n,
                               Rng& rng);

/// Exact count of outcomes (out of K^K equiprobable ones) with each number
/// of distinct ancestors; index = distinct count. 2 <= K <= 6.
std::vector<std::uint64_t> multinomial_distinct_counts(std::size_t K);

/// Same law as probabilities.
std::vector<double> multinomial_distinct_distribution(std::size_t K);

/// K (1 - (1 - 1/K)^K).
double expected_distinct_ancestors(std::size_t K);

/// Exact variance of the distinct-ancestor count via indicator covariances.
double distinct_ancestors_variance(std::size_t K);

/// (1 - 1/K)^K: expected fraction of ancestors left without offspring.
double expected_zero_offspring_fraction(std::size_t K);

/// Poisson-binomial law of the survivor count; index = count.
std::vector<double> fv_survivor_count_distribution(std::span<const double> surv);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Moments distribution_moments(std::span<const double> probs);

}  // namespace fvd::oracle
