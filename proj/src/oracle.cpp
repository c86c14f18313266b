#include "fvd/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/core.h>

#include "fvd/errors.hpp"

namespace fvd::oracle {
namespace {

constexpr double kMinCoverage = 0.9999;
constexpr std::size_t kDefaultPoints1d = 2048;
constexpr std::size_t kDefaultPoints2d = 256;
constexpr double kHalfWidthSds = 6.0;

std::size_t cells_per_axis_target(std::size_t dim) { return dim == 1 ? 64 : 32; }

}  // namespace

double Axis::spacing() const {
  return (hi - lo) / static_cast<double>(n - 1);
}

double Axis::point(std::size_t i) const {
  return lo + spacing() * static_cast<double>(i);
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (const auto& a : axes) s *= a.n;
  return s;
}

State GridSpec::point(std::size_t flat) const {
  State x(static_cast<Eigen::Index>(dim()));
  for (std::size_t d = dim(); d-- > 0;) {
    x[static_cast<Eigen::Index>(d)] = axes[d].point(flat % axes[d].n);
    flat /= axes[d].n;
  }
  return x;
}

std::size_t GridSpec::cell_of(const State& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw InputError("grid cell lookup: dimension mismatch");
  }
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const auto& a = axes[d];
    const double pos = (x[static_cast<Eigen::Index>(d)] - a.lo) / a.spacing();
    const double r = std::floor(pos + 0.5);
    if (!(r >= 0.0 && r <= static_cast<double>(a.n - 1))) return size();
    flat = flat * a.n + static_cast<std::size_t>(r);
  }
  return flat;
}

GridSpec default_grid(const GaussianMixture& prior) {
  const std::size_t d = prior.dim();
  if (d > 2) throw ParameterError("grid oracles support at most 2 dimensions");
  const State mu = prior.pooled_mean();
  const State sd = prior.pooled_variance().array().sqrt();
  GridSpec g;
  const std::size_t n = d == 1 ? kDefaultPoints1d : kDefaultPoints2d;
  for (std::size_t j = 0; j < d; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    g.axes.push_back({mu[jj] - kHalfWidthSds * sd[jj],
                      mu[jj] + kHalfWidthSds * sd[jj], n});
  }
  return g;
}

GridDistribution::GridDistribution(GridSpec spec, std::vector<double> probs)
    : spec_(std::move(spec)), probs_(std::move(probs)) {
  if (spec_.dim() < 1 || spec_.dim() > 2) {
    throw ParameterError("grid must be 1-D or 2-D");
  }
  for (const auto& a : spec_.axes) {
    if (a.n < 2 || !(a.hi > a.lo)) {
      throw ParameterError("grid axis needs n >= 2 and hi > lo");
    }
  }
  if (probs_.size() != spec_.size()) {
    throw ParameterError("grid probabilities do not match the point count");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw ParameterError("grid probability is negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw ParameterError(fmt::format("grid probabilities sum to {}", total));
  }
}

State GridDistribution::mean() const {
  State m = State::Zero(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < probs_.size(); ++i) m += probs_[i] * spec_.point(i);
  return m;
}

State GridDistribution::variance() const {
  const State m = mean();
  State v = State::Zero(m.size());
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    v.array() += probs_[i] * (spec_.point(i) - m).array().square();
  }
  return v;
}

GridDistribution tilted_target(const GaussianMixture& prior,
                               const RewardSpec& reward, double lambda,
                               const GridSpec& grid) {
  if (grid.dim() != prior.dim()) {
    throw ParameterError("grid and prior differ in dimension");
  }
  State lo(static_cast<Eigen::Index>(grid.dim()));
  State hi(lo.size());
  for (std::size_t d = 0; d < grid.dim(); ++d) {
    const auto& a = grid.axes[d];
    lo[static_cast<Eigen::Index>(d)] = a.lo - 0.5 * a.spacing();
    hi[static_cast<Eigen::Index>(d)] = a.hi + 0.5 * a.spacing();
  }
  const double mass = prior.box_mass(lo, hi);
  if (mass < kMinCoverage) {
    throw CoverageError(
        fmt::format("grid covers only {} of the prior mass (need {})", mass,
                    kMinCoverage),
        mass);
  }

  const std::size_t n = grid.size();
  std::vector<double> logf(n);
  for (std::size_t i = 0; i < n; ++i) {
    const State x = grid.point(i);
    double lf = prior.log_density(x);
    if (lambda != 0.0) lf += lambda * eval_reward(reward, x);
    // Trapezoid weights: half at each axis endpoint.
    std::size_t flat = i;
    for (std::size_t d = grid.dim(); d-- > 0;) {
      const std::size_t k = flat % grid.axes[d].n;
      flat /= grid.axes[d].n;
      if (k == 0 || k + 1 == grid.axes[d].n) lf += std::log(0.5);
    }
    logf[i] = lf;
  }
  const double m = *std::max_element(logf.begin(), logf.end());
  std::vector<double> probs(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::exp(logf[i] - m);
    total += probs[i];
  }
  for (auto& p : probs) p /= total;
  return GridDistribution(grid, std::move(probs));
}

std::size_t default_tv_block(const GridSpec& grid) {
  const std::size_t target = cells_per_axis_target(grid.dim());
  std::size_t n_min = grid.axes[0].n;
  for (const auto& a : grid.axes) n_min = std::min(n_min, a.n);
  return std::max<std::size_t>(1, n_min / target);
}

double tv_distance(const std::vector<State>& samples,
                   const GridDistribution& target, std::size_t block,
                   std::span<const double> weights) {
  if (samples.empty()) throw ParameterError("tv_distance: no samples");
  if (!weights.empty() && weights.size() != samples.size()) {
    throw ParameterError("tv_distance: one weight per sample required");
  }
  const GridSpec& g = target.spec();
  if (block == 0) block = default_tv_block(g);

  std::vector<std::size_t> blocks_per_axis;
  std::size_t n_blocks = 1;
  for (const auto& a : g.axes) {
    blocks_per_axis.push_back((a.n + block - 1) / block);
    n_blocks *= blocks_per_axis.back();
  }
  auto block_of = [&](std::size_t flat) {
    std::vector<std::size_t> idx(g.dim());
    for (std::size_t d = g.dim(); d-- > 0;) {
      idx[d] = (flat % g.axes[d].n) / block;
      flat /= g.axes[d].n;
    }
    std::size_t b = 0;
    for (std::size_t d = 0; d < g.dim(); ++d) b = b * blocks_per_axis[d] + idx[d];
    return b;
  };

  std::vector<double> p(n_blocks, 0.0);
  for (std::size_t i = 0; i < target.probs().size(); ++i) {
    p[block_of(i)] += target.probs()[i];
  }

  std::vector<double> q(n_blocks, 0.0);
  double overflow = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0)) throw ParameterError("tv_distance: negative weight");
    total += w;
    const std::size_t c = g.cell_of(samples[i]);
    if (c == g.size()) {
      overflow += w;
    } else {
      q[block_of(c)] += w;
    }
  }
  if (!(total > 0.0)) throw ParameterError("tv_distance: zero total weight");
  double l1 = overflow / total;
  for (std::size_t b = 0; b < n_blocks; ++b) l1 += std::abs(q[b] / total - p[b]);
  return std::min(1.0, 0.5 * l1);
}

std::vector<State> sample_grid(const GridDistribution& target, std::size_t n,
                               Rng& rng) {
  const auto& probs = target.probs();
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  const GridSpec& g = target.spec();
  std::vector<State> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    State x = g.point(pick(rng.engine()));
    for (std::size_t d = 0; d < g.dim(); ++d) {
      x[static_cast<Eigen::Index>(d)] += (rng.uniform() - 0.5) * g.axes[d].spacing();
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<std::uint64_t> multinomial_distinct_counts(std::size_t K) {
  if (K < 2 || K > 6) {
    throw ParameterError(
        fmt::format("enumeration supports 2 <= K <= 6 (got {})", K));
  }
  std::vector<std::uint64_t> counts(K + 1, 0);
  std::vector<std::size_t> digits(K, 0);
  while (true) {
    unsigned mask = 0;
    for (std::size_t d : digits) mask |= 1u << d;
    ++counts[static_cast<std::size_t>(std::popcount(mask))];
    std::size_t pos = 0;
    while (pos < K && ++digits[pos] == K) digits[pos++] = 0;
    if (pos == K) break;
  }
  return counts;
}

std::vector<double> multinomial_distinct_distribution(std::size_t K) {
  const auto counts = multinomial_distinct_counts(K);
  double total = 1.0;
  for (std::size_t i = 0; i < K; ++i) total *= static_cast<double>(K);
  std::vector<double> probs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    probs[i] = static_cast<double>(counts[i]) / total;
  }
  return probs;
}

double expected_zero_offspring_fraction(std::size_t K) {
  if (K < 1) throw ParameterError("K must be >= 1");
  return std::pow(1.0 - 1.0 / static_cast<double>(K), static_cast<double>(K));
}

double expected_distinct_ancestors(std::size_t K) {
  return static_cast<double>(K) * (1.0 - expected_zero_offspring_fraction(K));
}

double distinct_ancestors_variance(std::size_t K) {
  const double k = static_cast<double>(K);
  const double p = 1.0 - std::pow(1.0 - 1.0 / k, k);
  const double both = 1.0 - 2.0 * std::pow(1.0 - 1.0 / k, k) +
                      std::pow(std::max(0.0, 1.0 - 2.0 / k), k);
  return k * p * (1.0 - p) + k * (k - 1.0) * (both - p * p);
}

std::vector<double> fv_survivor_count_distribution(
    std::span<const double> surv) {
  if (surv.size() > 10000) {
    throw ParameterError("survivor-count law supports K <= 10^4");
  }
  std::vector<double> dist{1.0};
  dist.reserve(surv.size() + 1);
  for (double s : surv) {
    if (!(s > 0.0 && s <= 1.0)) {
      throw ParameterError(fmt::format("survival probability {} outside (0, 1]", s));
    }
    dist.push_back(0.0);
    for (std::size_t c = dist.size() - 1; c > 0; --c) {
      dist[c] = dist[c] * (1.0 - s) + dist[c - 1] * s;
    }
    dist[0] *= (1.0 - s);
  }
  return dist;
}

Moments distribution_moments(std::span<const double> probs) {
  Moments m;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    m.mean += static_cast<double>(c) * probs[c];
  }
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const double d = static_cast<double>(c) - m.mean;
    m.variance += d * d * probs[c];
  }
  return m;
}

}  // namespace fvd::oracle
