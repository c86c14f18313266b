#pragma once

#include <cstddef>
#include <vector>

#include "fvd/diffusion.hpp"
#include "fvd/rng.hpp"

namespace fvd {

/// Mixture of diagonal-covariance Gaussians.
class GaussianMixture {
 public:
  GaussianMixture(std::vector<double> weights, std::vector<State> means,
                  std::vector<State> variances);

  static GaussianMixture standard_normal(std::size_t dim);

  std::size_t components() const { return weights_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(means_[0].size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<State>& means() const { return means_; }
  const std::vector<State>& variances() const { return variances_; }

  double log_density(const State& x) const;
  /// Gradient of log_density.
  State score(const State& x) const;

  State pooled_mean() const;
  /// Per-dimension variance of the whole mixture.
  State pooled_variance() const;

  /// Mass of the axis-aligned box [lo, hi].
  double box_mass(const State& lo, const State& hi) const;

 private:
  void component_log_densities(const State& x, std::vector<double>& out) const;

  std::vector<double> weights_;
  std::vector<State> means_;
  std::vector<State> variances_;
  std::vector<double> log_weights_;
  std::vector<double> log_norm_;  // -0.5 * sum(log(2 pi v))
};

/// Time-t marginal of the mixture under the forward kernel.
GaussianMixture marginal_at_t(const GaussianMixture& prior, int t,
                              const NoiseSchedule& sched);

/// Exact noise prediction -sqrt(1 - abar_t) * grad log p_t(x_t).
State eps_prediction(const GaussianMixture& prior, const State& x_t, int t,
                     const NoiseSchedule& sched);

/// Ancestral sample: component by weight, then a Gaussian draw.
State sample_prior(const GaussianMixture& prior, Rng& rng);

/// Anything that predicts the injected noise at (x_t, t). The engine only
/// sees this interface.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual std::size_t dim() const = 0;
  virtual const NoiseSchedule& schedule() const = 0;
  virtual State predict_eps(const State& x_t, int t) const = 0;
};

/// Exact denoiser for a Gaussian-mixture prior. Marginals for every t are
/// precomputed; the object is immutable and safe to share across threads.
class MixtureDenoiser final : public Denoiser {
 public:
  MixtureDenoiser(GaussianMixture prior, NoiseSchedule sched);

  std::size_t dim() const override { return prior_.dim(); }
  const NoiseSchedule& schedule() const override { return sched_; }
  State predict_eps(const State& x_t, int t) const override;

  const GaussianMixture& prior() const { return prior_; }

 private:
  GaussianMixture prior_;
  NoiseSchedule sched_;
  std::vector<GaussianMixture> marginals_;
};

}  // namespace fvd
