#include "fvd/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/core.h>

#include "fvd/errors.hpp"

namespace fvd {
namespace {

constexpr double kWeightTolerance = 1e-12;

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

GaussianMixture::GaussianMixture(std::vector<double> weights,
                                 std::vector<State> means,
                                 std::vector<State> variances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)) {
  const std::size_t m = weights_.size();
  if (m == 0) throw ParameterError("mixture needs at least one component");
  if (means_.size() != m || variances_.size() != m) {
    throw ParameterError(fmt::format(
        "mixture has {} weights, {} means and {} variances", m, means_.size(),
        variances_.size()));
  }
  const Eigen::Index d = means_[0].size();
  if (d == 0) throw ParameterError("mixture components must have dim >= 1");
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (!(weights_[k] > 0.0)) {
      throw ParameterError(
          fmt::format("mixture weight {} = {} is not positive", k, weights_[k]));
    }
    total += weights_[k];
    if (means_[k].size() != d || variances_[k].size() != d) {
      throw ParameterError(
          fmt::format("mixture component {} has inconsistent dimension", k));
    }
    if (!means_[k].allFinite()) {
      throw ParameterError(fmt::format("mixture mean {} is not finite", k));
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(variances_[k][j] > 0.0) || !std::isfinite(variances_[k][j])) {
        throw ParameterError(fmt::format(
            "mixture variance [{}][{}] = {} is not positive", k, j,
            variances_[k][j]));
      }
    }
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw ParameterError(
        fmt::format("mixture weights sum to {}, expected 1", total));
  }
  log_weights_.resize(m);
  log_norm_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    log_weights_[k] = std::log(weights_[k]);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      acc += std::log(2.0 * std::numbers::pi * variances_[k][j]);
    }
    log_norm_[k] = -0.5 * acc;
  }
}

GaussianMixture GaussianMixture::standard_normal(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return GaussianMixture({1.0}, {State::Zero(d)}, {State::Ones(d)});
}

void GaussianMixture::component_log_densities(const State& x,
                                              std::vector<double>& out) const {
  out.resize(components());
  for (std::size_t k = 0; k < components(); ++k) {
    const double quad =
        ((x - means_[k]).array().square() / variances_[k].array()).sum();
    out[k] = log_weights_[k] + log_norm_[k] - 0.5 * quad;
  }
}

double GaussianMixture::log_density(const State& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw InputError("log_density: dimension mismatch");
  }
  std::vector<double> lp;
  component_log_densities(x, lp);
  return log_sum_exp(lp);
}

State GaussianMixture::score(const State& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw InputError("score: dimension mismatch");
  }
  if (!x.allFinite()) throw InputError("score: non-finite input");
  std::vector<double> lp;
  component_log_densities(x, lp);
  const double norm = log_sum_exp(lp);
  State g = State::Zero(x.size());
  for (std::size_t k = 0; k < components(); ++k) {
    const double resp = std::exp(lp[k] - norm);
    g.array() -= resp * (x - means_[k]).array() / variances_[k].array();
  }
  return g;
}

State GaussianMixture::pooled_mean() const {
  State mu = State::Zero(static_cast<Eigen::Index>(dim()));
  for (std::size_t k = 0; k < components(); ++k) mu += weights_[k] * means_[k];
  return mu;
}

State GaussianMixture::pooled_variance() const {
  const State mu = pooled_mean();
  State var = State::Zero(mu.size());
  for (std::size_t k = 0; k < components(); ++k) {
    var.array() += weights_[k] * (variances_[k].array() +
                                  (means_[k] - mu).array().square());
  }
  return var;
}

double GaussianMixture::box_mass(const State& lo, const State& hi) const {
  double mass = 0.0;
  for (std::size_t k = 0; k < components(); ++k) {
    double p = weights_[k];
    for (Eigen::Index j = 0; j < lo.size(); ++j) {
      const double s = std::sqrt(variances_[k][j]);
      p *= normal_cdf((hi[j] - means_[k][j]) / s) -
           normal_cdf((lo[j] - means_[k][j]) / s);
    }
    mass += p;
  }
  return mass;
}

GaussianMixture marginal_at_t(const GaussianMixture& prior, int t,
                              const NoiseSchedule& sched) {
  const double abar = sched.alpha_bar(t);
  if (t == 0) return prior;
  std::vector<State> means;
  std::vector<State> vars;
  means.reserve(prior.components());
  vars.reserve(prior.components());
  for (std::size_t k = 0; k < prior.components(); ++k) {
    means.push_back(std::sqrt(abar) * prior.means()[k]);
    vars.push_back((abar * prior.variances()[k].array() + (1.0 - abar))
                       .matrix());
  }
  return GaussianMixture(prior.weights(), std::move(means), std::move(vars));
}

State eps_prediction(const GaussianMixture& prior, const State& x_t, int t,
                     const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps()) {
    throw ParameterError(fmt::format("eps_prediction: t = {} outside [1, {}]",
                                     t, sched.steps()));
  }
  if (!x_t.allFinite()) throw InputError("eps_prediction: non-finite x_t");
  const GaussianMixture pt = marginal_at_t(prior, t, sched);
  return -std::sqrt(1.0 - sched.alpha_bar(t)) * pt.score(x_t);
}

State sample_prior(const GaussianMixture& prior, Rng& rng) {
  const auto& w = prior.weights();
  std::size_t k = 0;
  if (w.size() > 1) {
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    k = pick(rng.engine());
  }
  State z = rng.normal_vector(static_cast<Eigen::Index>(prior.dim()));
  return prior.means()[k] +
         (prior.variances()[k].array().sqrt() * z.array()).matrix();
}

MixtureDenoiser::MixtureDenoiser(GaussianMixture prior, NoiseSchedule sched)
    : prior_(std::move(prior)), sched_(std::move(sched)) {
  marginals_.reserve(static_cast<std::size_t>(sched_.steps()) + 1);
  for (int t = 0; t <= sched_.steps(); ++t) {
    marginals_.push_back(marginal_at_t(prior_, t, sched_));
  }
}

State MixtureDenoiser::predict_eps(const State& x_t, int t) const {
  if (t < 1 || t > sched_.steps()) {
    throw ParameterError(
        fmt::format("predict_eps: t = {} outside [1, {}]", t, sched_.steps()));
  }
  if (!x_t.allFinite()) throw InputError("predict_eps: non-finite x_t");
  return -std::sqrt(1.0 - sched_.alpha_bar(t)) *
         marginals_[static_cast<std::size_t>(t)].score(x_t);
}

}  // namespace fvd
