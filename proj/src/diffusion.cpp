#include "fvd/diffusion.hpp"

#include <cmath>

#include <fmt/core.h>

#include "fvd/errors.hpp"

namespace fvd {

NoiseSchedule::NoiseSchedule(std::vector<double> betas)
    : beta_(std::move(betas)) {
  if (beta_.empty()) {
    throw ParameterError("noise schedule needs at least one step");
  }
  alpha_bar_.reserve(beta_.size() + 1);
  alpha_bar_.push_back(1.0);
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    const double b = beta_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw ParameterError(
          fmt::format("beta[{}] = {} is outside (0, 1)", i + 1, b));
    }
    alpha_bar_.push_back(alpha_bar_.back() * (1.0 - b));
  }
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > steps()) {
    throw ParameterError(fmt::format("beta index t = {} outside [1, {}]", t,
                                     steps()));
  }
  return beta_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > steps()) {
    throw ParameterError(fmt::format("alpha_bar index t = {} outside [0, {}]",
                                     t, steps()));
  }
  return alpha_bar_[static_cast<std::size_t>(t)];
}

NoiseSchedule build_linear_schedule(int steps, double beta_start,
                                    double beta_end) {
  if (steps < 1) throw ParameterError("schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ParameterError(fmt::format(
        "beta bounds must satisfy 0 < beta_start <= beta_end < 1 (got {}, {})",
        beta_start, beta_end));
  }
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t) {
    const double frac =
        steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
    betas[static_cast<std::size_t>(t - 1)] =
        beta_start + frac * (beta_end - beta_start);
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule build_strided_schedule(int train_steps, int steps,
                                     double beta_start, double beta_end) {
  if (steps < 1 || train_steps < steps) {
    throw ParameterError(fmt::format(
        "strided schedule needs 1 <= steps <= train_steps (got {}, {})", steps,
        train_steps));
  }
  const NoiseSchedule train =
      build_linear_schedule(train_steps, beta_start, beta_end);
  if (train_steps == steps) return train;

  std::vector<double> betas;
  betas.reserve(static_cast<std::size_t>(steps));
  double prev = 1.0;
  for (int j = 1; j <= steps; ++j) {
    const auto pos = static_cast<int>(std::lround(
        static_cast<double>(j) * train_steps / static_cast<double>(steps)));
    const double abar = train.alpha_bar(pos);
    betas.push_back(1.0 - abar / prev);
    prev = abar;
  }
  return NoiseSchedule(std::move(betas));
}

bool all_finite(const State& x) { return x.allFinite(); }

State tweedie_estimate(const State& x_t, const State& eps, int t,
                       const NoiseSchedule& sched) {
  if (x_t.size() != eps.size()) {
    throw InputError("tweedie_estimate: eps dimension differs from x_t");
  }
  const double abar = sched.alpha_bar(t);
  if (!(abar > 0.0)) {
    throw ScheduleError(
        fmt::format("alpha_bar({}) = {} is not positive", t, abar));
  }
  return (x_t - std::sqrt(1.0 - abar) * eps) / std::sqrt(abar);
}

double ddim_sigma(int t, double eta, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps()) {
    throw ParameterError(
        fmt::format("ddim_sigma: t = {} outside [1, {}]", t, sched.steps()));
  }
  if (!(eta >= 0.0)) {
    throw ParameterError(fmt::format("ddim_sigma: eta = {} is negative", eta));
  }
  if (eta == 0.0) return 0.0;
  const double abar_t = sched.alpha_bar(t);
  const double abar_prev = sched.alpha_bar(t - 1);
  return eta *
         std::sqrt((1.0 - abar_prev) * sched.beta(t) / (1.0 - abar_t));
}

State ddim_step(const State& x_t, const State& eps, int t, double eta,
                const State& noise, const NoiseSchedule& sched) {
  const double sigma = ddim_sigma(t, eta, sched);
  const double abar_prev = sched.alpha_bar(t - 1);
  const double dir_var = 1.0 - abar_prev - sigma * sigma;
  if (dir_var < 0.0) {
    throw ScheduleError(fmt::format(
        "ddim_step: 1 - abar_{{t-1}} - sigma^2 = {} < 0 at t = {}, eta = {}",
        dir_var, t, eta));
  }
  State x0 = tweedie_estimate(x_t, eps, t, sched);
  State out = std::sqrt(abar_prev) * x0 + std::sqrt(dir_var) * eps;
  if (sigma > 0.0) {
    if (noise.size() != x_t.size()) {
      throw InputError("ddim_step: noise dimension differs from x_t");
    }
    out += sigma * noise;
  }
  return out;
}

}  // namespace fvd
