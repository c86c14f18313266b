#include "fvd/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "fvd/errors.hpp"

#ifndef FVD_FAULT_SURVIVAL_OFFSET
#define FVD_FAULT_SURVIVAL_OFFSET 0.0
#endif

namespace fvd {
namespace {

// Zero in regular builds; the mutation build shifts the survival rule.
constexpr double kSurvivalOffset = FVD_FAULT_SURVIVAL_OFFSET;

}  // namespace

DeathMask fv_death_draw(std::span<const double> surv, Rng& rng) {
  DeathMask dead(surv.size(), false);
  for (std::size_t i = 0; i < surv.size(); ++i) {
    const double s = surv[i];
    if (!(s > 0.0 && s <= 1.0)) {
      throw ParameterError(
          fmt::format("survival probability s[{}] = {} outside (0, 1]", i, s));
    }
    const double u = rng.uniform();
    dead[i] = u > s + kSurvivalOffset;
  }
  return dead;
}

std::size_t death_cap(std::size_t K, double alpha_max) {
  if (!(alpha_max > 0.0 && alpha_max <= 1.0)) {
    throw ParameterError(
        fmt::format("alpha_max must lie in (0, 1] (got {})", alpha_max));
  }
  const double raw = alpha_max * static_cast<double>(K);
  return std::min(K, static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

CapResult enforce_cap(DeathMask death_mask,
                      std::span<const double> log_potentials,
                      double alpha_max) {
  const std::size_t K = death_mask.size();
  if (log_potentials.size() != K) {
    throw ParameterError("enforce_cap: mask and potentials differ in size");
  }
  const std::size_t cap = death_cap(K, alpha_max);
  std::vector<std::size_t> dead;
  for (std::size_t i = 0; i < K; ++i) {
    if (death_mask[i]) dead.push_back(i);
  }
  CapResult out;
  if (dead.size() > cap) {
    std::stable_sort(dead.begin(), dead.end(),
                     [&](std::size_t a, std::size_t b) {
                       return log_potentials[a] > log_potentials[b];
                     });
    const std::size_t n_revive = dead.size() - cap;
    out.revived.assign(dead.begin(),
                       dead.begin() + static_cast<std::ptrdiff_t>(n_revive));
    for (std::size_t i : out.revived) death_mask[i] = false;
  }
  out.death_mask = std::move(death_mask);
  return out;
}

DonorMap donor_assign(const DeathMask& death_mask, Rng& rng) {
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < death_mask.size(); ++i) {
    if (!death_mask[i]) survivors.push_back(i);
  }
  DonorMap donors;
  bool any_dead = std::find(death_mask.begin(), death_mask.end(), true) !=
                  death_mask.end();
  if (!any_dead) return donors;
  if (survivors.empty()) {
    throw InvariantError("donor_assign: every particle is dead");
  }
  for (std::size_t i = 0; i < death_mask.size(); ++i) {
    if (death_mask[i]) donors.emplace(i, survivors[rng.index(survivors.size())]);
  }
  return donors;
}

State rebirth(const State& donor_x_t, const Denoiser& denoiser, int t,
              double rebirth_eta, Rng& rng) {
  const State eps = denoiser.predict_eps(donor_x_t, t);
  State noise = rebirth_eta > 0.0 ? rng.normal_vector(donor_x_t.size())
                                  : State::Zero(donor_x_t.size());
  return ddim_step(donor_x_t, eps, t, rebirth_eta, noise, denoiser.schedule());
}

std::vector<std::size_t> categorical_draws(std::span<const double> log_weights,
                                           std::size_t n, Rng& rng) {
  if (log_weights.empty()) {
    throw ParameterError("categorical_draws: no categories");
  }
  double m = -INFINITY;
  for (double w : log_weights) {
    if (std::isnan(w) || w == INFINITY) {
      throw InputError("categorical_draws: log weight is NaN or +inf");
    }
    m = std::max(m, w);
  }
  if (m == -INFINITY) {
    throw DegenerateWeightsError("all log weights are -inf");
  }
  std::vector<double> cdf(log_weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i] - m);
    cdf[i] = acc;
  }
  std::vector<std::size_t> out(n);
  for (auto& o : out) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // u can round up to acc; fall back to the last category with mass.
    if (it == cdf.end()) it = std::prev(cdf.end());
    o = static_cast<std::size_t>(it - cdf.begin());
    while (o > 0 && log_weights[o] == -INFINITY) --o;
  }
  return out;
}

std::vector<std::size_t> multinomial_resample(
    std::span<const double> log_weights, Rng& rng) {
  return categorical_draws(log_weights, log_weights.size(), rng);
}

SlotAssignment assign_offspring_slots(std::span<const std::size_t> ancestors) {
  const std::size_t K = ancestors.size();
  std::vector<bool> kept(K, false);
  std::vector<std::size_t> extra;
  for (std::size_t a : ancestors) {
    if (a >= K) throw InvariantError("ancestor index out of range");
    if (!kept[a]) {
      kept[a] = true;
    } else {
      extra.push_back(a);
    }
  }
  SlotAssignment out;
  out.death_mask.assign(K, false);
  std::size_t next = 0;
  for (std::size_t i = 0; i < K; ++i) {
    if (!kept[i]) {
      out.death_mask[i] = true;
      out.donors.emplace(i, extra.at(next++));
    }
  }
  if (next != extra.size()) {
    throw InvariantError("offspring slots do not balance");
  }
  return out;
}

std::vector<std::size_t> final_subsample(std::span<const double> rewards,
                                         double tau, std::size_t n_eval,
                                         Rng& rng) {
  if (!(tau > 0.0)) {
    throw ParameterError(fmt::format("tau must be > 0 (got {})", tau));
  }
  if (n_eval < 1) throw ParameterError("n_eval must be >= 1");
  std::vector<double> logw(rewards.size());
  std::transform(rewards.begin(), rewards.end(), logw.begin(),
                 [tau](double r) { return r / tau; });
  return categorical_draws(logw, n_eval, rng);
}

}  // namespace fvd
