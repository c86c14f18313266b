#include "fvd/engine.hpp"

#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "fvd/diagnostics.hpp"
#include "fvd/errors.hpp"
#include "fvd/parallel.hpp"
#include "fvd/rng.hpp"

namespace fvd {

const char* to_string(Method m) {
  switch (m) {
    case Method::kFvd:
      return "fvd";
    case Method::kSmcMultinomial:
      return "smc_multinomial";
  }
  return "?";
}

const char* to_string(TerminalMode m) {
  switch (m) {
    case TerminalMode::kTemperatureSubsample:
      return "temperature_subsample";
    case TerminalMode::kTerminalCorrectionReweight:
      return "terminal_correction_reweight";
  }
  return "?";
}

NoiseSchedule ScheduleConfig::build() const {
  return build_strided_schedule(train_steps, steps, beta_start, beta_end);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ParameterError(fmt::format("{}: {}", field, why));
  };
  if (K < 1) fail("K", "must be >= 1");
  if (!potential.resample_steps.empty() && K < 2) {
    fail("K", "must be >= 2 when resampling");
  }
  if (schedule.steps < 1 || schedule.train_steps < schedule.steps) {
    fail("schedule", "need 1 <= steps <= train_steps");
  }
  if (potential.resample_steps !=
      normalize_resample_steps(potential.resample_steps, schedule.steps)) {
    fail("potential.resample_steps", "must be strictly decreasing");
  }
  if (!(potential.lambda >= 0.0) || !std::isfinite(potential.lambda)) {
    fail("potential.lambda", "must be finite and >= 0");
  }
  if (auto d = reward.dim(); d && *d != prior.dim()) {
    fail("reward", fmt::format("dimension {} differs from prior dimension {}",
                               *d, prior.dim()));
  }
  ControllerState c = controller;
  c.lambda = potential.lambda;
  try {
    c.validate();
  } catch (const ParameterError& e) {
    fail("controller", e.what());
  }
  if (!(rebirth_eta >= 0.0 && rebirth_eta <= 1.0)) {
    fail("rebirth_eta", "must lie in [0, 1]");
  }
  if (!(alpha_max > 0.0 && alpha_max <= 1.0)) {
    fail("alpha_max", "must lie in (0, 1]");
  }
  if (!(tau > 0.0)) fail("tau", "must be > 0");
  if (n_eval < 1) fail("n_eval", "must be >= 1");
  if (workers < 1) fail("workers", "must be >= 1");
}

Population initial_population(std::size_t K, std::size_t dim,
                              std::uint64_t seed) {
  Population pop(K);
  for (std::size_t i = 0; i < K; ++i) {
    Rng rng = make_stream(seed, StreamTag::kInit, i);
    pop[i].x = rng.normal_vector(static_cast<Eigen::Index>(dim));
    pop[i].lineage_id = i;
    pop[i].cum_log_potential = 0.0;
  }
  return pop;
}

Population propagate_step(const Population& population, int t,
                          const Denoiser& denoiser, unsigned workers) {
  Population out = population;
  const State no_noise;
  parallel_for(population.size(), workers, [&](std::size_t i) {
    const State& x = population[i].x;
    out[i].x = ddim_step(x, denoiser.predict_eps(x, t), t, 0.0, no_noise,
                         denoiser.schedule());
  });
  return out;
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

namespace {

struct Selection {
  DeathMask death_mask;
  std::vector<std::size_t> revived;
  DonorMap donors;
  /// Multinomial resampling re-steps every slot from its ancestor, not only
  /// the refilled ones.
  bool restep_all = false;
};

Selection fv_select(const RunConfig& cfg, const PotentialConfig& pc,
                    std::span<const double> rewards,
                    std::span<const double> log_g, int t) {
  const auto surv = survival_probs(pc, rewards);
  Rng death_rng = make_stream(cfg.seed, StreamTag::kDeath,
                              static_cast<std::uint64_t>(t));
  auto capped = enforce_cap(fv_death_draw(surv, death_rng), log_g, cfg.alpha_max);
  Rng donor_rng = make_stream(cfg.seed, StreamTag::kDonor,
                              static_cast<std::uint64_t>(t));
  Selection sel;
  sel.donors = donor_assign(capped.death_mask, donor_rng);
  sel.death_mask = std::move(capped.death_mask);
  sel.revived = std::move(capped.revived);
  return sel;
}

Selection multinomial_select(const RunConfig& cfg,
                             std::span<const double> log_g, int t) {
  Rng rng = make_stream(cfg.seed, StreamTag::kResample,
                        static_cast<std::uint64_t>(t));
  const auto ancestors = multinomial_resample(log_g, rng);
  auto slots = assign_offspring_slots(ancestors);
  Selection sel;
  sel.death_mask = std::move(slots.death_mask);
  sel.donors = std::move(slots.donors);
  sel.restep_all = true;
  return sel;
}

void check_selection(const Selection& sel, std::size_t K, int t) {
  if (sel.death_mask.size() != K) {
    throw InvariantError(fmt::format("step {}: death mask has wrong size", t));
  }
  std::size_t n_dead = 0;
  for (bool d : sel.death_mask) n_dead += d ? 1 : 0;
  if (n_dead != sel.donors.size()) {
    throw InvariantError(
        fmt::format("step {}: {} dead but {} donors", t, n_dead, sel.donors.size()));
  }
  for (const auto& [dead, donor] : sel.donors) {
    if (!sel.death_mask[dead] || sel.death_mask[donor]) {
      throw InvariantError(
          fmt::format("step {}: donor map {} -> {} is inconsistent", t, dead, donor));
    }
  }
  for (std::size_t r : sel.revived) {
    if (sel.death_mask[r]) {
      throw InvariantError(fmt::format("step {}: revived particle {} is dead", t, r));
    }
  }
}

RunReport run_loop(const RunConfig& cfg, Method method) {
  cfg.validate();
  const NoiseSchedule sched = cfg.schedule.build();
  const MixtureDenoiser denoiser(cfg.prior, sched);
  const std::size_t K = cfg.K;
  const int T = sched.steps();

  Population pop = initial_population(K, cfg.prior.dim(), cfg.seed);
  ControllerState ctl = cfg.controller;
  ctl.lambda = cfg.potential.lambda;

  RunReport report;
  report.lambda_trace.push_back(ctl.lambda);

  std::vector<State> eps(K);
  std::vector<State> next(K);
  std::vector<double> rewards(K);
  const State no_noise;

  for (int t = T; t >= 1; --t) {
    parallel_for(K, cfg.workers, [&](std::size_t i) {
      eps[i] = denoiser.predict_eps(pop[i].x, t);
      next[i] = ddim_step(pop[i].x, eps[i], t, 0.0, no_noise, sched);
    });

    if (cfg.potential.is_barrier(t)) {
      const PotentialConfig pc{ctl.lambda, cfg.potential.resample_steps};
      parallel_for(K, cfg.workers, [&](std::size_t i) {
        rewards[i] = eval_reward(cfg.reward,
                                 tweedie_estimate(pop[i].x, eps[i], t, sched));
      });
      std::vector<double> log_g(K);
      for (std::size_t i = 0; i < K; ++i) log_g[i] = log_potential(pc, rewards[i]);

      Selection sel = method == Method::kFvd
                          ? fv_select(cfg, pc, rewards, log_g, t)
                          : multinomial_select(cfg, log_g, t);
      check_selection(sel, K, t);

      std::vector<std::pair<std::size_t, std::size_t>> reborn(sel.donors.begin(),
                                                              sel.donors.end());
      std::vector<std::pair<std::size_t, std::size_t>> resteps;
      if (sel.restep_all) {
        std::vector<std::size_t> ancestor(K);
        std::iota(ancestor.begin(), ancestor.end(), std::size_t{0});
        for (const auto& [dead, donor] : reborn) ancestor[dead] = donor;
        for (std::size_t i = 0; i < K; ++i) resteps.emplace_back(i, ancestor[i]);
      } else {
        resteps = reborn;
      }
      parallel_for(resteps.size(), cfg.workers, [&](std::size_t j) {
        const auto [slot, source] = resteps[j];
        Rng rng = make_stream(cfg.seed, StreamTag::kRebirth, slot,
                              static_cast<std::uint64_t>(t));
        next[slot] = rebirth(pop[source].x, denoiser, t, cfg.rebirth_eta, rng);
      });

      Population updated = pop;
      for (std::size_t i = 0; i < K; ++i) {
        if (!sel.death_mask[i]) updated[i].cum_log_potential += log_g[i];
      }
      for (const auto& [dead, donor] : reborn) {
        updated[dead].lineage_id = pop[donor].lineage_id;
        updated[dead].cum_log_potential = pop[donor].cum_log_potential + log_g[donor];
      }
      for (const auto& p : updated) {
        if (!std::isfinite(p.cum_log_potential)) {
          throw InvariantError(
              fmt::format("step {}: accumulated log potential is not finite", t));
        }
      }
      pop = std::move(updated);

      ResampleEvent ev;
      ev.step = t;
      ev.alpha_t = static_cast<double>(reborn.size()) / static_cast<double>(K);
      ev.killed_ranks = killed_reward_ranks(rewards, sel.death_mask);
      ev.lambda_used = ctl.lambda;
      ev.death_mask = std::move(sel.death_mask);
      ev.revived = std::move(sel.revived);
      ev.donors = std::move(sel.donors);
      ev.rewards = rewards;
      ev.log_potentials = log_g;

      StepStats st;
      st.step = t;
      st.alpha_t = ev.alpha_t;
      st.lambda = ev.lambda_used;
      st.n_dead = reborn.size();
      st.n_revived = ev.revived.size();
      st.distinct_lineages = distinct_lineages(pop);
      st.mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                       static_cast<double>(K);
      st.std_log_g = population_std(log_g);

      ctl = rm_update(ctl, ev.alpha_t, st.std_log_g);
      report.lambda_trace.push_back(ctl.lambda);
      report.events.push_back(std::move(ev));
      report.per_step_stats.push_back(st);
    }

    for (std::size_t i = 0; i < K; ++i) pop[i].x = std::move(next[i]);
    if (pop.size() != K) {
      throw InvariantError(fmt::format("step {}: population size changed", t));
    }
  }

  report.final_rewards.resize(K);
  parallel_for(K, cfg.workers, [&](std::size_t i) {
    report.final_rewards[i] = eval_reward(cfg.reward, pop[i].x);
  });

  Rng select_rng = make_stream(cfg.seed, StreamTag::kSelect);
  report.selection_log_weights.resize(K);
  if (cfg.terminal_mode == TerminalMode::kTemperatureSubsample) {
    for (std::size_t i = 0; i < K; ++i) {
      report.selection_log_weights[i] = report.final_rewards[i] / cfg.tau;
    }
    report.selected =
        final_subsample(report.final_rewards, cfg.tau, cfg.n_eval, select_rng);
  } else {
    for (std::size_t i = 0; i < K; ++i) {
      report.selection_log_weights[i] = terminal_log_correction(
          pop[i].cum_log_potential, report.final_rewards[i], ctl.lambda);
    }
    report.selected =
        categorical_draws(report.selection_log_weights, cfg.n_eval, select_rng);
  }
  report.final_population = std::move(pop);
  return report;
}

}  // namespace

RunReport run_fvd(const RunConfig& cfg) {
  if (cfg.method != Method::kFvd) {
    throw ParameterError("run_fvd: config method is not fvd");
  }
  return run_loop(cfg, Method::kFvd);
}

RunReport run_smc_baseline(const RunConfig& cfg) {
  if (cfg.method != Method::kSmcMultinomial) {
    throw ParameterError("run_smc_baseline: config method is not smc_multinomial");
  }
  return run_loop(cfg, Method::kSmcMultinomial);
}

RunReport run(const RunConfig& cfg) {
  return cfg.method == Method::kFvd ? run_fvd(cfg) : run_smc_baseline(cfg);
}

}  // namespace fvd
