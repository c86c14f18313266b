#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvd/controller.hpp"
#include "fvd/diffusion.hpp"
#include "fvd/population.hpp"
#include "fvd/potentials.hpp"
#include "fvd/priors.hpp"
#include "fvd/resampling.hpp"
#include "fvd/rewards.hpp"

namespace fvd {

enum class Method { kFvd, kSmcMultinomial };
enum class TerminalMode { kTemperatureSubsample, kTerminalCorrectionReweight };

const char* to_string(Method m);
const char* to_string(TerminalMode m);

/// Sampling schedule: `steps` DDIM steps strided over a `train_steps`-step
/// linear beta schedule.
struct ScheduleConfig {
  int steps = 200;
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  NoiseSchedule build() const;
};

struct RunConfig {
  std::size_t K = 1000;
  ScheduleConfig schedule;
  GaussianMixture prior = GaussianMixture::standard_normal(1);
  RewardSpec reward{QuadraticReward{State::Zero(1), 1.0}};
  /// lambda is the initial alignment strength (the controller's lambda_0).
  PotentialConfig potential;
  /// Its lambda field is overwritten by potential.lambda at run start.
  ControllerState controller;
  double rebirth_eta = 0.4;
  double alpha_max = 0.9;
  double tau = 1.0;
  std::size_t n_eval = 100;
  Method method = Method::kFvd;
  TerminalMode terminal_mode = TerminalMode::kTemperatureSubsample;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  /// Throws ParameterError naming the offending field.
  void validate() const;
};

struct StepStats {
  int step = 0;
  double alpha_t = 0.0;
  double lambda = 0.0;
  std::size_t n_dead = 0;
  std::size_t n_revived = 0;
  std::size_t distinct_lineages = 0;
  double mean_reward = 0.0;
  double std_log_g = 0.0;
};

struct RunReport {
  std::vector<ResampleEvent> events;
  /// lambda before the first barrier, then after each barrier.
  std::vector<double> lambda_trace;
  Population final_population;
  std::vector<double> final_rewards;
  /// Per-particle selection log-weights used at termination.
  std::vector<double> selection_log_weights;
  std::vector<std::size_t> selected;
  std::map<std::string, double> metrics;
  std::vector<StepStats> per_step_stats;
};

/// Fleming-Viot birth-death at each barrier.
RunReport run_fvd(const RunConfig& cfg);

/// Same loop with multinomial resampling at the barriers.
RunReport run_smc_baseline(const RunConfig& cfg);

/// Dispatches on cfg.method.
RunReport run(const RunConfig& cfg);

/// K standard-normal draws keyed by (seed, particle index).
Population initial_population(std::size_t K, std::size_t dim,
                              std::uint64_t seed);

/// One deterministic DDIM step for every particle.
Population propagate_step(const Population& population, int t,
                          const Denoiser& denoiser, unsigned workers = 1);

/// Population std (ddof = 0).
double population_std(std::span<const double> values);

/// Fills report.metrics. Known names: mean_reward, diversity, mmd,
/// tv_oracle, final_lineages, mean_death_rate, mean_killed_rank,
/// frac_killed_rank_above_0.7. `oracle_lambda` defaults to the run's
/// initial lambda.
void evaluate_metrics(const RunConfig& cfg, RunReport& report,
                      const std::vector<std::string>& names,
                      std::optional<double> oracle_lambda = std::nullopt);

std::vector<std::string> all_metric_names();

}  // namespace fvd
