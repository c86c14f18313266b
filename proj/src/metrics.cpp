#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

#include "fvd/diagnostics.hpp"
#include "fvd/engine.hpp"
#include "fvd/errors.hpp"
#include "fvd/oracle.hpp"
#include "fvd/rng.hpp"

namespace fvd {
namespace {

constexpr std::size_t kMaxMetricSamples = 2000;
constexpr double kRankThreshold = 0.7;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Selection probabilities normalised from log-weights.
std::vector<double> softmax(std::span<const double> logw) {
  const double m = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    w[i] = std::exp(logw[i] - m);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

}  // namespace

std::vector<std::string> all_metric_names() {
  return {"mean_reward",     "diversity",        "mmd",
          "tv_oracle",       "final_lineages",   "mean_death_rate",
          "mean_killed_rank", "frac_killed_rank_above_0.7"};
}

void evaluate_metrics(const RunConfig& cfg, RunReport& report,
                      const std::vector<std::string>& names,
                      std::optional<double> oracle_lambda) {
  const auto known = all_metric_names();
  for (const auto& n : names) {
    if (std::find(known.begin(), known.end(), n) == known.end()) {
      throw ParameterError(fmt::format("unknown metric '{}'", n));
    }
  }
  auto wanted = [&](const char* n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  if (report.selected.empty()) {
    throw ParameterError("evaluate_metrics: report has no selected samples");
  }

  std::vector<State> chosen;
  double reward_sum = 0.0;
  for (std::size_t idx : report.selected) {
    reward_sum += report.final_rewards[idx];
    if (chosen.size() < kMaxMetricSamples) {
      chosen.push_back(report.final_population[idx].x);
    }
  }

  if (wanted("mean_reward")) {
    report.metrics["mean_reward"] =
        reward_sum / static_cast<double>(report.selected.size());
  }
  if (wanted("diversity")) {
    report.metrics["diversity"] =
        chosen.size() >= 2 ? pairwise_diversity(chosen) : kNaN;
  }

  const bool need_oracle = wanted("mmd") || wanted("tv_oracle");
  if (need_oracle) {
    if (cfg.prior.dim() > 2) {
      if (wanted("mmd")) report.metrics["mmd"] = kNaN;
      if (wanted("tv_oracle")) report.metrics["tv_oracle"] = kNaN;
    } else {
      const double lam = oracle_lambda.value_or(cfg.potential.lambda);
      const auto target = oracle::tilted_target(
          cfg.prior, cfg.reward, lam, oracle::default_grid(cfg.prior));
      if (wanted("mmd")) {
        Rng ref_rng = make_stream(cfg.seed, StreamTag::kReference);
        const auto reference = oracle::sample_grid(target, chosen.size(), ref_rng);
        report.metrics["mmd"] = chosen.size() >= 2 ? mmd_rbf(chosen, reference) : kNaN;
      }
      if (wanted("tv_oracle")) {
        // The whole final population weighted by its selection probabilities
        // is the expectation of the selected set, with far less binning noise.
        std::vector<State> states;
        states.reserve(report.final_population.size());
        for (const auto& p : report.final_population) states.push_back(p.x);
        const auto w = softmax(report.selection_log_weights);
        report.metrics["tv_oracle"] = oracle::tv_distance(states, target, 0, w);
      }
    }
  }

  if (wanted("final_lineages") || wanted("mean_death_rate") ||
      wanted("mean_killed_rank") || wanted("frac_killed_rank_above_0.7")) {
    const double thresholds[] = {kRankThreshold};
    const DeathStats ds = death_stats(
        report.events, distinct_lineages(report.final_population), thresholds);
    if (wanted("final_lineages")) {
      report.metrics["final_lineages"] =
          static_cast<double>(ds.final_distinct_lineages);
    }
    if (wanted("mean_death_rate")) report.metrics["mean_death_rate"] = ds.mean_death_rate;
    if (wanted("mean_killed_rank")) report.metrics["mean_killed_rank"] = ds.mean_killed_rank;
    if (wanted("frac_killed_rank_above_0.7")) {
      const auto it = ds.frac_killed_rank_above.find(kRankThreshold);
      report.metrics["frac_killed_rank_above_0.7"] =
          it == ds.frac_killed_rank_above.end() ? kNaN : it->second;
    }
  }
}

}  // namespace fvd
