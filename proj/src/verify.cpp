#include "fvd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "fvd/controller.hpp"
#include "fvd/errors.hpp"
#include "fvd/oracle.hpp"
#include "fvd/potentials.hpp"
#include "fvd/resampling.hpp"

namespace fvd::verify {
namespace {

CheckResult make(std::string name, double measured, double expected,
                 double tolerance, bool passed, std::string detail = {}) {
  return {std::move(name), measured, expected, tolerance, passed, std::move(detail)};
}

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

CheckResult check_distinct_ancestor_enumeration() {
  double worst = 0.0;
  bool identity_ok = true;
  for (std::size_t K = 2; K <= 6; ++K) {
    const auto counts = oracle::multinomial_distinct_counts(K);
    // Sum of c * count(c) over all K^K outcomes is K^{K+1} - K (K-1)^K:
    // each ancestor is missed by exactly (K-1)^K outcomes.
    std::uint64_t weighted = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) weighted += c * counts[c];
    identity_ok &= weighted == ipow(K, K + 1) - K * ipow(K - 1, K);

    const auto probs = oracle::multinomial_distinct_distribution(K);
    const double mean = oracle::distribution_moments(probs).mean;
    worst = std::max(worst, std::abs(mean - oracle::expected_distinct_ancestors(K)));
  }
  constexpr double kTol = 1e-12;
  return make("distinct ancestors, exact K=2..6", worst, 0.0, kTol,
              identity_ok && worst <= kTol,
              identity_ok ? "integer identity holds" : "integer identity FAILED");
}

CheckResult check_collapse_fraction(std::size_t K, std::size_t trials,
                                    std::uint64_t seed) {
  const std::vector<double> uniform(K, 0.0);
  double total = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = make_stream(seed, StreamTag::kUser, trial);
    const auto ancestors = multinomial_resample(uniform, rng);
    std::vector<bool> hit(K, false);
    for (std::size_t a : ancestors) hit[a] = true;
    const auto missed = std::count(hit.begin(), hit.end(), false);
    total += static_cast<double>(missed) / static_cast<double>(K);
  }
  const double measured = total / static_cast<double>(trials);
  const double expected = oracle::expected_zero_offspring_fraction(K);
  constexpr double kTol = 0.01;
  return make(fmt::format("1/e collapse: eliminated fraction, K={}", K), measured,
              expected, kTol, std::abs(measured - expected) <= kTol);
}

std::vector<CheckResult> check_survivor_count(std::size_t vectors, std::size_t K,
                                              std::size_t trials,
                                              std::uint64_t seed) {
  double worst_var = 0.0;
  double worst_z = 0.0;
  double worst_exact_ratio = 0.0;
  for (std::size_t v = 0; v < vectors; ++v) {
    Rng gen = make_stream(seed, StreamTag::kUser, v);
    std::vector<double> surv(K);
    for (auto& s : surv) s = 1.0 - gen.uniform();  // (0, 1]
    double exp_mean = 0.0;
    double exp_var = 0.0;
    for (double s : surv) {
      exp_mean += s;
      exp_var += s * (1.0 - s);
    }

    Rng rng = make_stream(seed, StreamTag::kDeath, v);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const auto dead = fv_death_draw(surv, rng);
      const double n = static_cast<double>(K) -
                       static_cast<double>(std::count(dead.begin(), dead.end(), true));
      sum += n;
      sum_sq += n * n;
    }
    const double n_trials = static_cast<double>(trials);
    const double mean = sum / n_trials;
    const double var = (sum_sq - n_trials * mean * mean) / (n_trials - 1.0);
    worst_var = std::max(worst_var, std::abs(var - exp_var) / exp_var);
    worst_z = std::max(worst_z, std::abs(mean - exp_mean) / std::sqrt(exp_var / n_trials));

    const auto law = oracle::fv_survivor_count_distribution(surv);
    const double exact_var = oracle::distribution_moments(law).variance;
    worst_exact_ratio =
        std::max(worst_exact_ratio, exact_var / (static_cast<double>(K) / 4.0));
  }
  constexpr double kVarTol = 0.05;
  constexpr double kZTol = 5.0;
  return {
      make(fmt::format("survivor count variance, K={}", K), worst_var, 0.0, kVarTol,
           worst_var <= kVarTol, "worst relative error vs sum s(1-s)"),
      make(fmt::format("survivor count mean, K={}", K), worst_z, 0.0, kZTol,
           worst_z <= kZTol, "worst |mean - sum s| in standard errors"),
      make("exact survivor variance <= K/4", worst_exact_ratio, 1.0, 0.0,
           worst_exact_ratio <= 1.0, "worst exact variance / (K/4)"),
  };
}

CheckResult check_absorption_monotone(std::size_t vectors, std::size_t grid,
                                      std::uint64_t seed) {
  constexpr std::size_t kK = 64;
  constexpr double kLambdaMax = 10.0;
  const std::vector<int> barriers{160, 120, 80, 40};
  std::size_t violations = 0;
  for (std::size_t v = 0; v < vectors; ++v) {
    Rng rng = make_stream(seed, StreamTag::kUser, v);
    std::vector<double> rewards(kK);
    const double spread = 0.1 + 5.0 * rng.uniform();
    for (auto& r : rewards) r = -spread * rng.uniform();
    double prev = -1.0;
    for (std::size_t g = 0; g < grid; ++g) {
      const double lam = kLambdaMax * static_cast<double>(g) /
                         static_cast<double>(grid - 1);
      const PotentialConfig pc{lam, barriers};
      const double a = expected_absorption(pc, rewards);
      if (a < prev) ++violations;
      if (a > absorption_upper_bound(pc, rewards)) ++violations;
      prev = a;
    }
  }
  const std::vector<double> flat(kK, -0.3);
  for (std::size_t g = 0; g < grid; ++g) {
    const PotentialConfig pc{kLambdaMax * static_cast<double>(g) /
                                 static_cast<double>(grid - 1),
                             barriers};
    if (expected_absorption(pc, flat) != 0.0) ++violations;
  }
  return make("absorption monotone in lambda and bounded",
              static_cast<double>(violations), 0.0, 0.0, violations == 0,
              "count of violations");
}

CheckResult check_single_fv_step(std::size_t K, std::uint64_t seed) {
  const auto prior = GaussianMixture::standard_normal(1);
  const RewardSpec reward{QuadraticReward{State::Zero(1), 1.0}};
  Rng init = make_stream(seed, StreamTag::kInit);
  std::vector<State> xs(K);
  std::vector<double> rewards(K);
  for (std::size_t i = 0; i < K; ++i) {
    xs[i] = sample_prior(prior, init);
    rewards[i] = eval_reward(reward, xs[i]);
  }
  const PotentialConfig pc{1.0, {1}};
  Rng death_rng = make_stream(seed, StreamTag::kDeath);
  const auto dead = fv_death_draw(survival_probs(pc, rewards), death_rng);
  Rng donor_rng = make_stream(seed, StreamTag::kDonor);
  const auto donors = donor_assign(dead, donor_rng);
  std::vector<State> after = xs;
  for (const auto& [d, s] : donors) after[d] = xs[s];

  const auto target =
      oracle::tilted_target(prior, reward, 1.0, oracle::default_grid(prior));
  const double tv = oracle::tv_distance(after, target);
  constexpr double kTol = 0.02;
  return make("single FV step tilts toward G (TV)", tv, 0.0, kTol, tv <= kTol);
}

RunConfig bimodal_tilt_config(double lambda, std::uint64_t seed) {
  RunConfig cfg;
  cfg.K = 20000;
  cfg.prior = GaussianMixture({0.5, 0.5}, {State::Constant(1, -2.0), State::Constant(1, 2.0)},
                              {State::Constant(1, 0.25), State::Constant(1, 0.25)});
  cfg.reward = RewardSpec{QuadraticReward{State::Constant(1, 2.0), 1.0}};
  cfg.potential.lambda = lambda;
  cfg.potential.resample_steps = default_resample_steps(cfg.schedule.steps, 4);
  cfg.controller.enabled = false;
  cfg.terminal_mode = TerminalMode::kTerminalCorrectionReweight;
  cfg.seed = seed;
  return cfg;
}

CheckResult check_tilted_sampling(double lambda, double tolerance, std::size_t K,
                                  std::uint64_t seed) {
  RunConfig cfg = bimodal_tilt_config(lambda, seed);
  cfg.K = K;
  RunReport report = run(cfg);
  evaluate_metrics(cfg, report, {"tv_oracle"});
  const double tv = report.metrics.at("tv_oracle");
  return make(fmt::format("tilted target TV, lambda={}", lambda), tv, 0.0,
              tolerance, tv <= tolerance);
}

CheckResult check_controller_loop(std::size_t rounds, std::size_t tail,
                                  double alpha_star, std::uint64_t seed) {
  constexpr std::size_t kK = 1000;
  ControllerState st;
  st.alpha_star = alpha_star;
  st.validate();
  bool in_bounds = true;
  double tail_sum = 0.0;
  std::vector<double> rewards(kK);
  for (std::size_t round = 0; round < rounds; ++round) {
    Rng rng = make_stream(seed, StreamTag::kUser, round);
    for (auto& r : rewards) r = -rng.uniform();
    const PotentialConfig pc{st.lambda, {1}};
    Rng death_rng = make_stream(seed, StreamTag::kDeath, round);
    const auto dead = fv_death_draw(survival_probs(pc, rewards), death_rng);
    const double alpha = static_cast<double>(std::count(dead.begin(), dead.end(), true)) /
                         static_cast<double>(kK);
    std::vector<double> logg(kK);
    for (std::size_t i = 0; i < kK; ++i) logg[i] = log_potential(pc, rewards[i]);
    st = rm_update(st, alpha, population_std(logg));
    in_bounds &= st.lambda >= st.lambda_min && st.lambda <= st.lambda_max;
    if (round + tail >= rounds) tail_sum += alpha;
  }
  const double measured = tail_sum / static_cast<double>(tail);
  constexpr double kTol = 0.05;
  return make("controller tracks alpha*", measured, alpha_star, kTol,
              in_bounds && std::abs(measured - alpha_star) <= kTol,
              fmt::format("final lambda {:.4f}{}", st.lambda,
                          in_bounds ? "" : ", left clip bounds"));
}

CheckResult check_score_consistency(std::size_t pairs, std::uint64_t seed) {
  const auto sched = build_strided_schedule(1000, 200, 1e-4, 0.02);
  const GaussianMixture prior(
      {0.3, 0.7}, {(State(2) << -1.0, 0.5).finished(), (State(2) << 1.5, -1.0).finished()},
      {(State(2) << 0.3, 0.8).finished(), (State(2) << 0.5, 0.2).finished()});
  Rng rng = make_stream(seed, StreamTag::kUser);
  double worst = 0.0;
  constexpr double kH = 1e-5;
  for (std::size_t p = 0; p < pairs; ++p) {
    const int t = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(sched.steps())));
    const State x = 2.0 * rng.normal_vector(2);
    const auto marg = marginal_at_t(prior, t, sched);
    State fd(2);
    for (Eigen::Index d = 0; d < 2; ++d) {
      State up = x;
      State dn = x;
      up[d] += kH;
      dn[d] -= kH;
      fd[d] = (marg.log_density(up) - marg.log_density(dn)) / (2.0 * kH);
    }
    const State eps_fd = -std::sqrt(1.0 - sched.alpha_bar(t)) * fd;
    const State eps = eps_prediction(prior, x, t, sched);
    worst = std::max(worst, (eps - eps_fd).norm() / std::max(eps_fd.norm(), 1e-3));
  }
  constexpr double kTol = 1e-5;
  return make("noise prediction vs finite-difference score", worst, 0.0, kTol,
              worst <= kTol);
}

CheckResult check_tweedie_posterior(std::size_t pairs, std::uint64_t seed) {
  const auto sched = build_strided_schedule(1000, 200, 1e-4, 0.02);
  const State m = (State(2) << 0.7, -1.2).finished();
  const State v = (State(2) << 0.4, 2.5).finished();
  const GaussianMixture prior({1.0}, {m}, {v});
  Rng rng = make_stream(seed, StreamTag::kUser);
  double worst = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const int t = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(sched.steps())));
    const State x = 2.0 * rng.normal_vector(2);
    const double ab = sched.alpha_bar(t);
    const State closed =
        m.array() + v.array() * std::sqrt(ab) * (x - std::sqrt(ab) * m).array() /
                        (ab * v.array() + 1.0 - ab);
    const State est = tweedie_estimate(x, eps_prediction(prior, x, t, sched), t, sched);
    worst = std::max(worst, (est - closed).cwiseAbs().maxCoeff());
  }
  constexpr double kTol = 1e-8;
  return make("Tweedie vs Gaussian posterior mean", worst, 0.0, kTol, worst <= kTol);
}

std::vector<CheckResult> run_all() {
  std::vector<CheckResult> out;
  out.push_back(check_distinct_ancestor_enumeration());
  out.push_back(check_collapse_fraction());
  for (auto& r : check_survivor_count()) out.push_back(std::move(r));
  out.push_back(check_absorption_monotone());
  out.push_back(check_single_fv_step());
  out.push_back(check_tilted_sampling(1.0, 0.08));
  out.push_back(check_tilted_sampling(0.0, 0.05));
  out.push_back(check_controller_loop());
  out.push_back(check_score_consistency());
  out.push_back(check_tweedie_posterior());
  return out;
}

void print_table(std::ostream& os, const std::vector<CheckResult>& results) {
  fmt::print(os, "{:<48} {:>14} {:>14} {:>10}  {}\n", "check", "measured",
             "expected", "tolerance", "result");
  for (const auto& r : results) {
    fmt::print(os, "{:<48} {:>14.6g} {:>14.6g} {:>10.3g}  {}{}\n", r.name,
               r.measured, r.expected, r.tolerance, r.passed ? "PASS" : "FAIL",
               r.detail.empty() ? "" : "  (" + r.detail + ")");
  }
  const auto failed = std::count_if(results.begin(), results.end(),
                                    [](const CheckResult& r) { return !r.passed; });
  fmt::print(os, "{} of {} checks passed\n", results.size() - failed, results.size());
}

}  // namespace fvd::verify
