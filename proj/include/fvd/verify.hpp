#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fvd/engine.hpp"

/// Self-checks of the sampler against exact laws and grid oracles. Each
/// check is deterministic for a fixed seed.
namespace fvd::verify {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Enumerated distinct-ancestor means against K(1 - (1 - 1/K)^K) for
/// K = 2..6, plus the exact integer identity behind it. measured is the
/// worst absolute error.
CheckResult check_distinct_ancestor_enumeration();

/// Fraction of ancestors left without offspring by uniform multinomial
/// resampling, averaged over trials, against (1 - 1/K)^K.
CheckResult check_collapse_fraction(std::size_t K = 1000,
                                    std::size_t trials = 200,
                                    std::uint64_t seed = 11);

/// Monte Carlo law of the FV survivor count over random survival vectors.
/// Returns three results: worst relative variance error (tolerance 5%),
/// worst standardized mean error, and the largest exact variance over K/4.
std::vector<CheckResult> check_survivor_count(std::size_t vectors = 20,
                                              std::size_t K = 100,
                                              std::size_t trials = 100000,
                                              std::uint64_t seed = 12);

/// Expected absorption is nondecreasing in lambda, stays under its bound,
/// and is exactly zero for a constant reward vector. measured counts the
/// violations.
CheckResult check_absorption_monotone(std::size_t vectors = 100,
                                      std::size_t grid = 50,
                                      std::uint64_t seed = 13);

/// One idealized FV step on N(0, 1) samples with G = exp(-x^2 / 2) against
/// the N(0, 1/2) grid target.
CheckResult check_single_fv_step(std::size_t K = 100000,
                                 std::uint64_t seed = 14);

/// Bimodal 1-D problem: prior 0.5 N(-2, 0.25) + 0.5 N(2, 0.25), reward
/// -0.5 (x - 2)^2, fixed lambda, 200 steps, 4 barriers, terminal
/// correction, K = 20000.
RunConfig bimodal_tilt_config(double lambda, std::uint64_t seed = 15);

/// TV between a bimodal_tilt_config run and the grid-oracle target.
CheckResult check_tilted_sampling(double lambda, double tolerance,
                                  std::size_t K = 20000,
                                  std::uint64_t seed = 15);

/// Controller driven by stationary uniform[-1, 0] rewards with one
/// barrier per round. measured is the mean absorption over the final
/// rounds; also fails if lambda ever leaves its clip bounds.
CheckResult check_controller_loop(std::size_t rounds = 200,
                                  std::size_t tail = 40, double alpha_star = 0.5,
                                  std::uint64_t seed = 16);

/// eps_prediction against a central finite-difference score of the
/// time-t marginal. measured is the worst relative error.
CheckResult check_score_consistency(std::size_t pairs = 100,
                                    std::uint64_t seed = 17);

/// Tweedie estimate against the closed-form single-Gaussian posterior mean.
CheckResult check_tweedie_posterior(std::size_t pairs = 100,
                                    std::uint64_t seed = 18);

std::vector<CheckResult> run_all();

void print_table(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace fvd::verify
