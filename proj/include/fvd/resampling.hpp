#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "fvd/diffusion.hpp"
#include "fvd/priors.hpp"
#include "fvd/rng.hpp"

namespace fvd {

using DeathMask = std::vector<bool>;
/// dead index -> donor index, ordered by dead index.
using DonorMap = std::map<std::size_t, std::size_t>;

/// One resampling barrier.
struct ResampleEvent {
  int step = 0;
  DeathMask death_mask;  // after the cap
  std::vector<std::size_t> revived;
  DonorMap donors;
  double alpha_t = 0.0;
  std::vector<double> killed_ranks;
  double lambda_used = 0.0;
  /// Proxy rewards and log potentials seen at this barrier, per slot.
  std::vector<double> rewards;
  std::vector<double> log_potentials;
};

/// d_i = 1[u_i > s_i] with u_i ~ U(0, 1), drawn in index order.
DeathMask fv_death_draw(std::span<const double> surv, Rng& rng);

/// floor(alpha_max * K), robust to alpha_max * K landing just below an
/// integer.
std::size_t death_cap(std::size_t K, double alpha_max);

struct CapResult {
  DeathMask death_mask;
  std::vector<std::size_t> revived;  // in revival order
};

/// Revives the highest-potential dead particles (lowest index on ties)
/// until at most floor(alpha_max * K) remain dead.
CapResult enforce_cap(DeathMask death_mask,
                      std::span<const double> log_potentials, double alpha_max);

/// Each dead slot independently picks a uniform survivor. Draws are
/// consumed in increasing dead-index order.
DonorMap donor_assign(const DeathMask& death_mask, Rng& rng);

/// DDIM step with rebirth_eta from the donor's x_t.
State rebirth(const State& donor_x_t, const Denoiser& denoiser, int t,
              double rebirth_eta, Rng& rng);

/// n i.i.d. categorical draws with probabilities proportional to
/// exp(log_weights). Throws DegenerateWeightsError when no weight is
/// finite.
std::vector<std::size_t> categorical_draws(std::span<const double> log_weights,
                                           std::size_t n, Rng& rng);

/// K ancestors drawn i.i.d. from the normalised weights.
std::vector<std::size_t> multinomial_resample(
    std::span<const double> log_weights, Rng& rng);

/// Maps multinomial ancestors onto slots so that every selected ancestor
/// keeps its own slot once; ancestors with no offspring are the dead
/// slots, and extra copies (in draw order) fill them in increasing index.
struct SlotAssignment {
  DeathMask death_mask;
  DonorMap donors;
};
SlotAssignment assign_offspring_slots(std::span<const std::size_t> ancestors);

/// n_eval draws with probabilities proportional to exp(r_i / tau).
std::vector<std::size_t> final_subsample(std::span<const double> rewards,
                                         double tau, std::size_t n_eval,
                                         Rng& rng);

}  // namespace fvd
