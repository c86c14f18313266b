#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace fvd {

/// A point in sample space (x_t, x_0 and Tweedie estimates alike).
using State = Eigen::VectorXd;

/// Discrete variance schedule. Steps are indexed t = 1..T for beta and
/// t = 0..T for alpha_bar, with alpha_bar(0) == 1 exactly.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas);

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta(int t) const;
  double alpha_bar(int t) const;
  std::span<const double> betas() const { return beta_; }
  std::span<const double> alpha_bars() const { return alpha_bar_; }

 private:
  std::vector<double> beta_;       // beta_[t - 1]
  std::vector<double> alpha_bar_;  // alpha_bar_[t]
};

/// Linear beta from beta_start (t = 1) to beta_end (t = T).
NoiseSchedule build_linear_schedule(int steps, double beta_start,
                                    double beta_end);

/// A `steps`-step sampling schedule taken at evenly strided positions of a
/// `train_steps`-step linear schedule. The effective per-step beta is
/// 1 - alpha_bar(j) / alpha_bar(j - 1), so all DDIM formulas apply
/// unchanged. With train_steps == steps this is build_linear_schedule.
NoiseSchedule build_strided_schedule(int train_steps, int steps,
                                     double beta_start, double beta_end);

/// Posterior-mean reconstruction of x_0 from x_t and predicted noise.
/// Accepts 0 <= t <= T (t = 0 is the identity).
State tweedie_estimate(const State& x_t, const State& eps, int t,
                       const NoiseSchedule& sched);

/// sigma_t = eta * sqrt((1 - abar_{t-1}) beta_t / (1 - abar_t)).
double ddim_sigma(int t, double eta, const NoiseSchedule& sched);

/// One DDIM transition x_t -> x_{t-1}. `noise` is a standard-normal draw
/// supplied by the caller; it is ignored when eta == 0.
/// Throws ScheduleError if 1 - abar_{t-1} - sigma_t^2 < 0.
State ddim_step(const State& x_t, const State& eps, int t, double eta,
                const State& noise, const NoiseSchedule& sched);

bool all_finite(const State& x);

}  // namespace fvd
