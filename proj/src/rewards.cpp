#include "fvd/rewards.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "fvd/errors.hpp"

namespace fvd {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const QuadraticReward& q) {
  if (q.target.size() == 0) throw ParameterError("quadratic target is empty");
  if (!q.target.allFinite()) throw ParameterError("quadratic target not finite");
  if (!(q.scale > 0.0)) {
    throw ParameterError(
        fmt::format("quadratic scale must be > 0 (got {})", q.scale));
  }
}

void validate(const ClassLogitReward& c) {
  if (c.classes.empty()) throw ParameterError("class_logit needs >= 1 class");
  if (c.class_priors.size() != c.classes.size()) {
    throw ParameterError("class_logit: one prior per class required");
  }
  if (c.target_class >= c.classes.size()) {
    throw ParameterError(fmt::format("class_logit: target class {} of {}",
                                     c.target_class, c.classes.size()));
  }
  double total = 0.0;
  for (double p : c.class_priors) {
    if (!(p > 0.0)) throw ParameterError("class_logit priors must be > 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError(
        fmt::format("class_logit priors sum to {}, expected 1", total));
  }
  for (const auto& m : c.classes) {
    if (m.dim() != c.classes[0].dim()) {
      throw ParameterError("class_logit: classes differ in dimension");
    }
  }
}

void validate(const TabulatedReward& t) {
  if (t.grid.size() < 2 || t.grid.size() != t.values.size()) {
    throw ParameterError(
        "tabulated reward needs >= 2 grid points and one value per point");
  }
  for (std::size_t i = 1; i < t.grid.size(); ++i) {
    if (!(t.grid[i] > t.grid[i - 1])) {
      throw ParameterError("tabulated grid must be strictly increasing");
    }
  }
  for (double v : t.values) {
    if (!std::isfinite(v)) throw ParameterError("tabulated value not finite");
  }
}

}  // namespace

RewardSpec::RewardSpec(Kind kind) : kind_(std::move(kind)) {
  std::visit([](const auto& k) { validate(k); }, kind_);
}

std::optional<std::size_t> RewardSpec::dim() const {
  return std::visit(
      Overloaded{
          [](const QuadraticReward& q) -> std::optional<std::size_t> {
            return static_cast<std::size_t>(q.target.size());
          },
          [](const ClassLogitReward& c) -> std::optional<std::size_t> {
            return c.classes[0].dim();
          },
          [](const TabulatedReward&) -> std::optional<std::size_t> {
            return 1;
          }},
      kind_);
}

double eval_reward(const RewardSpec& spec, const State& x) {
  if (!x.allFinite()) throw InputError("eval_reward: non-finite input");
  if (auto d = spec.dim(); d && static_cast<std::size_t>(x.size()) != *d) {
    throw InputError(fmt::format("eval_reward: x has dim {}, reward expects {}",
                                 x.size(), *d));
  }
  return std::visit(
      Overloaded{
          [&](const QuadraticReward& q) {
            return -0.5 * (x - q.target).squaredNorm() / (q.scale * q.scale);
          },
          [&](const ClassLogitReward& c) {
            std::vector<double> joint(c.classes.size());
            for (std::size_t k = 0; k < c.classes.size(); ++k) {
              joint[k] = std::log(c.class_priors[k]) + c.classes[k].log_density(x);
            }
            const double m = *std::max_element(joint.begin(), joint.end());
            double s = 0.0;
            for (double v : joint) s += std::exp(v - m);
            return std::min(0.0, joint[c.target_class] - (m + std::log(s)));
          },
          [&](const TabulatedReward& t) {
            const double v = x[0];
            if (v <= t.grid.front()) return t.values.front();
            if (v >= t.grid.back()) return t.values.back();
            const auto it = std::upper_bound(t.grid.begin(), t.grid.end(), v);
            const auto hi = static_cast<std::size_t>(it - t.grid.begin());
            const std::size_t lo = hi - 1;
            const double w = (v - t.grid[lo]) / (t.grid[hi] - t.grid[lo]);
            return (1.0 - w) * t.values[lo] + w * t.values[hi];
          }},
      spec.kind());
}

}  // namespace fvd
