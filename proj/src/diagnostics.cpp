#include "fvd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <Eigen/Core>
#include <fmt/core.h>

#include "fvd/errors.hpp"

namespace fvd {
namespace {

constexpr std::size_t kHeuristicPoints = 1000;

void check_samples(const std::vector<State>& a, const std::vector<State>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ParameterError("MMD needs at least two samples per set");
  }
  const auto d = a[0].size();
  for (const auto* set : {&a, &b}) {
    for (const auto& x : *set) {
      if (x.size() != d) throw InputError("MMD samples differ in dimension");
    }
  }
}

double resolve_bandwidth(const std::vector<State>& a,
                         const std::vector<State>& b,
                         std::optional<double> bandwidth) {
  const double h = bandwidth ? *bandwidth : median_heuristic_bandwidth(a, b);
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ParameterError(fmt::format("MMD bandwidth must be > 0 (got {})", h));
  }
  return h;
}

// Pooled Gram matrix, a's points first.
Eigen::MatrixXd pooled_gram(const std::vector<State>& a,
                            const std::vector<State>& b, double h) {
  const std::size_t n = a.size() + b.size();
  auto at = [&](std::size_t i) -> const State& {
    return i < a.size() ? a[i] : b[i - a.size()];
  };
  const double inv = 1.0 / (2.0 * h * h);
  Eigen::MatrixXd k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    k(ii, ii) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double v = std::exp(-(at(i) - at(j)).squaredNorm() * inv);
      k(ii, jj) = v;
      k(jj, ii) = v;
    }
  }
  return k;
}

// Unbiased MMD^2 for a split of the pooled indices.
double unbiased_from_gram(const Eigen::MatrixXd& k,
                          const std::vector<std::size_t>& first,
                          const std::vector<std::size_t>& second) {
  const double m = static_cast<double>(first.size());
  const double n = static_cast<double>(second.size());
  double kxx = 0.0;
  double kyy = 0.0;
  double kxy = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t j = i + 1; j < first.size(); ++j) {
      kxx += k(static_cast<Eigen::Index>(first[i]),
               static_cast<Eigen::Index>(first[j]));
    }
    for (std::size_t j : second) {
      kxy += k(static_cast<Eigen::Index>(first[i]),
               static_cast<Eigen::Index>(j));
    }
  }
  for (std::size_t i = 0; i < second.size(); ++i) {
    for (std::size_t j = i + 1; j < second.size(); ++j) {
      kyy += k(static_cast<Eigen::Index>(second[i]),
               static_cast<Eigen::Index>(second[j]));
    }
  }
  return 2.0 * kxx / (m * (m - 1.0)) + 2.0 * kyy / (n * (n - 1.0)) -
         2.0 * kxy / (m * n);
}

}  // namespace

std::size_t distinct_lineages(const Population& population) {
  std::unordered_set<std::size_t> ids;
  for (const auto& p : population) ids.insert(p.lineage_id);
  return ids.size();
}

std::vector<double> normalized_ranks(std::span<const double> rewards) {
  const std::size_t K = rewards.size();
  if (K < 2) throw ParameterError("reward ranks need K >= 2");
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rewards[a] < rewards[b];
  });
  std::vector<double> ranks(K);
  const double denom = static_cast<double>(K - 1);
  std::size_t i = 0;
  while (i < K) {
    std::size_t j = i;
    while (j + 1 < K && rewards[order[j + 1]] == rewards[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid / denom;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> killed_reward_ranks(std::span<const double> rewards,
                                        const DeathMask& final_death_mask) {
  if (final_death_mask.size() != rewards.size()) {
    throw ParameterError("killed_reward_ranks: mask and rewards differ in size");
  }
  const auto ranks = normalized_ranks(rewards);
  std::vector<double> out;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (final_death_mask[i]) out.push_back(ranks[i]);
  }
  return out;
}

DeathStats death_stats(const std::vector<ResampleEvent>& events,
                       std::size_t final_lineages,
                       std::span<const double> thresholds) {
  DeathStats s;
  s.final_distinct_lineages = final_lineages;
  std::vector<double> all_ranks;
  double rate = 0.0;
  for (const auto& e : events) {
    rate += e.alpha_t;
    all_ranks.insert(all_ranks.end(), e.killed_ranks.begin(),
                     e.killed_ranks.end());
  }
  s.mean_death_rate = events.empty() ? 0.0 : rate / static_cast<double>(events.size());
  if (all_ranks.empty()) {
    s.mean_killed_rank = std::nan("");
  } else {
    s.mean_killed_rank = std::accumulate(all_ranks.begin(), all_ranks.end(), 0.0) /
                         static_cast<double>(all_ranks.size());
  }
  for (double th : thresholds) {
    const auto above = std::count_if(all_ranks.begin(), all_ranks.end(),
                                     [th](double r) { return r > th; });
    s.frac_killed_rank_above[th] =
        all_ranks.empty() ? 0.0
                          : static_cast<double>(above) /
                                static_cast<double>(all_ranks.size());
  }
  return s;
}

double median_heuristic_bandwidth(const std::vector<State>& a,
                                  const std::vector<State>& b) {
  std::vector<const State*> pooled;
  for (std::size_t i = 0; i < std::min(a.size(), kHeuristicPoints); ++i) {
    pooled.push_back(&a[i]);
  }
  for (std::size_t i = 0; i < std::min(b.size(), kHeuristicPoints); ++i) {
    pooled.push_back(&b[i]);
  }
  std::vector<double> d;
  d.reserve(pooled.size() * (pooled.size() - 1) / 2);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    for (std::size_t j = i + 1; j < pooled.size(); ++j) {
      d.push_back((*pooled[i] - *pooled[j]).norm());
    }
  }
  if (d.empty()) throw ParameterError("median heuristic needs two points");
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(d.begin(), mid));
}

double mmd_rbf(const std::vector<State>& a, const std::vector<State>& b,
               std::optional<double> bandwidth) {
  check_samples(a, b);
  const double h = resolve_bandwidth(a, b, bandwidth);
  const double inv = 1.0 / (2.0 * h * h);
  auto k = [inv](const State& x, const State& y) {
    return std::exp(-(x - y).squaredNorm() * inv);
  };
  const double m = static_cast<double>(a.size());
  const double n = static_cast<double>(b.size());
  double kxx = 0.0;
  double kyy = 0.0;
  double kxy = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) kxx += k(a[i], a[j]);
    for (const auto& y : b) kxy += k(a[i], y);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i + 1; j < b.size(); ++j) kyy += k(b[i], b[j]);
  }
  return 2.0 * kxx / (m * (m - 1.0)) + 2.0 * kyy / (n * (n - 1.0)) -
         2.0 * kxy / (m * n);
}

double mmd_rbf_biased(const std::vector<State>& a, const std::vector<State>& b,
                      std::optional<double> bandwidth) {
  check_samples(a, b);
  const double h = resolve_bandwidth(a, b, bandwidth);
  const double inv = 1.0 / (2.0 * h * h);
  auto mean_k = [inv](const std::vector<State>& x, const std::vector<State>& y) {
    double s = 0.0;
    for (const auto& p : x) {
      for (const auto& q : y) s += std::exp(-(p - q).squaredNorm() * inv);
    }
    return s / static_cast<double>(x.size() * y.size());
  };
  return mean_k(a, a) + mean_k(b, b) - 2.0 * mean_k(a, b);
}

MmdPermutationTest mmd_permutation_test(const std::vector<State>& a,
                                        const std::vector<State>& b,
                                        std::size_t permutations, Rng& rng,
                                        std::optional<double> bandwidth) {
  check_samples(a, b);
  if (permutations < 2) throw ParameterError("need >= 2 permutations");
  const double h = resolve_bandwidth(a, b, bandwidth);
  const Eigen::MatrixXd gram = pooled_gram(a, b, h);

  std::vector<std::size_t> idx(a.size() + b.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto split = [&](std::vector<std::size_t>& first,
                   std::vector<std::size_t>& second) {
    first.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(a.size()));
    second.assign(idx.begin() + static_cast<std::ptrdiff_t>(a.size()), idx.end());
  };
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  split(first, second);

  MmdPermutationTest out;
  out.statistic = unbiased_from_gram(gram, first, second);
  std::vector<double> null(permutations);
  std::size_t exceed = 0;
  for (auto& v : null) {
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    split(first, second);
    v = unbiased_from_gram(gram, first, second);
    if (v >= out.statistic) ++exceed;
  }
  const double np = static_cast<double>(permutations);
  out.null_mean = std::accumulate(null.begin(), null.end(), 0.0) / np;
  double ss = 0.0;
  for (double v : null) ss += (v - out.null_mean) * (v - out.null_mean);
  out.null_std = std::sqrt(ss / (np - 1.0));
  out.p_value = (1.0 + static_cast<double>(exceed)) / (np + 1.0);
  return out;
}

double pairwise_diversity(const std::vector<State>& samples) {
  if (samples.size() < 2) {
    throw ParameterError("pairwise_diversity needs at least two samples");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      total += (samples[i] - samples[j]).norm();
    }
  }
  const double n = static_cast<double>(samples.size());
  return total / (0.5 * n * (n - 1.0));
}

}  // namespace fvd
