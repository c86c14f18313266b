#include <cmath>

#include <gtest/gtest.h>

#include "fvd/errors.hpp"
#include "fvd/oracle.hpp"
#include "test_util.hpp"

namespace fvd {
namespace {

using test::scalar;

RewardSpec quadratic(double target) { return RewardSpec(QuadraticReward{scalar(target), 1.0}); }

TEST(TiltedTarget, ZeroLambdaIsPrior) {
  const GaussianMixture prior({0.3, 0.7}, {scalar(-1.0), scalar(2.0)}, {scalar(0.5), scalar(1.0)});
  const auto target = oracle::tilted_target(prior, quadratic(0.0), 0.0, oracle::default_grid(prior));
  const double mean = 0.3 * -1.0 + 0.7 * 2.0;
  const double var = 0.3 * (0.5 + 1.0) + 0.7 * (1.0 + 4.0) - mean * mean;
  EXPECT_NEAR(target.mean()[0], mean, 1e-4);
  EXPECT_NEAR(target.variance()[0], var, 1e-4);
}

TEST(TiltedTarget, ConstantRewardIsIgnored) {
  const auto prior = GaussianMixture::standard_normal(1);
  const auto grid = oracle::default_grid(prior);
  const RewardSpec flat(TabulatedReward{{-1.0, 1.0}, {3.0, 3.0}});
  const auto a = oracle::tilted_target(prior, flat, 5.0, grid);
  const auto b = oracle::tilted_target(prior, quadratic(0.0), 0.0, grid);
  for (std::size_t i = 0; i < a.probs().size(); ++i) {
    ASSERT_NEAR(a.probs()[i], b.probs()[i], 1e-15);
  }
}

TEST(TiltedTarget, GaussianTiltMoments) {
  // N(0, 1) * exp(-x^2 / 2) is N(0, 1/2).
  const auto prior = GaussianMixture::standard_normal(1);
  const auto target =
      oracle::tilted_target(prior, quadratic(0.0), 1.0, oracle::default_grid(prior));
  EXPECT_NEAR(target.mean()[0], 0.0, 1e-4);
  EXPECT_NEAR(target.variance()[0], 0.5, 1e-4);
  double total = 0.0;
  for (double p : target.probs()) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(TiltedTarget, TwoDimensionalGaussianTilt) {
  const auto prior = GaussianMixture::standard_normal(2);
  const RewardSpec r(QuadraticReward{test::vec({1.0, -1.0}), 1.0});
  const auto target = oracle::tilted_target(prior, r, 1.0, oracle::default_grid(prior));
  // Precision 2, mean (0.5, -0.5).
  EXPECT_NEAR(target.mean()[0], 0.5, 1e-3);
  EXPECT_NEAR(target.mean()[1], -0.5, 1e-3);
  EXPECT_NEAR(target.variance()[0], 0.5, 1e-3);
}

TEST(TiltedTarget, NarrowGridIsRejected) {
  const auto prior = GaussianMixture::standard_normal(1);
  oracle::GridSpec grid{{oracle::Axis{-1.0, 1.0, 101}}};
  EXPECT_THROW(oracle::tilted_target(prior, quadratic(0.0), 1.0, grid), CoverageError);
}

TEST(Tv, QuantileSamplesAreClose) {
  const auto prior = GaussianMixture::standard_normal(1);
  const auto target =
      oracle::tilted_target(prior, quadratic(0.0), 0.0, oracle::default_grid(prior));
  std::vector<State> xs;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double p = (i + 0.5) / n;
    double lo = -10.0;
    double hi = 10.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    xs.push_back(scalar(0.5 * (lo + hi)));
  }
  EXPECT_LT(oracle::tv_distance(xs, target), 0.005);
}

TEST(Tv, DisjointSupportIsOne) {
  const auto prior = GaussianMixture::standard_normal(1);
  const auto target =
      oracle::tilted_target(prior, quadratic(0.0), 0.0, oracle::default_grid(prior));
  const std::vector<State> far(100, scalar(50.0));
  EXPECT_DOUBLE_EQ(oracle::tv_distance(far, target), 1.0);
}

TEST(Tv, PriorSamplesAndWeights) {
  const GaussianMixture prior({0.5, 0.5}, {scalar(-2.0), scalar(2.0)}, {scalar(0.25), scalar(0.25)});
  const auto target =
      oracle::tilted_target(prior, quadratic(0.0), 0.0, oracle::default_grid(prior));
  Rng rng(41);
  std::vector<State> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(sample_prior(prior, rng));
  EXPECT_LE(oracle::tv_distance(xs, target), 0.05);
  // Putting all weight on the left-mode samples leaves half the mass unmatched.
  std::vector<double> w(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) w[i] = xs[i][0] < 0.0 ? 1.0 : 0.0;
  EXPECT_NEAR(oracle::tv_distance(xs, target, 0, w), 0.5, 0.02);
}

TEST(Tv, GridSamplesMatchTarget) {
  const auto prior = GaussianMixture::standard_normal(2);
  const RewardSpec r(QuadraticReward{test::vec({1.0, 0.0}), 1.0});
  const auto target = oracle::tilted_target(prior, r, 2.0, oracle::default_grid(prior));
  Rng rng(42);
  const auto xs = oracle::sample_grid(target, 50000, rng);
  EXPECT_LT(oracle::tv_distance(xs, target), 0.05);
  double mean = 0.0;
  for (const auto& x : xs) mean += x[0];
  // Precision 3, mean 2/3 along the first axis.
  EXPECT_NEAR(mean / static_cast<double>(xs.size()), 2.0 / 3.0, 0.01);
}

TEST(Enumeration, StirlingCounts) {
  // K! / (K - c)! * S(K, c) counted by hand for small K.
  EXPECT_EQ(oracle::multinomial_distinct_counts(2), (std::vector<std::uint64_t>{0, 2, 2}));
  EXPECT_EQ(oracle::multinomial_distinct_counts(3), (std::vector<std::uint64_t>{0, 3, 18, 6}));
  EXPECT_EQ(oracle::multinomial_distinct_counts(4),
            (std::vector<std::uint64_t>{0, 4, 84, 144, 24}));
  EXPECT_EQ(oracle::multinomial_distinct_counts(5),
            (std::vector<std::uint64_t>{0, 5, 300, 1500, 1200, 120}));
  EXPECT_EQ(oracle::multinomial_distinct_counts(6),
            (std::vector<std::uint64_t>{0, 6, 930, 10800, 23400, 10800, 720}));
  EXPECT_THROW(oracle::multinomial_distinct_counts(1), ParameterError);
  EXPECT_THROW(oracle::multinomial_distinct_counts(7), ParameterError);
}

TEST(Enumeration, MeansAndVariances) {
  EXPECT_DOUBLE_EQ(oracle::expected_distinct_ancestors(2), 1.5);
  EXPECT_NEAR(oracle::expected_distinct_ancestors(3), 19.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(oracle::distinct_ancestors_variance(2), 0.25);
  for (std::size_t K = 2; K <= 6; ++K) {
    const auto m = oracle::distribution_moments(oracle::multinomial_distinct_distribution(K));
    EXPECT_NEAR(m.mean, oracle::expected_distinct_ancestors(K), 1e-12) << K;
    EXPECT_NEAR(m.variance, oracle::distinct_ancestors_variance(K), 1e-12) << K;
    EXPECT_NEAR(1.0 - m.mean / static_cast<double>(K),
                oracle::expected_zero_offspring_fraction(K), 1e-12);
  }
  EXPECT_NEAR(oracle::expected_zero_offspring_fraction(1000), 0.36769542477096373, 1e-12);
}

TEST(SurvivorLaw, Examples) {
  const auto a = oracle::fv_survivor_count_distribution(std::vector<double>{1.0, 0.5});
  EXPECT_EQ(a, (std::vector<double>{0.0, 0.5, 0.5}));
  const auto b = oracle::fv_survivor_count_distribution(std::vector<double>{0.5, 0.5});
  EXPECT_EQ(b, (std::vector<double>{0.25, 0.5, 0.25}));
  const std::vector<double> s{0.9, 0.2, 0.6, 1.0, 0.35};
  const auto m = oracle::distribution_moments(oracle::fv_survivor_count_distribution(s));
  double mean = 0.0;
  double var = 0.0;
  for (double x : s) {
    mean += x;
    var += x * (1.0 - x);
  }
  EXPECT_NEAR(m.mean, mean, 1e-12);
  EXPECT_NEAR(m.variance, var, 1e-12);
}

}  // namespace
}  // namespace fvd
