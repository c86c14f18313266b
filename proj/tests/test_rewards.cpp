#include <cmath>

#include <gtest/gtest.h>

#include "fvd/errors.hpp"
#include "fvd/rewards.hpp"
#include "fvd/rng.hpp"
#include "test_util.hpp"

namespace fvd {
namespace {

using test::scalar;
using test::vec;

GaussianMixture unit_gaussian(double mean) {
  return GaussianMixture({1.0}, {scalar(mean)}, {scalar(1.0)});
}

TEST(QuadraticReward, ZeroAtTargetAndKnownValue) {
  const RewardSpec r{QuadraticReward{vec({1.0, 2.0}), 2.0}};
  EXPECT_EQ(eval_reward(r, vec({1.0, 2.0})), 0.0);
  // -0.5 * (3^2 + 4^2) / 2^2
  EXPECT_DOUBLE_EQ(eval_reward(r, vec({4.0, 6.0})), -25.0 / 8.0);
}

TEST(QuadraticReward, Concave) {
  const RewardSpec r{QuadraticReward{vec({0.3, -0.1}), 0.7}};
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const State a = 3.0 * rng.normal_vector(2);
    const State b = 3.0 * rng.normal_vector(2);
    const double mid = eval_reward(r, 0.5 * (a + b));
    EXPECT_GE(mid + 1e-12, 0.5 * (eval_reward(r, a) + eval_reward(r, b)));
  }
}

TEST(ClassLogitReward, SingleClassIsZero) {
  const RewardSpec r{ClassLogitReward{{unit_gaussian(0.0)}, {1.0}, 0}};
  for (double x : {-5.0, 0.0, 3.3}) EXPECT_EQ(eval_reward(r, scalar(x)), 0.0);
}

TEST(ClassLogitReward, SymmetricPosterior) {
  const RewardSpec r{ClassLogitReward{{unit_gaussian(-1.0), unit_gaussian(1.0)}, {0.5, 0.5}, 1}};
  EXPECT_NEAR(eval_reward(r, scalar(0.0)), std::log(0.5), 1e-15);
  // log sigmoid(2x) for unit-variance classes at +-1.
  EXPECT_NEAR(eval_reward(r, scalar(0.8)), -std::log1p(std::exp(-1.6)), 1e-14);
}

TEST(ClassLogitReward, NeverPositiveAndFiniteFarOut) {
  const RewardSpec r{ClassLogitReward{{unit_gaussian(-1.0), unit_gaussian(1.0)}, {0.3, 0.7}, 0}};
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double v = eval_reward(r, scalar(10.0 * rng.normal()));
    EXPECT_LE(v, 0.0);
    EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_NEAR(eval_reward(r, scalar(200.0)), std::log(0.3 / 0.7) - 400.0, 1e-9);
}

TEST(TabulatedReward, InterpolatesAndClamps) {
  const RewardSpec r{TabulatedReward{{0.0, 1.0, 3.0}, {0.0, 2.0, -2.0}}};
  EXPECT_DOUBLE_EQ(eval_reward(r, scalar(0.5)), 1.0);
  EXPECT_DOUBLE_EQ(eval_reward(r, scalar(2.0)), 0.0);
  EXPECT_DOUBLE_EQ(eval_reward(r, scalar(-4.0)), 0.0);
  EXPECT_DOUBLE_EQ(eval_reward(r, scalar(9.0)), -2.0);
}

TEST(RewardSpec, Validation) {
  EXPECT_THROW(RewardSpec(QuadraticReward{scalar(0.0), 0.0}), ParameterError);
  EXPECT_THROW(RewardSpec(TabulatedReward{{0.0, 0.0}, {1.0, 2.0}}), ParameterError);
  EXPECT_THROW(RewardSpec(ClassLogitReward{{unit_gaussian(0.0)}, {1.0}, 1}), ParameterError);
  EXPECT_THROW(RewardSpec(ClassLogitReward{{unit_gaussian(0.0), unit_gaussian(1.0)}, {0.2, 0.2}, 0}),
               ParameterError);
}

TEST(EvalReward, RejectsBadInput) {
  const RewardSpec r{QuadraticReward{vec({0.0, 0.0}), 1.0}};
  EXPECT_THROW(eval_reward(r, vec({NAN, 0.0})), InputError);
  EXPECT_THROW(eval_reward(r, scalar(0.0)), InputError);
}

}  // namespace
}  // namespace fvd
