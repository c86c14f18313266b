#include <cmath>

#include <gtest/gtest.h>

#include "fvd/diffusion.hpp"
#include "fvd/errors.hpp"
#include "test_util.hpp"

namespace fvd {
namespace {

using test::scalar;

TEST(LinearSchedule, SingleStep) {
  const auto s = build_linear_schedule(1, 0.5, 0.5);
  EXPECT_EQ(s.steps(), 1);
  EXPECT_DOUBLE_EQ(s.beta(1), 0.5);
  EXPECT_EQ(s.alpha_bar(0), 1.0);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.5);
}

TEST(LinearSchedule, ConstantBetaProduct) {
  const auto s = build_linear_schedule(2, 0.1, 0.1);
  EXPECT_EQ(s.alpha_bar(0), 1.0);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.9);
  EXPECT_DOUBLE_EQ(s.alpha_bar(2), 0.81);
}

TEST(LinearSchedule, ThousandStepsGolden) {
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  for (int t = 1; t <= 1000; ++t) ASSERT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
  // Independent 50-digit product of (1 - beta_t).
  EXPECT_NEAR(s.alpha_bar(1000), 4.0358297653756833e-05, 1e-12 * 4.04e-5);
  EXPECT_LT(s.alpha_bar(1000), 0.01);
  EXPECT_DOUBLE_EQ(s.beta(1), 1e-4);
  EXPECT_DOUBLE_EQ(s.beta(1000), 0.02);
}

TEST(LinearSchedule, RejectsBadBounds) {
  EXPECT_THROW(build_linear_schedule(0, 0.1, 0.2), ParameterError);
  EXPECT_THROW(build_linear_schedule(10, 0.0, 0.2), ParameterError);
  EXPECT_THROW(build_linear_schedule(10, 0.3, 0.2), ParameterError);
  EXPECT_THROW(build_linear_schedule(10, 0.1, 1.0), ParameterError);
}

TEST(StridedSchedule, MatchesTrainingScheduleAtStridePoints) {
  const auto full = build_linear_schedule(1000, 1e-4, 0.02);
  const auto s = build_strided_schedule(1000, 200, 1e-4, 0.02);
  EXPECT_EQ(s.steps(), 200);
  for (int j = 0; j <= 200; ++j) {
    EXPECT_NEAR(s.alpha_bar(j), full.alpha_bar(5 * j), 1e-14) << j;
  }
  const auto same = build_strided_schedule(50, 50, 1e-4, 0.02);
  const auto lin = build_linear_schedule(50, 1e-4, 0.02);
  for (int t = 1; t <= 50; ++t) EXPECT_NEAR(same.beta(t), lin.beta(t), 1e-15);
}

TEST(Tweedie, IdentityAtZeroNoise) {
  const auto s = build_linear_schedule(3, 0.1, 0.3);
  const State x = test::vec({0.3, -1.2});
  EXPECT_EQ(tweedie_estimate(x, test::vec({5.0, 7.0}), 0, s), x);
}

TEST(Tweedie, InvertsForwardDecomposition) {
  const auto s = build_linear_schedule(10, 0.01, 0.2);
  const State x0 = test::vec({1.5, -0.25, 3.0});
  const State e = test::vec({-0.7, 0.2, 1.1});
  for (int t = 1; t <= 10; ++t) {
    const double ab = s.alpha_bar(t);
    const State xt = std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * e;
    EXPECT_LT((tweedie_estimate(xt, e, t, s) - x0).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Tweedie, HandValueAtQuarterAlphaBar) {
  const auto s = build_linear_schedule(1, 0.75, 0.75);  // alpha_bar(1) = 0.25
  EXPECT_NEAR(tweedie_estimate(scalar(1.0), scalar(1.0), 1, s)[0],
              0.26794919243112270647, 1e-15);
}

TEST(DdimSigma, Examples) {
  const auto s = build_linear_schedule(2, 0.1, 0.1);
  EXPECT_EQ(ddim_sigma(2, 0.0, s), 0.0);
  EXPECT_EQ(ddim_sigma(1, 0.0, s), 0.0);
  EXPECT_NEAR(ddim_sigma(2, 1.0, s), 0.22941573387056176591, 1e-15);
  EXPECT_DOUBLE_EQ(ddim_sigma(2, 0.5, s), 0.5 * ddim_sigma(2, 1.0, s));
  EXPECT_THROW(ddim_sigma(0, 0.5, s), ParameterError);
  EXPECT_THROW(ddim_sigma(2, -0.1, s), ParameterError);
}

TEST(DdimSigma, NondecreasingInEta) {
  const auto s = build_linear_schedule(20, 1e-3, 0.05);
  for (int t = 1; t <= 20; ++t) {
    double prev = 0.0;
    for (double eta = 0.0; eta <= 1.0; eta += 0.05) {
      const double v = ddim_sigma(t, eta, s);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(DdimStep, DeterministicIgnoresNoise) {
  const auto s = build_linear_schedule(5, 0.05, 0.2);
  const State x = test::vec({0.4, -0.9});
  const State eps = test::vec({0.1, 0.3});
  const State a = ddim_step(x, eps, 3, 0.0, test::vec({10.0, -10.0}), s);
  const State b = ddim_step(x, eps, 3, 0.0, test::vec({-3.0, 2.0}), s);
  const State c = ddim_step(x, eps, 3, 0.0, State(), s);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(DdimStep, LastStepLandsOnTweedie) {
  const auto s = build_linear_schedule(5, 0.05, 0.2);
  const State x = test::vec({0.4, -0.9});
  const State eps = test::vec({0.1, 0.3});
  EXPECT_EQ(ddim_step(x, eps, 1, 0.0, State(), s), tweedie_estimate(x, eps, 1, s));
}

TEST(DdimStep, HandEvaluationTwoStepSchedule) {
  const auto s = build_linear_schedule(2, 0.1, 0.1);
  // 50-digit evaluation of sqrt(0.9) x0_hat + sqrt(0.1) * 0.5.
  EXPECT_NEAR(ddim_step(scalar(1.0), scalar(0.5), 2, 0.0, State(), s)[0],
              0.98247229052970838113, 1e-15);
}

TEST(DdimStep, StochasticAddsScaledNoise) {
  const auto s = build_linear_schedule(2, 0.1, 0.1);
  const State x = scalar(1.0);
  const State eps = scalar(0.5);
  const double sig = ddim_sigma(2, 0.8, s);
  const State with = ddim_step(x, eps, 2, 0.8, scalar(1.0), s);
  const State without = ddim_step(x, eps, 2, 0.8, scalar(0.0), s);
  EXPECT_NEAR(with[0] - without[0], sig, 1e-15);
}

TEST(DdimStep, DetectsIncompatibleEta) {
  const auto s = build_linear_schedule(2, 0.5, 0.5);
  // sigma^2 = eta^2 (1 - abar_1) beta_2 / (1 - abar_2) exceeds 1 - abar_1 for large eta.
  EXPECT_THROW(ddim_step(scalar(1.0), scalar(0.0), 2, 5.0, scalar(0.0), s), ScheduleError);
}

TEST(DdimStep, BitIdenticalRepeats) {
  const auto s = build_strided_schedule(1000, 200, 1e-4, 0.02);
  const State x = test::vec({0.123456789, -2.5});
  const State eps = test::vec({0.987, 0.001});
  for (int t = 1; t <= 200; t += 17) {
    EXPECT_EQ(ddim_step(x, eps, t, 0.0, State(), s), ddim_step(x, eps, t, 0.0, State(), s));
  }
}

}  // namespace
}  // namespace fvd
