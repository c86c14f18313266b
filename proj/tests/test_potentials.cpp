#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "fvd/errors.hpp"
#include "fvd/potentials.hpp"
#include "fvd/rng.hpp"

namespace fvd {
namespace {

PotentialConfig cfg(double lambda, std::size_t n) {
  return {lambda, default_resample_steps(200, n)};
}

TEST(ResampleSteps, DefaultEvenSpacing) {
  EXPECT_EQ(default_resample_steps(200, 4), (std::vector<int>{160, 120, 80, 40}));
  EXPECT_EQ(default_resample_steps(200, 1), (std::vector<int>{100}));
  EXPECT_TRUE(default_resample_steps(200, 0).empty());
  EXPECT_THROW(default_resample_steps(3, 5), ParameterError);
}

TEST(ResampleSteps, NormalizeSortsAndValidates) {
  EXPECT_EQ(normalize_resample_steps({5, 90, 40}, 100), (std::vector<int>{90, 40, 5}));
  EXPECT_THROW(normalize_resample_steps({0, 5}, 100), ParameterError);
  EXPECT_THROW(normalize_resample_steps({101}, 100), ParameterError);
  EXPECT_THROW(normalize_resample_steps({5, 5}, 100), ParameterError);
}

TEST(LogPotential, Examples) {
  EXPECT_EQ(log_potential(cfg(0.0, 4), -3.7), 0.0);
  EXPECT_DOUBLE_EQ(log_potential(cfg(4.0, 4), -1.0), -1.0);
  EXPECT_EQ(log_potential(cfg(2.5, 4), 0.0), 0.0);
  EXPECT_THROW(log_potential(PotentialConfig{1.0, {}}, 1.0), ParameterError);
}

TEST(SurvivalProbs, Examples) {
  const std::vector<double> equal(5, -0.3);
  for (double s : survival_probs(cfg(3.0, 4), equal)) EXPECT_EQ(s, 1.0);
  const std::vector<double> mixed{-1.0, 0.0, -5.0};
  for (double s : survival_probs(cfg(0.0, 4), mixed)) EXPECT_EQ(s, 1.0);
  const auto s = survival_probs(cfg(4.0, 4), std::vector<double>{0.0, -std::log(2.0), -std::log(4.0)});
  EXPECT_EQ(s[0], 1.0);
  EXPECT_NEAR(s[1], 0.5, 1e-15);
  EXPECT_NEAR(s[2], 0.25, 1e-15);
  EXPECT_THROW(survival_probs(cfg(1.0, 4), std::vector<double>{}), ParameterError);
}

TEST(SurvivalProbs, ShiftInvariantAndMaxIsOne) {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> r(20);
    for (auto& x : r) x = -3.0 * rng.uniform();
    std::vector<double> shifted = r;
    for (auto& x : shifted) x += 0.5;
    const auto a = survival_probs(cfg(2.0, 4), r);
    const auto b = survival_probs(cfg(2.0, 4), shifted);
    double mx = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-14);
      EXPECT_GT(a[i], 0.0);
      mx = std::max(mx, a[i]);
    }
    EXPECT_EQ(mx, 1.0);
  }
}

TEST(SurvivalProbs, TiedMaximaAllSurvive) {
  const auto s = survival_probs(cfg(8.0, 4), std::vector<double>{-1.0, 0.25, 0.25, -7.0});
  EXPECT_EQ(s[1], 1.0);
  EXPECT_EQ(s[2], 1.0);
}

TEST(ExpectedAbsorption, Examples) {
  EXPECT_EQ(expected_absorption(cfg(9.0, 4), std::vector<double>(7, 1.5)), 0.0);
  EXPECT_NEAR(expected_absorption(cfg(4.0, 4), std::vector<double>{0.0, -std::log(2.0)}), 0.25,
              1e-15);
  const std::vector<double> r{0.0, -0.3, -1.2, -2.0};
  EXPECT_LT(expected_absorption(cfg(1.0, 4), r), expected_absorption(cfg(1.5, 4), r));
}

TEST(ExpectedAbsorption, MonotoneAndBounded) {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> r(30);
    for (auto& x : r) x = -4.0 * rng.uniform();
    double prev = -1.0;
    for (int g = 0; g < 50; ++g) {
      const auto c = cfg(0.2 * g, 4);
      const double a = expected_absorption(c, r);
      EXPECT_GE(a, prev);
      EXPECT_LE(a, absorption_upper_bound(c, r));
      EXPECT_LT(a, 1.0);
      prev = a;
    }
  }
}

TEST(TerminalCorrection, Examples) {
  EXPECT_EQ(terminal_log_correction(0.5, 0.5, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(terminal_log_correction(0.3, 0.5, 1.0), 0.2);
}

// Brute force over the 2049 doubles centred on the naive difference.
struct Neighbourhood {
  bool exact_exists = false;
  double best_err = INFINITY;
};

Neighbourhood scan(double acc, double target) {
  Neighbourhood n;
  double c = target - acc;
  for (int i = 0; i < 1024; ++i) c = std::nextafter(c, -INFINITY);
  for (int i = 0; i <= 2048; ++i, c = std::nextafter(c, INFINITY)) {
    const double err = std::abs((acc + c) - target);
    n.exact_exists = n.exact_exists || err == 0.0;
    n.best_err = std::min(n.best_err, err);
  }
  return n;
}

TEST(TerminalCorrection, SumRuleExactWheneverRepresentable) {
  Rng rng(5);
  int exact = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const double acc = 20.0 * (rng.uniform() - 0.8);
    const double r = -10.0 * rng.uniform();
    const double lam = 5.0 * rng.uniform();
    const double target = lam * r;
    const double err = std::abs((acc + terminal_log_correction(acc, r, lam)) - target);
    const auto n = scan(acc, target);
    if (n.exact_exists) {
      ASSERT_EQ(err, 0.0) << acc << " " << target;
      ++exact;
    } else {
      ASSERT_EQ(err, n.best_err) << acc << " " << target;
      ASSERT_LE(err, 2.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(acc) + std::abs(target)));
    }
  }
  // Most random pairs admit an exact solution.
  EXPECT_GT(exact, 7000);
}

TEST(TerminalCorrection, ComparableMagnitudesAreExact) {
  Rng rng(6);
  for (int rep = 0; rep < 10000; ++rep) {
    const double acc = -(1.0 + rng.uniform());
    const double target = -(1.0 + rng.uniform());
    EXPECT_EQ(acc + terminal_log_correction(acc, target, 1.0), target);
  }
}

}  // namespace
}  // namespace fvd
