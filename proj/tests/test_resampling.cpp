#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "fvd/errors.hpp"
#include "fvd/oracle.hpp"
#include "fvd/resampling.hpp"
#include "test_util.hpp"

namespace fvd {
namespace {

using test::scalar;

std::size_t count_dead(const DeathMask& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
}

TEST(DeathDraw, CertainSurvival) {
  Rng rng(1);
  const auto m = fv_death_draw(std::vector<double>(50, 1.0), rng);
  EXPECT_EQ(count_dead(m), 0u);
}

TEST(DeathDraw, BernoulliFrequency) {
  Rng rng(2);
  const std::vector<double> s{1.0, 0.5};
  int dead2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto m = fv_death_draw(s, rng);
    ASSERT_FALSE(m[0]);
    dead2 += m[1] ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(dead2) / n, 0.5, 0.005);
}

TEST(DeathDraw, SurvivorVarianceMatchesSum) {
  Rng gen(3);
  std::vector<double> s(100);
  for (auto& x : s) x = 1.0 - gen.uniform();
  double expected = 0.0;
  for (double x : s) expected += x * (1.0 - x);
  Rng rng(4);
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double surv = 100.0 - static_cast<double>(count_dead(fv_death_draw(s, rng)));
    sum += surv;
    sq += surv * surv;
  }
  const double mean = sum / n;
  EXPECT_NEAR((sq - n * mean * mean) / (n - 1), expected, 0.05 * expected);
}

TEST(DeathDraw, RejectsInvalidProbabilities) {
  Rng rng(5);
  EXPECT_THROW(fv_death_draw(std::vector<double>{0.0, 1.0}, rng), ParameterError);
  EXPECT_THROW(fv_death_draw(std::vector<double>{1.2}, rng), ParameterError);
}

TEST(DeathCap, FloorIsRobust) {
  EXPECT_EQ(death_cap(4, 0.5), 2u);
  EXPECT_EQ(death_cap(10, 0.3), 3u);
  EXPECT_EQ(death_cap(100, 0.29), 29u);
  EXPECT_EQ(death_cap(1000, 0.9), 900u);
  EXPECT_EQ(death_cap(7, 1.0), 7u);
}

TEST(EnforceCap, SlackLeavesMaskAlone) {
  const DeathMask m{true, false, false, false};
  const auto r = enforce_cap(m, std::vector<double>{-1, -2, -3, -4}, 0.5);
  EXPECT_EQ(r.death_mask, m);
  EXPECT_TRUE(r.revived.empty());
}

TEST(EnforceCap, RevivesHighestPotential) {
  const DeathMask m{true, true, true, false};
  const auto r = enforce_cap(m, std::vector<double>{-3, -1, -2, 0}, 0.5);
  EXPECT_EQ(r.revived, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.death_mask, (DeathMask{true, false, true, false}));
}

TEST(EnforceCap, TiesRevivedLowestIndexFirst) {
  const DeathMask m{true, true, true, true, false, false};
  const auto r = enforce_cap(m, std::vector<double>{-1, -1, -1, -1, 0, 0}, 0.5);
  EXPECT_EQ(r.revived, (std::vector<std::size_t>{0}));
  const auto r2 = enforce_cap(m, std::vector<double>{-1, -1, -1, -1, 0, 0}, 1.0 / 6.0);
  EXPECT_EQ(r2.revived, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(count_dead(r2.death_mask), 1u);
}

TEST(DonorAssign, SingleSurvivor) {
  Rng rng(6);
  const auto d = donor_assign(DeathMask{true, true, false, true}, rng);
  EXPECT_EQ(d, (DonorMap{{0, 2}, {1, 2}, {3, 2}}));
}

TEST(DonorAssign, NoDeadAndNoSurvivors) {
  Rng rng(7);
  EXPECT_TRUE(donor_assign(DeathMask{false, false}, rng).empty());
  EXPECT_THROW(donor_assign(DeathMask{true, true}, rng), InvariantError);
}

TEST(DonorAssign, Uniform) {
  Rng rng(8);
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) first += donor_assign(DeathMask{false, true, false}, rng).at(1) == 0;
  EXPECT_NEAR(static_cast<double>(first) / n, 0.5, 0.005);
}

class RebirthTest : public ::testing::Test {
 protected:
  GaussianMixture prior{{0.5, 0.5}, {scalar(-1.0), scalar(1.5)}, {scalar(0.3), scalar(0.6)}};
  NoiseSchedule sched = build_strided_schedule(1000, 100, 1e-4, 0.02);
  MixtureDenoiser den{prior, sched};
};

TEST_F(RebirthTest, ZeroEtaIsDeterministicSuccessor) {
  const State x = scalar(0.4);
  const State succ = ddim_step(x, den.predict_eps(x, 50), 50, 0.0, State(), sched);
  Rng rng(9);
  EXPECT_EQ(rebirth(x, den, 50, 0.0, rng), succ);
}

TEST_F(RebirthTest, PositiveEtaDiversifies) {
  const State x = scalar(0.4);
  Rng rng(10);
  EXPECT_NE(rebirth(x, den, 50, 0.4, rng), rebirth(x, den, 50, 0.4, rng));
}

TEST_F(RebirthTest, MeanMatchesDeterministicPart) {
  const int t = 70;
  const double eta = 0.4;
  const State x = scalar(0.4);
  const State eps = den.predict_eps(x, t);
  const State mean_part = ddim_step(x, eps, t, eta, scalar(0.0), sched);
  Rng rng(11);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += rebirth(x, den, t, eta, rng)[0];
  // Standard error of the mean is sigma / 100; allow 4 of them.
  EXPECT_NEAR(sum / n, mean_part[0], 4.0 * ddim_sigma(t, eta, sched) / 100.0);
}

TEST(MultinomialResample, SingletonAndDegenerate) {
  Rng rng(12);
  EXPECT_EQ(multinomial_resample(std::vector<double>{-3.0}, rng), (std::vector<std::size_t>{0}));
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_THROW(multinomial_resample(std::vector<double>{ninf, ninf}, rng), DegenerateWeightsError);
}

TEST(MultinomialResample, ZeroOffspringFraction) {
  const std::size_t K = 1000;
  double total = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(1000 + trial);
    const auto anc = multinomial_resample(std::vector<double>(K, 0.0), rng);
    std::set<std::size_t> distinct(anc.begin(), anc.end());
    total += static_cast<double>(K - distinct.size()) / K;
  }
  EXPECT_NEAR(total / 200.0, std::pow(1.0 - 1.0 / K, static_cast<double>(K)), 0.01);
}

TEST(MultinomialResample, DistinctCountLawMatchesEnumeration) {
  for (std::size_t K = 2; K <= 6; ++K) {
    const auto exact = oracle::multinomial_distinct_distribution(K);
    std::vector<double> freq(K + 1, 0.0);
    const int n = 40000;
    Rng rng(77 + K);
    for (int i = 0; i < n; ++i) {
      const auto anc = multinomial_resample(std::vector<double>(K, 0.0), rng);
      freq[std::set<std::size_t>(anc.begin(), anc.end()).size()] += 1.0 / n;
    }
    for (std::size_t c = 1; c <= K; ++c) {
      const double se = std::sqrt(exact[c] * (1.0 - exact[c]) / n);
      EXPECT_NEAR(freq[c], exact[c], 5.0 * se + 1e-12) << "K=" << K << " c=" << c;
    }
  }
}

TEST(MultinomialResample, OffspringVarianceNearOne) {
  const std::size_t K = 200;
  Rng rng(13);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto anc = multinomial_resample(std::vector<double>(K, 0.0), rng);
    const double c = static_cast<double>(std::count(anc.begin(), anc.end(), std::size_t{0}));
    sum += c;
    sq += c * c;
  }
  const double mean = sum / n;
  EXPECT_NEAR(sq / n - mean * mean, 1.0 - 1.0 / K, 0.05);
}

TEST(AssignOffspringSlots, KeepsOwnSlotAndFillsInDrawOrder) {
  // Ancestors 0 and 3 are drawn twice; 1 and 4 have no offspring.
  const std::vector<std::size_t> anc{3, 0, 2, 3, 0};
  const auto a = assign_offspring_slots(anc);
  EXPECT_EQ(a.death_mask, (DeathMask{false, true, false, false, true}));
  EXPECT_EQ(a.donors, (DonorMap{{1, 3}, {4, 0}}));
}

TEST(FinalSubsample, SoftmaxProbabilities) {
  Rng rng(14);
  const auto idx = final_subsample(std::vector<double>{std::log(2.0), 0.0}, 1.0, 60000, rng);
  const double p0 = static_cast<double>(std::count(idx.begin(), idx.end(), std::size_t{0})) / 60000.0;
  EXPECT_NEAR(p0, 2.0 / 3.0, 0.01);
}

TEST(FinalSubsample, FlatAndHighTemperature) {
  Rng rng(15);
  for (double tau : {1.0, 1e9}) {
    const std::vector<double> r = tau == 1.0 ? std::vector<double>(4, -1.0)
                                             : std::vector<double>{0.0, -5.0, -10.0, -20.0};
    const auto idx = final_subsample(r, tau, 40000, rng);
    for (std::size_t k = 0; k < 4; ++k) {
      const double f = static_cast<double>(std::count(idx.begin(), idx.end(), k)) / 40000.0;
      EXPECT_NEAR(f, 0.25, 0.01);
    }
  }
  EXPECT_THROW(final_subsample(std::vector<double>{0.0}, 0.0, 1, rng), ParameterError);
  EXPECT_THROW(final_subsample(std::vector<double>{0.0}, 1.0, 0, rng), ParameterError);
}

}  // namespace
}  // namespace fvd
