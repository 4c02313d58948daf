#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ceo_rd/bergertung.hpp"
#include "ceo_rd/errors.hpp"
#include "oracles.hpp"

using namespace ceo_rd;

TEST(BergerTung, SubsetInformationMatchesEntropyOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> lq(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const SourceModel m = oracle::random_model(rng);
    const double q = std::pow(10.0, lq(rng));
    for (int k = 1; k <= m.ell(); ++k) {
      for (int b = 1; b <= k; ++b) {
        EXPECT_NEAR(subset_mutual_info(m, TestChannel{q}, b, k),
                    oracle::subset_mi_entropy(m, q, b, k), 1e-9);
      }
    }
  }
}

TEST(BergerTung, FullSetConstraintIsTight) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const SourceModel m = oracle::random_model(rng);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(5, m.ell())));
    const double d = oracle::random_distortion(rng, m, k);
    const RegionCheck rc = check_symmetric_rate(m, k, d);
    ASSERT_EQ(rc.constraints.size(), static_cast<std::size_t>(k));
    EXPECT_TRUE(rc.all_satisfied());
    EXPECT_NEAR(rc.constraints.back().slack, 0.0, 1e-10);
    EXPECT_NEAR(rc.rate, rate_bar(m, k, d), 1e-14);
  }
}

TEST(BergerTung, IncrementsAreNondecreasing) {
  // The subset information is supermodular in |B|, so the symmetric split of
  // the full-set sum rate covers every smaller subset.
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const SourceModel m = oracle::random_model(rng);
    const int k = m.ell();
    const double q = oracle::lambda_q_bisect(m, k, oracle::random_distortion(rng, m, k));
    double prev = 0.0;
    double prev_inc = -INFINITY;
    for (int b = 1; b <= k; ++b) {
      const double cur = subset_mutual_info(m, TestChannel{q}, b, k);
      const double inc = cur - prev;
      EXPECT_GE(inc, prev_inc - 1e-12);
      prev_inc = inc;
      prev = cur;
    }
  }
}

TEST(BergerTung, AchievablePointCarriesTheFrontier) {
  const RDPoint p = achievable_point(oracle::m0(), 2, 0.75);
  EXPECT_EQ(p.k, 2);
  EXPECT_NEAR(p.lambda_q, 2.0, 1e-12);
  EXPECT_NEAR(p.rate, 0.25 * std::log(4.0), 1e-12);
  EXPECT_NEAR(p.distortion(3), 0.75, 1e-12);
}

TEST(BergerTung, IndependentSourcesSplitEvenly) {
  // With rho_S = 0 the encoders are independent: every subset needs b * rate.
  const RegionCheck rc = check_symmetric_rate(oracle::m0(), 3, 0.8);
  for (const auto& c : rc.constraints) EXPECT_NEAR(c.slack, 0.0, 1e-12);
}

TEST(BergerTung, RejectsBadSubsetSizes) {
  const SourceModel m = oracle::m0();
  EXPECT_THROW((void)subset_mutual_info(m, TestChannel{1.0}, 0, 2), DomainError);
  EXPECT_THROW((void)subset_mutual_info(m, TestChannel{1.0}, 3, 2), DomainError);
  EXPECT_THROW((void)subset_mutual_info(m, TestChannel{1.0}, 1, 4), DomainError);
  EXPECT_THROW((void)subset_mutual_info(m, TestChannel{0.0}, 1, 2), DomainError);
}
