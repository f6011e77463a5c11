#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

#include "qauth/random.hpp"
#include "qauth/secparams.hpp"
#include "support/oracles.hpp"

using namespace qauth::secparams;

using oracle::smallest_d;
using oracle::smallest_k;

TEST(Sizing, KnownTargets) {
  EXPECT_EQ(required_k(std::ldexp(1.0, -17)), 17u);
  EXPECT_EQ(required_d(std::ldexp(1.0, -17)), 41u);
  EXPECT_EQ(required_k(0.5), 1u);
  EXPECT_EQ(required_d(0.5), 3u);
  EXPECT_EQ(required_k(1e-6), 20u);
  EXPECT_EQ(required_d(1e-6), 49u);
  EXPECT_EQ(required_d(0.75), 1u);
  EXPECT_THROW((void)required_k(0.0), std::invalid_argument);
  EXPECT_THROW((void)required_d(1.0), std::invalid_argument);
  EXPECT_THROW((void)required_d(std::nan("")), std::invalid_argument);
}

TEST(Sizing, SampledTargetsMinimal) {
  qauth::RandomSource rand(17, 0);
  for (int i = 0; i < 1000; ++i) {
    // Log-uniform over [2^-60, 1).
    const double D = std::exp2(-60.0 * rand.uniform());
    if (!(D < 1.0)) continue;
    const Rational exact(D);
    EXPECT_EQ(required_k(D), smallest_k(exact)) << D;
    EXPECT_EQ(required_d(D), smallest_d(exact)) << D;
  }
}

TEST(Sizing, Ratio) { EXPECT_NEAR(ratio_d_over_k(), 2.4094208396532095, 1e-12); }

TEST(Probabilities, ForgeryAndEvasion) {
  EXPECT_EQ(forgery_prob(8), 1.0 / 256.0);
  EXPECT_EQ(evasion_prob_exact(8), Rational(6561, 65536));
  EXPECT_NEAR(evasion_prob(8), 0.1001129150390625, 1e-15);
}

TEST(SubsetGuess, MatchesExhaustiveEnumeration) {
  for (unsigned k = 1; k <= 3; ++k) {
    for (unsigned d = 0; d <= 5; ++d) {
      for (unsigned g = k; g <= k + d; ++g) {
        const Rational want = oracle::subset_success(k, d, g);
        EXPECT_EQ(subset_success_prob(k, d, g), want) << k << " " << d << " " << g;
        EXPECT_EQ(subset_success_prob_factorial(k, d, g), want);
      }
    }
  }
  EXPECT_THROW((void)subset_success_prob(3, 2, 2), std::out_of_range);
  EXPECT_THROW((void)subset_success_prob(3, 2, 6), std::out_of_range);
}

TEST(SubsetGuess, MarginalGainAndImprovementBoundary) {
  for (unsigned k = 1; k <= 6; ++k) {
    const unsigned d = 5 * k;
    EXPECT_EQ(improvement_limit(k), 4u * k - 1);
    for (unsigned g = k; g < k + d; ++g) {
      const Rational now = subset_success_prob(k, d, g);
      const Rational next = subset_success_prob(k, d, g + 1);
      EXPECT_EQ(next / now, marginal_gain_ratio(g, k) * Rational(3, 4)) << k << " " << g;
      EXPECT_EQ(next > now, g < improvement_limit(k)) << k << " " << g;
    }
  }
}

TEST(Pns, Inflation) {
  EXPECT_EQ(pns_required_d(41, 0.5), 82u);
  EXPECT_EQ(pns_required_d(16, 0.5), 32u);
  EXPECT_EQ(pns_required_d(10, 1.0), 10u);
  EXPECT_EQ(pns_required_d(10, 0.3), 34u);
  EXPECT_DOUBLE_EQ(pns_effective_d(16, 0.5), 8.0);
  EXPECT_NEAR(pns_exact_evasion(16, 0.5), std::pow(0.875, 16), 1e-15);
  EXPECT_NEAR(pns_approx_evasion(16, 0.5), std::pow(0.75, 8), 1e-15);
  // The coarse form restores the target exactly; the per-slot model does not.
  EXPECT_NEAR(pns_approx_evasion(32, 0.5), evasion_prob(16), 1e-15);
  EXPECT_GT(pns_exact_evasion(32, 0.5), evasion_prob(16));
  const std::uint64_t exact = pns_required_d_exact(evasion_prob(16) * (1 + 1e-12), 0.5);
  EXPECT_LE(pns_exact_evasion(exact, 0.5), evasion_prob(16) * (1 + 1e-12));
  EXPECT_GT(pns_exact_evasion(exact - 1, 0.5), evasion_prob(16) * (1 + 1e-12));
  EXPECT_EQ(pns_required_d_exact(0.5, 1.0), 3u);
  EXPECT_THROW((void)pns_required_d(4, 0.0), std::invalid_argument);
}
