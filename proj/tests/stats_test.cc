// Copyright 2026 The admitaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "admitaudit/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "admitaudit/error.h"
#include "oracles.h"

namespace admitaudit::stats {
namespace {

TEST(BinomialTest, DocumentedValues) {
  EXPECT_DOUBLE_EQ(binomial_test(5, 10, 0.5), 1.0);
  EXPECT_NEAR(binomial_test(0, 10, 0.5), 2.0 / 1024.0, 1e-15);
  EXPECT_NEAR(binomial_test(8, 10, 0.5), 112.0 / 1024.0, 1e-15);
}

TEST(BinomialTest, MatchesSequenceEnumeration) {
  // Fair coin outcomes are exact dyadic rationals; other p0 values carry
  // rounding from the pmf, hence the 1e-12 band.
  for (unsigned n = 1; n <= 12; ++n) {
    for (double p0 : {0.5, 0.1, 0.173, 0.3, 0.62, 0.9}) {
      for (unsigned k = 0; k <= n; ++k) {
        const double expected = oracle::binomial_two_sided(k, n, p0);
        EXPECT_NEAR(binomial_test(k, n, p0), expected, 1e-12)
            << "k=" << k << " n=" << n << " p0=" << p0;
      }
    }
  }
}

TEST(BinomialTest, SymmetricUnderComplement) {
  for (unsigned n : {7u, 20u, 151u}) {
    for (unsigned k = 0; k <= n; k += 3) {
      EXPECT_NEAR(binomial_test(k, n, 0.27), binomial_test(n - k, n, 0.73), 1e-12);
    }
  }
}

TEST(BinomialTest, TwoSidedAtLeastOneSided) {
  const unsigned n = 40;
  const double p0 = 0.3;
  for (unsigned k = 0; k <= n; ++k) {
    double upper = 0.0, lower = 0.0;
    for (unsigned i = 0; i <= n; ++i) {
      const double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                                  std::lgamma(n - i + 1.0) + i * std::log(p0) +
                                  (n - i) * std::log(1 - p0));
      if (i >= k) upper += pmf;
      if (i <= k) lower += pmf;
    }
    EXPECT_GE(binomial_test(k, n, p0) + 1e-12, std::min({upper, lower, 1.0}));
  }
}

TEST(BinomialTest, RejectsBadInput) {
  EXPECT_THROW(binomial_test(11, 10, 0.5), Error);
  EXPECT_THROW(binomial_test(1, 10, 0.0), Error);
  EXPECT_THROW(binomial_test(1, 10, 1.0), Error);
}

TEST(MannWhitneyTest, DocumentedValues) {
  const std::vector<double> x = {1, 2, 3}, y = {4, 5, 6};
  const TestResult r = mann_whitney_u(x, y);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_TRUE(r.exact);
  EXPECT_DOUBLE_EQ(r.p_value, 0.1);

  const std::vector<double> a = {1, 2, 2, 5, 7}, b = {7, 5, 2, 2, 1};
  const TestResult same = mann_whitney_u(a, b);
  EXPECT_EQ(same.statistic, 12.5);
  EXPECT_NEAR(same.p_value, 1.0, 1e-12);
}

TEST(MannWhitneyTest, MatchesLabelEnumerationExactly) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (std::size_t n = 2; n <= kExactRankTestMaxN; ++n) {
    for (std::size_t nx = 1; nx < n; ++nx) {
      for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> pooled(n);
        std::iota(pooled.begin(), pooled.end(), 0.0);
        std::shuffle(pooled.begin(), pooled.end(), rng);
        const std::vector<double> x(pooled.begin(), pooled.begin() + nx);
        const std::vector<double> y(pooled.begin() + nx, pooled.end());
        const TestResult r = mann_whitney_u(x, y);
        ASSERT_TRUE(r.exact);
        EXPECT_EQ(r.p_value, oracle::mann_whitney_two_sided(x, y)) << "n=" << n << " nx=" << nx;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(MannWhitneyTest, TiesCountHalf) {
  const std::vector<double> x = {1, 3}, y = {1, 2};
  // Pairs: (1,1) tie, (1,2) loss, (3,1) win, (3,2) win.
  const TestResult r = mann_whitney_u(x, y);
  EXPECT_EQ(r.statistic, 2.5);
  EXPECT_FALSE(r.exact);
}

TEST(MannWhitneyTest, SwitchesToApproximationAboveCrossover) {
  std::vector<double> x(6), y(7);
  std::iota(x.begin(), x.end(), 0.0);
  std::iota(y.begin(), y.end(), 6.0);
  EXPECT_FALSE(mann_whitney_u(x, y).exact);
  y.pop_back();
  EXPECT_TRUE(mann_whitney_u(x, y).exact);
  EXPECT_FALSE(mann_whitney_u(x, y, RankTestMethod::kNormal).exact);
  const std::vector<double> tied = {0.0, 1.0};
  EXPECT_THROW(mann_whitney_u(x, tied, RankTestMethod::kExact), Error);
}

// Worst |p_normal - p_exact| over every labeling of 12 distinct values into
// groups of 6. The continuity-corrected approximation is off by about 0.0155
// at this size; the bound pins that behaviour.
TEST(MannWhitneyTest, ApproximationErrorAtCrossoverIsBounded) {
  double worst = 0.0;
  for (unsigned mask = 0; mask < (1u << 12); ++mask) {
    if (__builtin_popcount(mask) != 6) continue;
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) ((mask >> i) & 1u ? x : y).push_back(i);
    const double exact = mann_whitney_u(x, y, RankTestMethod::kExact).p_value;
    ASSERT_DOUBLE_EQ(exact, oracle::mann_whitney_two_sided(x, y));
    const double approx = mann_whitney_u(x, y, RankTestMethod::kNormal).p_value;
    worst = std::max(worst, std::fabs(approx - exact));
  }
  EXPECT_GT(worst, 0.01);
  EXPECT_LE(worst, 0.016);
}

TEST(MannWhitneyTest, EmptySampleThrows) {
  const std::vector<double> x = {1.0}, empty;
  EXPECT_THROW(mann_whitney_u(x, empty), Error);
  EXPECT_THROW(mann_whitney_u(empty, x), Error);
}

TEST(WilcoxonTest, DocumentedValues) {
  const std::vector<double> up = {1, 2, 3}, down = {-1, -2, -3};
  const WilcoxonResult a = wilcoxon_signed_rank(up);
  EXPECT_EQ(a.statistic, 0.0);
  EXPECT_TRUE(a.exact);
  EXPECT_DOUBLE_EQ(a.p_value, 0.25);
  const WilcoxonResult b = wilcoxon_signed_rank(down);
  EXPECT_EQ(b.statistic, 0.0);
  EXPECT_EQ(b.p_value, a.p_value);

  const std::vector<double> tied = {1, -1};
  const WilcoxonResult c = wilcoxon_signed_rank(tied);
  EXPECT_EQ(c.statistic, 1.5);
  EXPECT_EQ(c.w_plus, 1.5);
  EXPECT_EQ(c.w_minus, 1.5);
  EXPECT_FALSE(c.exact);
}

TEST(WilcoxonTest, DropsZeros) {
  const std::vector<double> d = {0, 1, 0, 2, 3, 0};
  const WilcoxonResult r = wilcoxon_signed_rank(d);
  EXPECT_EQ(r.n_nonzero, 3u);
  EXPECT_DOUBLE_EQ(r.p_value, 0.25);
}

TEST(WilcoxonTest, AllZeroThrows) {
  const std::vector<double> d = {0, 0, 0};
  EXPECT_THROW(wilcoxon_signed_rank(d), Error);
}

TEST(WilcoxonTest, MatchesSignEnumerationExactly) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t n = 1; n <= kExactRankTestMaxN; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) {
        d[i] = (static_cast<double>(i) + 1.0) * (coin(rng) ? 1.0 : -1.0);
      }
      std::shuffle(d.begin(), d.end(), rng);
      const WilcoxonResult r = wilcoxon_signed_rank(d);
      ASSERT_TRUE(r.exact);
      EXPECT_EQ(r.p_value, oracle::wilcoxon_two_sided(d)) << "n=" << n;
    }
  }
}

TEST(WilcoxonTest, ApproximationErrorAtCrossoverIsBounded) {
  double worst = 0.0;
  for (unsigned mask = 0; mask < (1u << 12); ++mask) {
    std::vector<double> d(12);
    for (int i = 0; i < 12; ++i) d[i] = (i + 1.0) * ((mask >> i) & 1u ? 1.0 : -1.0);
    const double exact = wilcoxon_signed_rank(d, RankTestMethod::kExact).p_value;
    const double approx = wilcoxon_signed_rank(d, RankTestMethod::kNormal).p_value;
    worst = std::max(worst, std::fabs(approx - exact));
  }
  EXPECT_LE(worst, 0.014);
  std::vector<double> d(13);
  std::iota(d.begin(), d.end(), 1.0);
  EXPECT_FALSE(wilcoxon_signed_rank(d).exact);
}

TEST(BonferroniTest, ThresholdAndAdjustment) {
  const std::vector<double> p = {0.01, 0.04, 0.2, 0.5};
  const BonferroniResult r = bonferroni(p);
  EXPECT_DOUBLE_EQ(r.threshold, 0.0125);
  EXPECT_EQ(r.significant, (std::vector<bool>{true, false, false, false}));
  EXPECT_DOUBLE_EQ(r.adjusted[0], 0.04);
  EXPECT_DOUBLE_EQ(r.adjusted[1], 0.16);
  EXPECT_DOUBLE_EQ(r.adjusted[3], 1.0);
}

TEST(BonferroniTest, SingleComparisonIsUnadjusted) {
  const std::vector<double> p = {0.04};
  const BonferroniResult r = bonferroni(p);
  EXPECT_DOUBLE_EQ(r.threshold, 0.05);
  EXPECT_TRUE(r.significant[0]);
  EXPECT_DOUBLE_EQ(r.adjusted[0], 0.04);
}

TEST(BonferroniTest, NominalPointZeroFourFailsAmongSeveral) {
  // A p of 0.04 in a family of several comparisons is not significant.
  const std::vector<double> p = {0.04, 0.0001, 0.3, 0.6, 0.001, 0.2};
  EXPECT_FALSE(bonferroni(p).significant[0]);
}

TEST(MidranksTest, AveragesTies) {
  const std::vector<double> v = {3, 1, 3, 2};
  double ties = 0.0;
  EXPECT_EQ(midranks(v, &ties), (std::vector<double>{3.5, 1, 3.5, 2}));
  EXPECT_EQ(ties, 6.0);
}

}  // namespace
}  // namespace admitaudit::stats
