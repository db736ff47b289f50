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

#ifndef ADMITAUDIT_STATS_H_
#define ADMITAUDIT_STATS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace admitaudit::stats {

// Largest total sample size handled by exact enumeration in the rank tests.
inline constexpr std::size_t kExactRankTestMaxN = 12;

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

// Exact two-sided binomial test using the minimum-likelihood rule: sums the
// probability of every outcome no more likely than k (relative slack 1e-12).
// Requires 0 <= k <= n and 0 < p0 < 1.
double binomial_test(std::uint64_t k, std::uint64_t n, double p0);

// statistic = U for sample x (pairs with x > y, ties count one half).
// Exact when |x| + |y| <= 12 and there are no ties; otherwise a normal
// approximation with tie and continuity corrections.
// kAuto enumerates the exact null distribution when the total size is at most
// kExactRankTestMaxN and there are no ties, and uses the normal approximation
// otherwise. kExact throws where enumeration is unavailable.
enum class RankTestMethod { kAuto, kExact, kNormal };

TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                          RankTestMethod method = RankTestMethod::kAuto);

struct WilcoxonResult : TestResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_nonzero = 0;
};

// Signed-rank test on paired differences. Zero differences are dropped
// (Wilcoxon's method); statistic = min(W+, W-). Exact when at most 12 nonzero
// differences remain and no |d| ties; else normal approximation with tie and
// continuity corrections. Throws when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs,
                                    RankTestMethod method = RankTestMethod::kAuto);

struct BonferroniResult {
  double threshold = 0.0;  // alpha / k
  std::vector<bool> significant;
  std::vector<double> adjusted;  // min(1, p * k)
};

BonferroniResult bonferroni(std::span<const double> p_values, double alpha = 0.05);

// Midranks (1-based) of `values`; also returns sum over tie groups of t^3 - t.
std::vector<double> midranks(std::span<const double> values, double* tie_term = nullptr);

}  // namespace admitaudit::stats

#endif  // ADMITAUDIT_STATS_H_
