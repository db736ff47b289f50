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
#include <stdexcept>
#include <string>

#include "admitaudit/error.h"

namespace admitaudit::stats {
namespace {

double normal_two_sided(double z) { return std::erfc(z / std::sqrt(2.0)); }

// Number of (x, y) arrangements with i x-values and j y-values yielding each
// U, using f(i, j, u) = f(i - 1, j, u - j) + f(i, j - 1, u).
std::vector<std::uint64_t> mann_whitney_counts(std::size_t n1, std::size_t n2) {
  const std::size_t max_u = n1 * n2;
  // table[i][j] is the count vector for (i, j).
  std::vector<std::vector<std::vector<std::uint64_t>>> table(
      n1 + 1, std::vector<std::vector<std::uint64_t>>(n2 + 1));
  for (std::size_t i = 0; i <= n1; ++i) {
    for (std::size_t j = 0; j <= n2; ++j) {
      auto& f = table[i][j];
      f.assign(max_u + 1, 0);
      if (i == 0 || j == 0) {
        f[0] = 1;
        continue;
      }
      for (std::size_t u = 0; u <= i * j; ++u) {
        std::uint64_t c = table[i][j - 1][u];
        if (u >= j) c += table[i - 1][j][u - j];
        f[u] = c;
      }
    }
  }
  return table[n1][n2];
}

// Number of subsets of {1..n} with each rank sum.
std::vector<std::uint64_t> signed_rank_counts(std::size_t n) {
  const std::size_t max_sum = n * (n + 1) / 2;
  std::vector<std::uint64_t> f(max_sum + 1, 0);
  f[0] = 1;
  for (std::size_t r = 1; r <= n; ++r) {
    for (std::size_t s = max_sum; s >= r; --s) f[s] += f[s - r];
  }
  return f;
}

}  // namespace

std::vector<double> midranks(std::span<const double> values, double* tie_term) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    const auto t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

double binomial_test(std::uint64_t k, std::uint64_t n, double p0) {
  if (k > n) throw Error("binomial_test: k must not exceed n");
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error("binomial_test: p0 must lie in (0, 1)");
  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
  auto log_pmf = [&](std::uint64_t i) {
    const auto di = static_cast<double>(i);
    const auto dn = static_cast<double>(n);
    return log_n_fact - std::lgamma(di + 1.0) - std::lgamma(dn - di + 1.0) + di * log_p +
           (dn - di) * log_q;
  };
  const double limit = log_pmf(k) + std::log1p(1e-12);
  double total = 0.0;
  for (std::uint64_t i = 0; i <= n; ++i) {
    const double lp = log_pmf(i);
    if (lp <= limit) total += std::exp(lp);
  }
  return std::min(1.0, total);
}

namespace {

bool use_exact(RankTestMethod method, std::size_t n, double tie_term, const char* test) {
  const bool available = n <= kExactRankTestMaxN && tie_term == 0.0;
  switch (method) {
    case RankTestMethod::kAuto:
      return available;
    case RankTestMethod::kNormal:
      return false;
    case RankTestMethod::kExact:
      if (!available) {
        throw Error(std::string(test) + ": exact p needs n <= " +
                    std::to_string(kExactRankTestMaxN) + " and no ties");
      }
      return true;
  }
  return available;
}

}  // namespace

TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                          RankTestMethod method) {
  if (x.empty() || y.empty()) throw Error("mann_whitney_u: both samples must be non-empty");
  const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  double tie_term = 0.0;
  const std::vector<double> ranks = midranks(pooled, &tie_term);
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
  const double u = r1 - d1 * (d1 + 1.0) / 2.0;

  TestResult result;
  result.statistic = u;
  if (use_exact(method, n, tie_term, "mann_whitney_u")) {
    const auto counts = mann_whitney_counts(n1, n2);
    const auto twice_mean = static_cast<long long>(n1 * n2);
    const long long observed = std::llabs(2 * std::llround(u) - twice_mean);
    std::uint64_t extreme = 0, total = 0;
    for (std::size_t v = 0; v < counts.size(); ++v) {
      total += counts[v];
      if (std::llabs(2 * static_cast<long long>(v) - twice_mean) >= observed) {
        extreme += counts[v];
      }
    }
    result.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    result.exact = true;
    return result;
  }
  const double dn = static_cast<double>(n);
  const double mean = d1 * d2 / 2.0;
  const double var = d1 * d2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (var <= 0.0) {
    result.p_value = 1.0;
    return result;
  }
  const double z = std::max(0.0, std::fabs(u - mean) - 0.5) / std::sqrt(var);
  result.p_value = std::min(1.0, normal_two_sided(z));
  return result;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs, RankTestMethod method) {
  std::vector<double> nonzero;
  for (double d : diffs) {
    if (std::isnan(d)) throw Error("wilcoxon_signed_rank: NaN difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) {
    throw Error("wilcoxon_signed_rank: all differences are zero; test undefined");
  }
  const std::size_t n = nonzero.size();
  std::vector<double> magnitudes(n);
  for (std::size_t i = 0; i < n; ++i) magnitudes[i] = std::fabs(nonzero[i]);
  double tie_term = 0.0;
  const std::vector<double> ranks = midranks(magnitudes, &tie_term);
  WilcoxonResult result;
  result.n_nonzero = n;
  for (std::size_t i = 0; i < n; ++i) {
    (nonzero[i] > 0.0 ? result.w_plus : result.w_minus) += ranks[i];
  }
  result.statistic = std::min(result.w_plus, result.w_minus);

  const double dn = static_cast<double>(n);
  if (use_exact(method, n, tie_term, "wilcoxon_signed_rank")) {
    const auto counts = signed_rank_counts(n);
    const auto total_rank = static_cast<long long>(n * (n + 1) / 2);
    const long long observed = std::llabs(2 * std::llround(result.w_plus) - total_rank);
    std::uint64_t extreme = 0, total = 0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      total += counts[s];
      if (std::llabs(2 * static_cast<long long>(s) - total_rank) >= observed) {
        extreme += counts[s];
      }
    }
    result.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    result.exact = true;
    return result;
  }
  const double mean = dn * (dn + 1.0) / 4.0;
  const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) {
    result.p_value = 1.0;
    return result;
  }
  const double z = std::max(0.0, std::fabs(result.w_plus - mean) - 0.5) / std::sqrt(var);
  result.p_value = std::min(1.0, normal_two_sided(z));
  return result;
}

BonferroniResult bonferroni(std::span<const double> p_values, double alpha) {
  BonferroniResult out;
  const auto k = static_cast<double>(p_values.size());
  if (p_values.empty()) {
    out.threshold = alpha;
    return out;
  }
  out.threshold = alpha / k;
  for (double p : p_values) {
    out.significant.push_back(p < out.threshold);
    out.adjusted.push_back(std::min(1.0, p * k));
  }
  return out;
}

}  // namespace admitaudit::stats
