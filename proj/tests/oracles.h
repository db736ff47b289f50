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

// Brute-force reference implementations used to check the production code.
// They enumerate the underlying sample space directly and share no code with
// the library.

#ifndef ADMITAUDIT_TESTS_ORACLES_H_
#define ADMITAUDIT_TESTS_ORACLES_H_

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

namespace admitaudit::oracle {

// Share of unordered model pairs that agree on top-pool membership.
inline double pairwise_agreement(std::uint64_t m0, std::uint64_t m1) {
  const std::uint64_t m = m0 + m1;
  std::uint64_t agree = 0, pairs = 0;
  // Models 0..m1-1 say "top", the rest say "not top".
  for (std::uint64_t i = 0; i < m; ++i) {
    for (std::uint64_t j = i + 1; j < m; ++j) {
      ++pairs;
      if ((i < m1) == (j < m1)) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

// Two-sided binomial p by walking every one of the 2^n outcome sequences.
inline double binomial_two_sided(unsigned k, unsigned n, double p0) {
  std::vector<double> pmf(n + 1, 0.0);
  for (std::uint64_t seq = 0; seq < (std::uint64_t{1} << n); ++seq) {
    const unsigned ones = static_cast<unsigned>(std::popcount(seq));
    pmf[ones] += std::pow(p0, ones) * std::pow(1.0 - p0, n - ones);
  }
  double p = 0.0;
  for (unsigned i = 0; i <= n; ++i) {
    if (pmf[i] <= pmf[k] * (1.0 + 1e-12)) p += pmf[i];
  }
  return std::min(1.0, p);
}

// Counts labelings of the pooled sample whose U lies at least as far from its
// mean as the observed one. Requires distinct values and |x| + |y| <= 20.
inline double mann_whitney_two_sided(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  const unsigned n = static_cast<unsigned>(pooled.size());
  const unsigned nx = static_cast<unsigned>(x.size());
  auto u_of = [&](std::uint32_t mask) {
    long long twice_u = 0;
    for (unsigned i = 0; i < n; ++i) {
      if (!(mask >> i & 1U)) continue;
      for (unsigned j = 0; j < n; ++j) {
        if (mask >> j & 1U) continue;
        twice_u += pooled[i] > pooled[j] ? 2 : (pooled[i] == pooled[j] ? 1 : 0);
      }
    }
    return twice_u;
  };
  const long long twice_mean = static_cast<long long>(x.size() * y.size());
  const long long observed = std::llabs(u_of((1U << nx) - 1U) - twice_mean);
  std::uint64_t extreme = 0, total = 0;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    if (static_cast<unsigned>(std::popcount(mask)) != nx) continue;
    ++total;
    if (std::llabs(u_of(mask) - twice_mean) >= observed) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

// Flips the sign of every subset of the differences (all nonzero, distinct
// magnitudes) and counts W+ values at least as extreme as the observed one.
inline double wilcoxon_two_sided(const std::vector<double>& d) {
  const unsigned n = static_cast<unsigned>(d.size());
  std::vector<int> rank(n, 1);
  for (unsigned i = 0; i < n; ++i) {
    for (unsigned j = 0; j < n; ++j) {
      if (std::fabs(d[j]) < std::fabs(d[i])) ++rank[i];
    }
  }
  const int total_rank = static_cast<int>(n * (n + 1) / 2);
  int observed_plus = 0;
  for (unsigned i = 0; i < n; ++i) {
    if (d[i] > 0) observed_plus += rank[i];
  }
  const int observed = std::abs(2 * observed_plus - total_rank);
  std::uint64_t extreme = 0, total = 0;
  for (std::uint32_t signs = 0; signs < (1U << n); ++signs) {
    int plus = 0;
    for (unsigned i = 0; i < n; ++i) {
      if (signs >> i & 1U) plus += rank[i];
    }
    ++total;
    if (std::abs(2 * plus - total_rank) >= observed) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace admitaudit::oracle

#endif  // ADMITAUDIT_TESTS_ORACLES_H_
