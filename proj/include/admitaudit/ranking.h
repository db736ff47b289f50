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

#ifndef ADMITAUDIT_RANKING_H_
#define ADMITAUDIT_RANKING_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "admitaudit/synthgen.h"

namespace admitaudit {

inline constexpr int kDeciles = 10;
inline constexpr int kDefaultCutoff = 9;
// Deciles at or below this (and below the cutoff) form the bottom pool.
inline constexpr int kBottomPoolMaxDecile = 5;

enum class Pool { kTop, kMiddle, kBottom };
std::string_view to_string(Pool pool);

struct RankOutcome {
  std::string applicant_id;
  double score = 0.0;
  int decile = 1;  // 10 = highest scores
  Pool pool = Pool::kBottom;
  std::size_t rank = 0;  // 1 = best

  bool operator==(const RankOutcome&) const = default;
};

Pool pool_for(int decile, int cutoff);

// Decile (1..10) per applicant, in input order. Scores are sorted descending
// with ties broken by ascending id; the n % 10 leftover rows go to the highest
// deciles. Throws on NaN scores, fewer than 10 applicants, or size mismatch.
std::vector<std::uint8_t> compute_deciles(std::span<const std::string> ids,
                                          std::span<const double> scores);

// Same ordering as compute_deciles; returned in input order.
std::vector<RankOutcome> assign_deciles(std::span<const std::string> ids,
                                        std::span<const double> scores,
                                        int cutoff = kDefaultCutoff);

// Math band first, then best submitted percentile; non-submitters sort last
// within their band.
struct NaiveKey {
  int math_band = kMinMathBand;
  std::optional<double> best_percentile;

  bool submitted() const { return best_percentile.has_value(); }
  static NaiveKey of(const ApplicantRecord& record);
  // Greater = ranked higher.
  std::partial_ordering operator<=>(const NaiveKey& other) const;
  bool operator==(const NaiveKey& other) const = default;
};

struct NaiveOutcome {
  std::string applicant_id;
  NaiveKey key;
  std::size_t rank = 0;  // 1 + number of applicants with a strictly better key
  bool top = false;
};

// Lexicographic ranking in best-first order (equal keys listed by id). The top
// set is every applicant whose key is at least the key at the top_share
// boundary, so ties straddling the boundary are all included.
std::vector<NaiveOutcome> naive_rank(std::span<const ApplicantRecord> records,
                                     double top_share = 0.2);

}  // namespace admitaudit

#endif  // ADMITAUDIT_RANKING_H_
