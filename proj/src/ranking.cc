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

#include "admitaudit/ranking.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "admitaudit/error.h"

namespace admitaudit {

std::string_view to_string(Pool pool) {
  switch (pool) {
    case Pool::kTop:
      return "top";
    case Pool::kMiddle:
      return "middle";
    case Pool::kBottom:
      return "bottom";
  }
  return "bottom";
}

Pool pool_for(int decile, int cutoff) {
  if (decile >= cutoff) return Pool::kTop;
  if (decile <= kBottomPoolMaxDecile) return Pool::kBottom;
  return Pool::kMiddle;
}

namespace {

std::vector<std::size_t> score_order(std::span<const std::string> ids,
                                     std::span<const double> scores) {
  if (ids.size() != scores.size()) throw Error("ranking: ids and scores differ in length");
  if (ids.size() < static_cast<std::size_t>(kDeciles)) {
    throw Error("ranking: need at least 10 applicants");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw Error("ranking: NaN score for '" + ids[i] + "'");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  return order;
}

// Decile of the applicant at 0-based position `pos` in best-first order.
struct DecileLayout {
  std::size_t base;       // n / 10
  std::size_t remainder;  // n % 10, assigned to the top deciles

  int decile_at(std::size_t pos) const {
    std::size_t start = 0;
    for (int d = kDeciles; d >= 1; --d) {
      const std::size_t size =
          base + (static_cast<std::size_t>(kDeciles - d) < remainder ? 1 : 0);
      if (pos < start + size) return d;
      start += size;
    }
    return 1;
  }
};

}  // namespace

std::vector<std::uint8_t> compute_deciles(std::span<const std::string> ids,
                                          std::span<const double> scores) {
  const auto order = score_order(ids, scores);
  const std::size_t n = ids.size();
  std::vector<std::uint8_t> deciles(n);
  const DecileLayout layout{n / kDeciles, n % kDeciles};
  // Walk positions block by block rather than calling decile_at per row.
  std::size_t pos = 0;
  for (int d = kDeciles; d >= 1; --d) {
    const std::size_t size =
        layout.base + (static_cast<std::size_t>(kDeciles - d) < layout.remainder ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k, ++pos) {
      deciles[order[pos]] = static_cast<std::uint8_t>(d);
    }
  }
  return deciles;
}

std::vector<RankOutcome> assign_deciles(std::span<const std::string> ids,
                                        std::span<const double> scores, int cutoff) {
  if (cutoff < 1 || cutoff > kDeciles) throw Error("ranking: cutoff must lie in 1..10");
  const auto order = score_order(ids, scores);
  const std::size_t n = ids.size();
  const DecileLayout layout{n / kDeciles, n % kDeciles};
  std::vector<RankOutcome> out(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    RankOutcome& o = out[i];
    o.applicant_id = ids[i];
    o.score = scores[i];
    o.decile = layout.decile_at(pos);
    o.pool = pool_for(o.decile, cutoff);
    o.rank = pos + 1;
  }
  return out;
}

NaiveKey NaiveKey::of(const ApplicantRecord& record) {
  return NaiveKey{record.highest_math, record.best_test_percentile()};
}

std::partial_ordering NaiveKey::operator<=>(const NaiveKey& other) const {
  if (math_band != other.math_band) return math_band <=> other.math_band;
  if (submitted() != other.submitted()) {
    return submitted() ? std::partial_ordering::greater : std::partial_ordering::less;
  }
  if (!submitted()) return std::partial_ordering::equivalent;
  return *best_percentile <=> *other.best_percentile;
}

std::vector<NaiveOutcome> naive_rank(std::span<const ApplicantRecord> records,
                                     double top_share) {
  if (!(top_share > 0.0 && top_share <= 1.0)) {
    throw Error("naive_rank: top_share must lie in (0, 1]");
  }
  std::vector<NaiveOutcome> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, NaiveKey::of(r), 0, false});
  std::sort(out.begin(), out.end(), [](const NaiveOutcome& a, const NaiveOutcome& b) {
    const auto cmp = a.key <=> b.key;
    if (cmp != 0) return cmp > 0;
    return a.applicant_id < b.applicant_id;
  });
  if (out.empty()) return out;

  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].rank = (i > 0 && out[i].key == out[i - 1].key) ? out[i - 1].rank : i + 1;
  }
  const auto boundary_pos = static_cast<std::size_t>(
      std::ceil(top_share * static_cast<double>(out.size()) - 1e-9));
  const NaiveKey& boundary = out[std::max<std::size_t>(boundary_pos, 1) - 1].key;
  for (auto& o : out) o.top = (o.key <=> boundary) >= 0;
  return out;
}

}  // namespace admitaudit
