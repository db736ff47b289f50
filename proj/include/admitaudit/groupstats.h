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

#ifndef ADMITAUDIT_GROUPSTATS_H_
#define ADMITAUDIT_GROUPSTATS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "admitaudit/audit.h"
#include "admitaudit/gbdt.h"
#include "admitaudit/synthgen.h"

namespace admitaudit {

inline constexpr std::string_view kUrmShare = "urm_share";
inline constexpr std::string_view kFirstGenShare = "first_gen_share";
inline constexpr std::string_view kLowIncomeShare = "low_income_share";
inline constexpr std::string_view kAdmittedShare = "admitted_share";
inline constexpr std::string_view kAdmittedOrWaitlistedShare = "admitted_or_waitlisted_share";
inline constexpr std::string_view kMeanTestPercentile = "mean_test_percentile";
// Race shares are reported as "race_share:<category>".
std::string race_share_metric(RaceEthnicity race);

// Top-pool membership aligned with a list of test records.
struct TopPool {
  std::string policy;
  std::vector<std::uint8_t> in_top;
};

TopPool top_pool_from_deciles(std::string policy, std::span<const std::uint8_t> deciles,
                              int cutoff);

struct PolicyImpact {
  std::string policy;
  std::size_t top_n = 0;
  std::size_t urm = 0;
  std::size_t first_gen = 0;
  std::size_t low_income = 0;
  std::size_t admitted = 0;
  std::size_t admitted_or_waitlisted = 0;
  std::size_t submitters = 0;
  double urm_share = 0.0;
  double first_gen_share = 0.0;
  double low_income_share = 0.0;
  double admitted_share = 0.0;
  double admitted_or_waitlisted_share = 0.0;
  std::optional<double> mean_test_percentile;  // absent without submitters
  std::vector<std::pair<RaceEthnicity, double>> race_shares;  // kAllRaces order
  std::vector<double> test_percentiles;  // of top-pool submitters

  // (metric, value) pairs in report order; the mean percentile is omitted when absent.
  std::vector<std::pair<std::string, double>> metrics() const;
};

// Throws Error when the pool is empty or misaligned with the records.
PolicyImpact policy_impact(std::span<const ApplicantRecord> records, const TopPool& pool);

struct ImpactComparison {
  std::string policy;
  std::string baseline;
  std::string metric;
  std::string test;  // "binomial" or "mann_whitney"
  double value = 0.0;
  double baseline_value = 0.0;
  std::optional<double> p_value;
  std::optional<double> adjusted_p;
  bool significant = false;
};

struct GroupImpactReport {
  TargetDefinition target = TargetDefinition::kAdmitted;
  std::string baseline;
  double alpha = 0.05;
  std::vector<PolicyImpact> impacts;  // baseline first
  std::vector<ImpactComparison> comparisons;

  const PolicyImpact& impact(std::string_view policy) const;
  const ImpactComparison& comparison(std::string_view policy, std::string_view metric) const;
};

// Binomial tests of each policy's top-pool counts against the baseline share as
// null proportion, and Mann-Whitney U on submitters' test percentiles. One
// Bonferroni correction covers every comparison in the report.
GroupImpactReport group_impact(std::span<const ApplicantRecord> records,
                               const TopPool& baseline, std::span<const TopPool> policies,
                               TargetDefinition target, double alpha = 0.05);

// Two-sided binomial p that also accepts a degenerate null share of 0 or 1.
double binomial_vs_share(std::size_t k, std::size_t n, double p0);

struct SweepPoint {
  int cutoff = 0;
  std::string policy;
  std::string metric;
  double value = 0.0;
};

// Cutoffs 10 down to 1. Cutoffs with an empty top pool are skipped.
std::vector<SweepPoint> cutoff_sweep(std::span<const ApplicantRecord> records,
                                     std::string policy, std::span<const std::uint8_t> deciles);
// Ensemble version: each metric is the mean over models.
std::vector<SweepPoint> cutoff_sweep(std::span<const ApplicantRecord> records,
                                     const EnsembleOutcomes& ensemble);

struct ShareInterval {
  std::string policy;
  std::string metric;
  double mean = 0.0;
  double lower = 0.0;  // 2.5th percentile over models
  double upper = 0.0;  // 97.5th percentile over models
};

std::vector<ShareInterval> ensemble_share_intervals(std::span<const ApplicantRecord> records,
                                                    const EnsembleOutcomes& ensemble);

// Linear-interpolation quantile of a non-empty sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace admitaudit

#endif  // ADMITAUDIT_GROUPSTATS_H_
