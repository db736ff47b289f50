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

#ifndef ADMITAUDIT_AUDIT_H_
#define ADMITAUDIT_AUDIT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "admitaudit/features.h"
#include "admitaudit/gbdt.h"
#include "admitaudit/ranking.h"
#include "admitaudit/synthgen.h"

namespace admitaudit {

inline constexpr double kDefaultTau = 0.95;

// One "learning process": preprocessing, model and ranking settings shared by
// every model trained under a policy.
struct PipelineConfig {
  FeatureSchema schema = FeatureSchema::builtin();
  PreprocessorConfig preprocess;
  GbdtConfig gbdt;
  TargetDefinition target = TargetDefinition::kAdmitted;
  int cutoff = kDefaultCutoff;
};

struct ScoredModel {
  TrainedModel model;
  std::vector<double> scores;  // aligned with the test records
};

// Fits the preprocessor on `train`, trains under `policy` and scores `test`.
ScoredModel fit_and_score(std::span<const ApplicantRecord> train,
                          std::span<const ApplicantRecord> test, const PolicySpec& policy,
                          const PipelineConfig& config, int workers = 1);

struct BootstrapSpec {
  std::size_t m = 1000;
  std::uint64_t master_seed = 0;
  // Single-class resamples are redrawn up to this many times per model.
  std::size_t max_redraws = 100;

  void validate() const;
};

std::uint64_t bootstrap_seed(std::uint64_t master_seed, std::string_view policy_name,
                             std::size_t index, std::size_t attempt = 0);

// n draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

// Decile placements of one test cohort under M models. Top-pool membership is
// decile >= cutoff, so the same outcomes can be re-cut at any cutoff.
struct EnsembleOutcomes {
  std::string name;
  std::vector<std::string> applicant_ids;
  int cutoff = kDefaultCutoff;
  std::size_t models = 0;
  std::vector<std::uint8_t> deciles;  // deciles[model * applicants() + applicant]
  std::vector<std::size_t> redraws;   // per model

  std::size_t applicants() const { return applicant_ids.size(); }
  std::uint8_t decile(std::size_t applicant, std::size_t model) const {
    return deciles[model * applicants() + applicant];
  }
  bool in_top(std::size_t applicant, std::size_t model) const {
    return decile(applicant, model) >= cutoff;
  }
  // M1 per applicant.
  std::vector<std::size_t> top_counts() const;
  std::vector<std::uint8_t> top_column(std::size_t model) const;
};

// Trains spec.m models on with-replacement resamples of `train` (preprocessor
// refit per resample) and records where each ranks the full `test` cohort.
// Models are trained in parallel on `workers` threads; the result does not
// depend on the worker count.
EnsembleOutcomes build_within_set(std::span<const ApplicantRecord> train,
                                  std::span<const ApplicantRecord> test,
                                  const PolicySpec& policy, const BootstrapSpec& spec,
                                  const PipelineConfig& config, int workers = 1);

// Draws k models without replacement from each within-set and concatenates
// them (A's first). Named "across(A,B)".
EnsembleOutcomes build_across_set(const EnsembleOutcomes& a, const EnsembleOutcomes& b,
                                  std::size_t k, std::uint64_t seed);

std::string across_set_name(std::string_view a, std::string_view b);

// Probability that two distinct models drawn from the M = m0 + m1 agree:
// 1 - 2 m0 m1 / (M (M - 1)), evaluated as one exactly rounded division.
double self_consistency(std::size_t m0, std::size_t m1);

// (1 - mean(sc_across)) / (1 - mean(sc_within)). Throws when the within mean
// is 1 (no within-set arbitrariness to compare against).
double arbitrariness_ratio(std::span<const double> sc_across, std::span<const double> sc_within);

enum class ConsistencyClass { kConsistentlyTop, kConsistentlyNotTop, kArbitrary };
std::string_view to_string(ConsistencyClass c);

ConsistencyClass classify(std::size_t m, std::size_t m1, double tau = kDefaultTau);

struct ApplicantConsistency {
  std::string applicant_id;
  std::size_t m = 0;
  std::size_t m1 = 0;
  double sc = 1.0;
  ConsistencyClass cls = ConsistencyClass::kConsistentlyNotTop;

  std::size_t m0() const { return m - m1; }
  // Placed in the top pool by more than half of the models.
  bool usually_top() const { return 2 * m1 > m; }
};

struct ConsistencyReport {
  std::string set_name;
  double tau = kDefaultTau;
  std::vector<ApplicantConsistency> rows;
  double share_consistently_top = 0.0;
  double share_consistently_not_top = 0.0;
  double share_arbitrary = 0.0;

  std::vector<double> sc_values() const;
  double mean_sc() const;
};

ConsistencyReport classify_consistency(std::string set_name,
                                       std::span<const std::string> applicant_ids,
                                       std::span<const std::size_t> m,
                                       std::span<const std::size_t> m1,
                                       double tau = kDefaultTau);
ConsistencyReport consistency_report(const EnsembleOutcomes& ensemble,
                                     double tau = kDefaultTau);

// ar of `numerator` against `denominator`, restricted to applicants where
// mask is nonzero (all when empty), with a paired signed-rank test on
// per-applicant sc.
struct RatioTest {
  std::string numerator;
  std::string denominator;
  std::string subset;
  std::size_t n = 0;
  double mean_sc_numerator = 0.0;
  double mean_sc_denominator = 0.0;
  std::optional<double> ar;       // absent when the denominator mean sc is 1
  std::optional<double> p_value;  // absent when every paired difference is 0
};

RatioTest ratio_test(const ConsistencyReport& numerator, const ConsistencyReport& denominator,
                     std::span<const std::uint8_t> mask = {}, std::string subset = "all");

struct ArbitrarinessComparison {
  std::string policy_a;
  std::string policy_b;
  std::string subset;
  double mean_within_a = 0.0;
  double mean_within_b = 0.0;
  double mean_across = 0.0;
  RatioTest across_vs_a;
  RatioTest across_vs_b;
  RatioTest b_vs_a;
};

ArbitrarinessComparison compare_arbitrariness(const ConsistencyReport& within_a,
                                              const ConsistencyReport& within_b,
                                              const ConsistencyReport& across,
                                              std::span<const std::uint8_t> mask = {},
                                              std::string subset = "all");

// Applicants usually placed in the top pool by `report`'s models.
std::vector<std::uint8_t> usually_top_mask(const ConsistencyReport& report);

struct GroupArbitrariness {
  std::string group;
  std::size_t n = 0;
  bool insufficient_n = false;
  double mean_sc_a = 0.0;
  double mean_sc_b = 0.0;
  std::optional<double> ar;  // of B's within-set against A's
  std::optional<double> p_value;
  std::optional<double> adjusted_p;
  bool significant = false;  // Bonferroni across the groups that have a p-value
};

// Per-group comparison of two within-set reports. `group_labels` is aligned
// with the report rows. Groups are returned in label order.
std::vector<GroupArbitrariness> group_arbitrariness(const ConsistencyReport& a,
                                                    const ConsistencyReport& b,
                                                    std::span<const std::string> group_labels,
                                                    double alpha = 0.05);

}  // namespace admitaudit

#endif  // ADMITAUDIT_AUDIT_H_
