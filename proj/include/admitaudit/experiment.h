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

#ifndef ADMITAUDIT_EXPERIMENT_H_
#define ADMITAUDIT_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "admitaudit/audit.h"
#include "admitaudit/error.h"
#include "admitaudit/features.h"
#include "admitaudit/gbdt.h"
#include "admitaudit/synthgen.h"

namespace admitaudit {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kNaivePolicy = "naive_baseline";
// Suffix of the identical-policy replica trained when replica_check is set.
inline constexpr std::string_view kReplicaSuffix = "~replica";

// Raised by the pipeline stages; what() starts with "<stage>: ".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& msg)
      : Error(stage + ": " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ExperimentConfig {
  // Every randomized step draws from a seed derived from this one.
  std::uint64_t seed = 0;
  CohortSpec cohort;
  std::optional<std::filesystem::path> schema_path;
  FeatureSchema schema = FeatureSchema::builtin();
  // The first policy is the reference for comparisons and across-sets.
  std::vector<PolicySpec> policies;
  GbdtConfig gbdt;
  PreprocessorConfig preprocess;
  std::size_t m = 100;
  // Models drawn from each within-set for an across-set; 0 means m / 2.
  std::size_t across_k = 0;
  std::size_t max_redraws = 100;
  int cutoff = kDefaultCutoff;
  double tau = kDefaultTau;
  double alpha = 0.05;
  TargetDefinition target = TargetDefinition::kAdmitted;
  std::filesystem::path output_dir = "artifacts";
  bool replica_check = false;

  // 5,000 / 2,000 applicants, m = 100, 50 trees, all four builtin policies.
  static ExperimentConfig demo();
  // Full-size cohort (44,293 / 15,540 applicants), 100 trees and m = 1,000.
  static ExperimentConfig full_scale();

  // Relative schema paths resolve against base_dir. Unknown keys are errors.
  static ExperimentConfig from_json(std::string_view text,
                                    const std::filesystem::path& base_dir = {});
  // Canonical form; the output directory is excluded so moving a run does not
  // change its hash.
  std::string to_json() const;
  std::uint64_t hash() const;

  void validate() const;
  PipelineConfig pipeline() const;
  BootstrapSpec bootstrap() const;
  std::size_t effective_across_k() const { return across_k == 0 ? m / 2 : across_k; }

  // Stage seeds derived from `seed`.
  std::uint64_t cohort_seed() const;
  std::uint64_t bootstrap_seed() const;
  std::uint64_t across_seed() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// Same experiment with the training label replaced.
ExperimentConfig with_target(ExperimentConfig config, TargetDefinition target);

// Accepts builtin names or "name=group+group" custom exclusions.
PolicySpec parse_policy(std::string_view text);
std::vector<PolicySpec> parse_policy_list(std::string_view comma_separated);

namespace artifacts {
inline constexpr std::string_view kApplicants = "applicants.csv";
inline constexpr std::string_view kRankings = "rankings.csv";
inline constexpr std::string_view kConsistency = "consistency.csv";
inline constexpr std::string_view kEnsembleShares = "ensemble_shares.csv";
inline constexpr std::string_view kArbitrariness = "arbitrariness.csv";
inline constexpr std::string_view kConsistencySummary = "consistency_summary.csv";
inline constexpr std::string_view kGroupImpact = "group_impact.csv";
inline constexpr std::string_view kSweep = "sweep.csv";
inline constexpr std::string_view kManifest = "manifest.json";
inline constexpr std::string_view kModelsDir = "models";
inline constexpr std::string_view kEnsemblesDir = "ensembles";
}  // namespace artifacts

// Each stage reads its inputs from, and writes into, config.output_dir.
// Missing inputs raise StageError naming the file.
void stage_generate(const ExperimentConfig& config);
void stage_train(const ExperimentConfig& config, int workers = 1);
void stage_audit(const ExperimentConfig& config, int workers = 1);
void stage_report(const ExperimentConfig& config);
void stage_sweep(const ExperimentConfig& config);

struct RunSummary {
  std::filesystem::path output_dir;
  std::uint64_t content_hash = 0;
  double wall_seconds = 0.0;
};

// All stages followed by manifest.json.
RunSummary run_experiment(const ExperimentConfig& config, int workers = 1);

// Audit results kept in memory, for callers that want the numbers without
// going through the artifact files.
struct AuditResult {
  std::vector<EnsembleOutcomes> within;
  std::vector<EnsembleOutcomes> across;  // (reference, other) pairs in policy order
  std::vector<ConsistencyReport> within_reports;
  std::vector<ConsistencyReport> across_reports;
};

AuditResult audit_ensembles(std::span<const ApplicantRecord> train,
                            std::span<const ApplicantRecord> test,
                            const ExperimentConfig& config, int workers = 1);

// Comparison rows for each (reference, other) across-set: overall and among the
// reference's usually-top-ranked applicants.
std::vector<ArbitrarinessComparison> arbitrariness_comparisons(
    const ConsistencyReport& reference, const ConsistencyReport& other,
    const ConsistencyReport& across);

}  // namespace admitaudit

#endif  // ADMITAUDIT_EXPERIMENT_H_
