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

#ifndef ADMITAUDIT_GBDT_H_
#define ADMITAUDIT_GBDT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "admitaudit/features.h"

namespace admitaudit {

// Which historical outcomes count as the positive class.
enum class TargetDefinition { kAdmitted, kAdmittedOrWaitlisted };
std::string_view to_string(TargetDefinition target);
TargetDefinition parse_target(std::string_view text);

std::vector<std::uint8_t> training_labels(std::span<const ApplicantRecord> records,
                                          TargetDefinition target);

struct GbdtConfig {
  int n_trees = 100;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 20;
  // Histogram bins per feature; at most 256.
  int n_bins = 64;
  // L2 penalty in the leaf value -G / (H + l2).
  double l2 = 1.0;
  // Unused by the deterministic learner; kept so configs round-trip and any
  // future stochastic option draws from here.
  std::uint64_t seed = 0;

  // n_trees may be 0 (base-score-only model).
  void validate() const;
  bool operator==(const GbdtConfig&) const = default;
};

namespace logistic {
// Loss and derivatives of the binary log-loss as a function of the margin.
double loss(double margin, double label);
double gradient(double margin, double label);
double hessian(double margin);
double sigmoid(double margin);
}  // namespace logistic

struct TreeNode {
  // -1 marks a leaf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // Rows with value <= threshold go left.
  double predict(std::span<const double> row) const;
  bool operator==(const RegressionTree&) const = default;
};

class TrainedModel {
 public:
  GbdtConfig config;
  TargetDefinition target = TargetDefinition::kAdmitted;
  double base_score = 0.0;
  std::vector<std::string> columns;
  // Candidate thresholds per column, as computed from the training matrix.
  std::vector<std::vector<double>> bin_edges;
  std::vector<RegressionTree> trees;

  double margin(std::span<const double> row) const;
  // Throws Error naming the first column that differs from training.
  std::vector<double> predict_proba(const DesignMatrix& matrix) const;

  std::string to_json() const;
  static TrainedModel from_json(std::string_view text);

  bool operator==(const TrainedModel&) const = default;
};

struct TrainingTrace {
  // Mean training log-loss after the base score (index 0) and after each tree.
  std::vector<double> loss;
};

// Second-order logistic boosting over quantile histograms. The result depends
// only on (matrix, labels, config): gradient sums are accumulated in fixed
// point, so neither `workers` nor row order changes a single bit.
TrainedModel train(const DesignMatrix& matrix, std::span<const std::uint8_t> labels,
                   const GbdtConfig& config,
                   TargetDefinition target = TargetDefinition::kAdmitted, int workers = 1,
                   TrainingTrace* trace = nullptr);

// Split candidates for one column: observed values, at most n_bins - 1 of
// them, strictly below the column maximum.
std::vector<double> compute_bin_edges(std::span<const double> column_values, int n_bins);

}  // namespace admitaudit

#endif  // ADMITAUDIT_GBDT_H_
