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

#ifndef ADMITAUDIT_FEATURES_H_
#define ADMITAUDIT_FEATURES_H_

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "admitaudit/synthgen.h"

namespace admitaudit {

enum class FieldKind { kNumeric, kCategorical, kText, kBoolean };
std::string_view to_string(FieldKind kind);
FieldKind parse_field_kind(std::string_view text);

// Policy group tags. A policy ablation excludes every field carrying one of
// its groups.
inline constexpr std::string_view kGroupRace = "race";
inline constexpr std::string_view kGroupMajor = "major";
inline constexpr std::string_view kGroupUncontrollable = "uncontrollable";
inline constexpr std::string_view kGroupControllable = "controllable";

struct SchemaEntry {
  std::string field;
  FieldKind kind = FieldKind::kNumeric;
  std::set<std::string> tags;

  bool operator==(const SchemaEntry&) const = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Validates on construction.
  explicit FeatureSchema(std::vector<SchemaEntry> entries);

  // The applicant schema shipped with the generator. Group sizes are 2 race
  // fields, 1 major field and 8 uncontrollable fields.
  static FeatureSchema builtin();

  static FeatureSchema from_json(std::string_view text);
  std::string to_json() const;

  const std::vector<SchemaEntry>& entries() const { return entries_; }
  const SchemaEntry* find(std::string_view field) const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<SchemaEntry> entries_;
};

// Throws ValidationError on unknown fields, kind mismatches, race fields not
// tagged uncontrollable, or fields tagged both controllable and uncontrollable.
void validate_schema(const std::vector<SchemaEntry>& entries);

struct PolicySpec {
  std::string name;
  std::set<std::string> excluded_groups;

  bool operator==(const PolicySpec&) const = default;
};

// ml_baseline, no_race, no_major, no_uncontrollable.
std::vector<PolicySpec> builtin_policies();
// Looks up a builtin by name; throws Error("unknown policy ...") otherwise.
PolicySpec builtin_policy(std::string_view name);
// Groups a policy may exclude.
const std::set<std::string>& excludable_groups();

enum class ColumnRole { kRawNumeric, kMissingIndicator, kOneHotLevel, kTfIdfTerm };
std::string_view to_string(ColumnRole role);

struct ColumnDescriptor {
  std::string name;
  std::string source_field;
  ColumnRole role = ColumnRole::kRawNumeric;
  // Category level or text term; empty otherwise.
  std::string detail;

  bool operator==(const ColumnDescriptor&) const = default;
};

// Dense row-major matrix with one row per applicant.
struct DesignMatrix {
  std::vector<ColumnDescriptor> columns;
  std::vector<std::string> row_ids;
  std::vector<double> values;

  std::size_t rows() const { return row_ids.size(); }
  std::size_t cols() const { return columns.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols(), cols());
  }
  std::vector<std::string> column_names() const;

  bool operator==(const DesignMatrix&) const = default;
};

inline constexpr std::string_view kRareLevel = "RARE";
inline constexpr std::string_view kMissingLevel = "MISSING";

struct PreprocessorConfig {
  // Levels seen in fewer than this share of training rows become RARE.
  double rare_threshold = 0.01;
  std::size_t max_vocab_per_field = 512;
};

// Everything transform() needs, fitted on training rows only. Immutable after
// fit_preprocessor returns.
struct PreprocessorState {
  FeatureSchema schema;
  PreprocessorConfig config;
  std::size_t n_train = 0;
  std::map<std::string, std::vector<std::string>> kept_levels;  // sorted
  std::map<std::string, std::map<std::string, std::size_t>> level_counts;
  std::map<std::string, double> medians;
  // Per text field: sorted vocabulary with its document frequency and idf.
  struct Term {
    std::string term;
    std::size_t df = 0;
    double idf = 0.0;
  };
  std::map<std::string, std::vector<Term>> vocabulary;
};

// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(std::string_view text);
// Unigrams followed by adjacent-token bigrams ("a b").
std::vector<std::string> unigrams_and_bigrams(std::string_view text);

double smoothed_idf(std::size_t n_docs, std::size_t df);

PreprocessorState fit_preprocessor(std::span<const ApplicantRecord> train,
                                   const FeatureSchema& schema,
                                   const PreprocessorConfig& config = {});

DesignMatrix transform(std::span<const ApplicantRecord> records,
                       const PreprocessorState& state, const PolicySpec& policy);

}  // namespace admitaudit

#endif  // ADMITAUDIT_FEATURES_H_
