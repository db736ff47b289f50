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

#include "admitaudit/features.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <unordered_map>

#include "admitaudit/error.h"
#include "json.hpp"

namespace admitaudit {
namespace {

// Kind each applicant field naturally has; the schema must agree with it.
const std::map<std::string, FieldKind, std::less<>>& natural_kinds() {
  static const std::map<std::string, FieldKind, std::less<>> kKinds = {
      {"race_ethnicity", FieldKind::kCategorical},
      {"urm_flag", FieldKind::kBoolean},
      {"sex", FieldKind::kCategorical},
      {"first_gen", FieldKind::kBoolean},
      {"fee_waiver", FieldKind::kBoolean},
      {"citizenship", FieldKind::kCategorical},
      {"parental_education", FieldKind::kCategorical},
      {"school_type", FieldKind::kCategorical},
      {"highest_math", FieldKind::kNumeric},
      {"gpa", FieldKind::kNumeric},
      {"sat_percentile", FieldKind::kNumeric},
      {"act_percentile", FieldKind::kNumeric},
      {"intended_major", FieldKind::kCategorical},
      {"activity_text", FieldKind::kText},
      {"essay_text", FieldKind::kText},
  };
  return kKinds;
}

std::optional<double> numeric_field(const ApplicantRecord& r, std::string_view field) {
  if (field == "highest_math") return static_cast<double>(r.highest_math);
  if (field == "gpa") return r.gpa;
  if (field == "sat_percentile") return r.sat_percentile;
  if (field == "act_percentile") return r.act_percentile;
  throw Error("not a numeric field: " + std::string(field));
}

// Empty string = missing.
std::string categorical_field(const ApplicantRecord& r, std::string_view field) {
  if (field == "race_ethnicity") return std::string(to_string(r.race_ethnicity));
  if (field == "sex") return r.sex;
  if (field == "citizenship") return r.citizenship;
  if (field == "parental_education") return r.parental_education;
  if (field == "school_type") return r.school_type;
  if (field == "intended_major") return r.intended_major;
  throw Error("not a categorical field: " + std::string(field));
}

bool boolean_field(const ApplicantRecord& r, std::string_view field) {
  if (field == "urm_flag") return r.urm_flag;
  if (field == "first_gen") return r.first_gen;
  if (field == "fee_waiver") return r.fee_waiver;
  throw Error("not a boolean field: " + std::string(field));
}

const std::string& text_field(const ApplicantRecord& r, std::string_view field) {
  if (field == "activity_text") return r.activity_text;
  if (field == "essay_text") return r.essay_text;
  throw Error("not a text field: " + std::string(field));
}

const std::set<std::string>& known_tags() {
  static const std::set<std::string> kTags = {
      std::string(kGroupRace), std::string(kGroupMajor),
      std::string(kGroupUncontrollable), std::string(kGroupControllable)};
  return kTags;
}

std::string level_of(const ApplicantRecord& r, const std::string& field,
                     const std::vector<std::string>& kept) {
  std::string value = categorical_field(r, field);
  if (value.empty()) return std::string(kMissingLevel);
  if (std::binary_search(kept.begin(), kept.end(), value)) return value;
  return std::string(kRareLevel);
}

}  // namespace

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::kNumeric:
      return "numeric";
    case FieldKind::kCategorical:
      return "categorical";
    case FieldKind::kText:
      return "text";
    case FieldKind::kBoolean:
      return "boolean";
  }
  return "numeric";
}

FieldKind parse_field_kind(std::string_view text) {
  if (text == "numeric") return FieldKind::kNumeric;
  if (text == "categorical") return FieldKind::kCategorical;
  if (text == "text") return FieldKind::kText;
  if (text == "boolean") return FieldKind::kBoolean;
  throw ValidationError("kind", "unknown field kind '" + std::string(text) + "'");
}

std::string_view to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::kRawNumeric:
      return "raw_numeric";
    case ColumnRole::kMissingIndicator:
      return "missing_indicator";
    case ColumnRole::kOneHotLevel:
      return "one_hot_level";
    case ColumnRole::kTfIdfTerm:
      return "tfidf_term";
  }
  return "raw_numeric";
}

void validate_schema(const std::vector<SchemaEntry>& entries) {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    auto it = natural_kinds().find(e.field);
    if (it == natural_kinds().end()) {
      throw ValidationError(e.field, "unknown applicant field");
    }
    if (it->second != e.kind) {
      throw ValidationError(e.field, "declared kind '" + std::string(to_string(e.kind)) +
                                         "' but field is " +
                                         std::string(to_string(it->second)));
    }
    if (!seen.insert(e.field).second) throw ValidationError(e.field, "duplicate field");
    for (const auto& tag : e.tags) {
      if (!known_tags().contains(tag)) {
        throw ValidationError(e.field, "unknown policy tag '" + tag + "'");
      }
    }
    const bool uncontrollable = e.tags.contains(std::string(kGroupUncontrollable));
    if (e.tags.contains(std::string(kGroupRace)) && !uncontrollable) {
      throw ValidationError(e.field, "race fields must also be tagged uncontrollable");
    }
    if (uncontrollable && e.tags.contains(std::string(kGroupControllable))) {
      throw ValidationError(e.field, "tagged both controllable and uncontrollable");
    }
  }
}

FeatureSchema::FeatureSchema(std::vector<SchemaEntry> entries) : entries_(std::move(entries)) {
  validate_schema(entries_);
}

FeatureSchema FeatureSchema::builtin() {
  const std::string race(kGroupRace), major(kGroupMajor),
      unc(kGroupUncontrollable), ctl(kGroupControllable);
  return FeatureSchema({
      {"race_ethnicity", FieldKind::kCategorical, {race, unc}},
      {"urm_flag", FieldKind::kBoolean, {race, unc}},
      {"sex", FieldKind::kCategorical, {unc}},
      {"first_gen", FieldKind::kBoolean, {unc}},
      {"fee_waiver", FieldKind::kBoolean, {unc}},
      {"citizenship", FieldKind::kCategorical, {unc}},
      {"parental_education", FieldKind::kCategorical, {unc}},
      {"school_type", FieldKind::kCategorical, {unc}},
      {"highest_math", FieldKind::kNumeric, {ctl}},
      {"gpa", FieldKind::kNumeric, {ctl}},
      {"sat_percentile", FieldKind::kNumeric, {ctl}},
      {"act_percentile", FieldKind::kNumeric, {ctl}},
      {"intended_major", FieldKind::kCategorical, {major, ctl}},
      {"activity_text", FieldKind::kText, {ctl}},
      {"essay_text", FieldKind::kText, {ctl}},
  });
}

FeatureSchema FeatureSchema::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("schema", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.contains("fields") || !doc["fields"].is_array()) {
    throw ValidationError("fields", "schema must contain a 'fields' array");
  }
  std::vector<SchemaEntry> entries;
  for (const auto& f : doc["fields"]) {
    SchemaEntry e;
    try {
      e.field = f.at("field").get<std::string>();
      e.kind = parse_field_kind(f.at("kind").get<std::string>());
      for (const auto& t : f.value("tags", nlohmann::json::array())) {
        e.tags.insert(t.get<std::string>());
      }
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError("fields", std::string("malformed entry: ") + ex.what());
    }
    entries.push_back(std::move(e));
  }
  return FeatureSchema(std::move(entries));
}

std::string FeatureSchema::to_json() const {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& e : entries_) {
    fields.push_back({{"field", e.field},
                      {"kind", std::string(to_string(e.kind))},
                      {"tags", std::vector<std::string>(e.tags.begin(), e.tags.end())}});
  }
  return nlohmann::json{{"fields", fields}}.dump(2);
}

const SchemaEntry* FeatureSchema::find(std::string_view field) const {
  for (const auto& e : entries_) {
    if (e.field == field) return &e;
  }
  return nullptr;
}

const std::set<std::string>& excludable_groups() {
  static const std::set<std::string> kGroups = {
      std::string(kGroupRace), std::string(kGroupMajor), std::string(kGroupUncontrollable)};
  return kGroups;
}

std::vector<PolicySpec> builtin_policies() {
  return {
      {"ml_baseline", {}},
      {"no_race", {std::string(kGroupRace)}},
      {"no_major", {std::string(kGroupMajor)}},
      {"no_uncontrollable", {std::string(kGroupUncontrollable)}},
  };
}

PolicySpec builtin_policy(std::string_view name) {
  for (auto& p : builtin_policies()) {
    if (p.name == name) return p;
  }
  throw Error("unknown policy '" + std::string(name) + "'");
}

std::vector<std::string> DesignMatrix::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current += static_cast<char>(std::tolower(uc));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> unigrams_and_bigrams(std::string_view text) {
  std::vector<std::string> tokens = tokenize(text);
  std::vector<std::string> terms = tokens;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    terms.push_back(tokens[i] + ' ' + tokens[i + 1]);
  }
  return terms;
}

double smoothed_idf(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) +
         1.0;
}

PreprocessorState fit_preprocessor(std::span<const ApplicantRecord> train,
                                   const FeatureSchema& schema,
                                   const PreprocessorConfig& config) {
  if (train.empty()) throw Error("fit_preprocessor: no training records");
  PreprocessorState state;
  state.schema = schema;
  state.config = config;
  state.n_train = train.size();
  const double n = static_cast<double>(train.size());

  for (const auto& e : schema.entries()) {
    switch (e.kind) {
      case FieldKind::kCategorical: {
        std::map<std::string, std::size_t> counts;
        for (const auto& r : train) {
          std::string v = categorical_field(r, e.field);
          ++counts[v.empty() ? std::string(kMissingLevel) : v];
        }
        std::vector<std::string> kept;
        for (const auto& [level, count] : counts) {
          if (level == kMissingLevel || level == kRareLevel) continue;
          if (static_cast<double>(count) / n < config.rare_threshold) continue;
          kept.push_back(level);
        }
        state.kept_levels[e.field] = std::move(kept);
        state.level_counts[e.field] = std::move(counts);
        break;
      }
      case FieldKind::kNumeric: {
        std::vector<double> values;
        for (const auto& r : train) {
          if (auto v = numeric_field(r, e.field)) values.push_back(*v);
        }
        double median = 0.0;
        if (!values.empty()) {
          std::sort(values.begin(), values.end());
          const std::size_t mid = values.size() / 2;
          median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
        }
        state.medians[e.field] = median;
        break;
      }
      case FieldKind::kText: {
        std::unordered_map<std::string, std::size_t> df;
        for (const auto& r : train) {
          std::vector<std::string> terms = unigrams_and_bigrams(text_field(r, e.field));
          std::sort(terms.begin(), terms.end());
          terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
          for (auto& t : terms) ++df[std::move(t)];
        }
        std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
          return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        if (ranked.size() > config.max_vocab_per_field) {
          ranked.resize(config.max_vocab_per_field);
        }
        std::sort(ranked.begin(), ranked.end());
        std::vector<PreprocessorState::Term> vocab;
        vocab.reserve(ranked.size());
        for (auto& [term, count] : ranked) {
          vocab.push_back({term, count, smoothed_idf(train.size(), count)});
        }
        state.vocabulary[e.field] = std::move(vocab);
        break;
      }
      case FieldKind::kBoolean:
        break;
    }
  }
  return state;
}

DesignMatrix transform(std::span<const ApplicantRecord> records,
                       const PreprocessorState& state, const PolicySpec& policy) {
  for (const auto& g : policy.excluded_groups) {
    if (!excludable_groups().contains(g)) {
      throw Error("policy '" + policy.name + "' references unknown group '" + g + "'");
    }
  }
  std::vector<const SchemaEntry*> active;
  for (const auto& e : state.schema.entries()) {
    const bool excluded = std::any_of(e.tags.begin(), e.tags.end(), [&](const std::string& t) {
      return policy.excluded_groups.contains(t);
    });
    if (!excluded) active.push_back(&e);
  }

  DesignMatrix m;
  // Offset of each active field's first column.
  std::vector<std::size_t> offset;
  std::vector<std::unordered_map<std::string, std::size_t>> term_index(active.size());
  for (std::size_t f = 0; f < active.size(); ++f) {
    const SchemaEntry& e = *active[f];
    offset.push_back(m.columns.size());
    switch (e.kind) {
      case FieldKind::kNumeric:
        m.columns.push_back({e.field, e.field, ColumnRole::kRawNumeric, ""});
        m.columns.push_back({e.field + "#missing", e.field, ColumnRole::kMissingIndicator, ""});
        break;
      case FieldKind::kBoolean:
        m.columns.push_back({e.field, e.field, ColumnRole::kRawNumeric, ""});
        break;
      case FieldKind::kCategorical: {
        std::vector<std::string> levels = state.kept_levels.at(e.field);
        levels.emplace_back(kRareLevel);
        levels.emplace_back(kMissingLevel);
        for (const auto& level : levels) {
          m.columns.push_back({e.field + "=" + level, e.field, ColumnRole::kOneHotLevel, level});
        }
        break;
      }
      case FieldKind::kText: {
        const auto& vocab = state.vocabulary.at(e.field);
        for (std::size_t t = 0; t < vocab.size(); ++t) {
          term_index[f].emplace(vocab[t].term, t);
          m.columns.push_back(
              {e.field + ":" + vocab[t].term, e.field, ColumnRole::kTfIdfTerm, vocab[t].term});
        }
        break;
      }
    }
  }

  const std::size_t cols = m.columns.size();
  m.row_ids.reserve(records.size());
  m.values.assign(records.size() * cols, 0.0);
  for (std::size_t row = 0; row < records.size(); ++row) {
    const ApplicantRecord& r = records[row];
    m.row_ids.push_back(r.id);
    double* out = m.values.data() + row * cols;
    for (std::size_t f = 0; f < active.size(); ++f) {
      const SchemaEntry& e = *active[f];
      double* col = out + offset[f];
      switch (e.kind) {
        case FieldKind::kNumeric: {
          const auto v = numeric_field(r, e.field);
          col[0] = v ? *v : state.medians.at(e.field);
          col[1] = v ? 0.0 : 1.0;
          break;
        }
        case FieldKind::kBoolean:
          col[0] = boolean_field(r, e.field) ? 1.0 : 0.0;
          break;
        case FieldKind::kCategorical: {
          const auto& kept = state.kept_levels.at(e.field);
          const std::string level = level_of(r, e.field, kept);
          std::size_t idx;
          if (level == kMissingLevel) {
            idx = kept.size() + 1;
          } else if (level == kRareLevel) {
            idx = kept.size();
          } else {
            idx = static_cast<std::size_t>(
                std::lower_bound(kept.begin(), kept.end(), level) - kept.begin());
          }
          col[idx] = 1.0;
          break;
        }
        case FieldKind::kText: {
          const auto& vocab = state.vocabulary.at(e.field);
          const auto& index = term_index[f];
          for (const auto& term : unigrams_and_bigrams(text_field(r, e.field))) {
            auto it = index.find(term);
            if (it != index.end()) col[it->second] += 1.0;
          }
          double norm = 0.0;
          for (std::size_t t = 0; t < vocab.size(); ++t) {
            col[t] *= vocab[t].idf;
            norm += col[t] * col[t];
          }
          if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (std::size_t t = 0; t < vocab.size(); ++t) col[t] /= norm;
          }
          break;
        }
      }
    }
  }
  return m;
}

}  // namespace admitaudit
