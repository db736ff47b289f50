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

#include "admitaudit/experiment.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "admitaudit/csv.h"
#include "admitaudit/groupstats.h"
#include "admitaudit/ranking.h"
#include "admitaudit/seeding.h"

namespace admitaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, std::string_view where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError(std::string(where), "must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError(std::string(where) + "." + it.key(), "unknown key");
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, std::string_view where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string(where) + "." + key, "has the wrong type");
  }
}

bool valid_policy_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.' || c == '~';
  });
}

PolicySpec policy_from_json(const json& item) {
  if (item.is_string()) return builtin_policy(item.get<std::string>());
  check_keys(item, "policies[]", {"name", "exclude"});
  PolicySpec p;
  read_opt(item, "name", p.name, "policies[]");
  std::vector<std::string> groups;
  read_opt(item, "exclude", groups, "policies[]");
  p.excluded_groups.insert(groups.begin(), groups.end());
  return p;
}

json policy_to_json(const PolicySpec& p) {
  return {{"name", p.name},
          {"exclude", std::vector<std::string>(p.excluded_groups.begin(), p.excluded_groups.end())}};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::demo() {
  ExperimentConfig c;
  c.cohort.n_train = 5000;
  c.cohort.n_test = 2000;
  c.gbdt.n_trees = 50;
  c.m = 100;
  c.policies = builtin_policies();
  return c;
}

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig c = demo();
  c.cohort.n_train = CohortSpec{}.n_train;
  c.cohort.n_test = CohortSpec{}.n_test;
  c.gbdt.n_trees = GbdtConfig{}.n_trees;
  c.m = 1000;
  return c;
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("config", std::string("invalid JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"seed", "cohort", "schema", "policies", "gbdt", "preprocess", "bootstrap", "cutoff",
              "tau", "alpha", "target", "output_dir", "replica_check"});
  ExperimentConfig c = demo();
  read_opt(doc, "seed", c.seed, "config");
  if (doc.contains("cohort")) {
    const json& j = doc["cohort"];
    check_keys(j, "cohort",
               {"n_train", "n_test", "urm_rate", "female_rate", "first_gen_rate", "low_ses_rate",
                "admit_rate", "waitlist_rate", "test_submission_rate", "group_boost",
                "waitlist_group_boost", "merit_noise_sd", "major_effect", "submission_merit_slope"});
    CohortSpec& s = c.cohort;
    read_opt(j, "n_train", s.n_train, "cohort");
    read_opt(j, "n_test", s.n_test, "cohort");
    read_opt(j, "urm_rate", s.urm_rate, "cohort");
    read_opt(j, "female_rate", s.female_rate, "cohort");
    read_opt(j, "first_gen_rate", s.first_gen_rate, "cohort");
    read_opt(j, "low_ses_rate", s.low_ses_rate, "cohort");
    read_opt(j, "admit_rate", s.admit_rate, "cohort");
    read_opt(j, "waitlist_rate", s.waitlist_rate, "cohort");
    read_opt(j, "test_submission_rate", s.test_submission_rate, "cohort");
    read_opt(j, "group_boost", s.group_boost, "cohort");
    read_opt(j, "waitlist_group_boost", s.waitlist_group_boost, "cohort");
    read_opt(j, "merit_noise_sd", s.merit_noise_sd, "cohort");
    read_opt(j, "major_effect", s.major_effect, "cohort");
    read_opt(j, "submission_merit_slope", s.submission_merit_slope, "cohort");
  }
  if (doc.contains("schema")) {
    std::string path;
    read_opt(doc, "schema", path, "config");
    fs::path p(path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.schema_path = p;
    c.schema = FeatureSchema::from_json(read_text(p));
  }
  if (doc.contains("policies")) {
    if (!doc["policies"].is_array()) throw ValidationError("policies", "must be an array");
    c.policies.clear();
    for (const auto& item : doc["policies"]) c.policies.push_back(policy_from_json(item));
  }
  if (doc.contains("gbdt")) {
    const json& j = doc["gbdt"];
    check_keys(j, "gbdt",
               {"n_trees", "max_depth", "learning_rate", "min_samples_leaf", "n_bins", "l2"});
    read_opt(j, "n_trees", c.gbdt.n_trees, "gbdt");
    read_opt(j, "max_depth", c.gbdt.max_depth, "gbdt");
    read_opt(j, "learning_rate", c.gbdt.learning_rate, "gbdt");
    read_opt(j, "min_samples_leaf", c.gbdt.min_samples_leaf, "gbdt");
    read_opt(j, "n_bins", c.gbdt.n_bins, "gbdt");
    read_opt(j, "l2", c.gbdt.l2, "gbdt");
  }
  if (doc.contains("preprocess")) {
    const json& j = doc["preprocess"];
    check_keys(j, "preprocess", {"rare_threshold", "max_vocab_per_field"});
    read_opt(j, "rare_threshold", c.preprocess.rare_threshold, "preprocess");
    read_opt(j, "max_vocab_per_field", c.preprocess.max_vocab_per_field, "preprocess");
  }
  if (doc.contains("bootstrap")) {
    const json& j = doc["bootstrap"];
    check_keys(j, "bootstrap", {"m", "across_k", "max_redraws"});
    read_opt(j, "m", c.m, "bootstrap");
    read_opt(j, "across_k", c.across_k, "bootstrap");
    read_opt(j, "max_redraws", c.max_redraws, "bootstrap");
  }
  read_opt(doc, "cutoff", c.cutoff, "config");
  read_opt(doc, "tau", c.tau, "config");
  read_opt(doc, "alpha", c.alpha, "config");
  if (doc.contains("target")) {
    std::string t;
    read_opt(doc, "target", t, "config");
    c.target = parse_target(t);
  }
  if (doc.contains("output_dir")) {
    std::string out;
    read_opt(doc, "output_dir", out, "config");
    fs::path p(out);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.output_dir = p;
  }
  read_opt(doc, "replica_check", c.replica_check, "config");
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const {
  json policies_json = json::array();
  for (const auto& p : policies) policies_json.push_back(policy_to_json(p));
  const CohortSpec& s = cohort;
  json doc = {
      {"seed", seed},
      {"cohort",
       {{"n_train", s.n_train},
        {"n_test", s.n_test},
        {"urm_rate", s.urm_rate},
        {"female_rate", s.female_rate},
        {"first_gen_rate", s.first_gen_rate},
        {"low_ses_rate", s.low_ses_rate},
        {"admit_rate", s.admit_rate},
        {"waitlist_rate", s.waitlist_rate},
        {"test_submission_rate", s.test_submission_rate},
        {"group_boost", s.group_boost},
        {"waitlist_group_boost", s.waitlist_group_boost},
        {"merit_noise_sd", s.merit_noise_sd},
        {"major_effect", s.major_effect},
        {"submission_merit_slope", s.submission_merit_slope}}},
      {"schema", json::parse(schema.to_json())},
      {"policies", policies_json},
      {"gbdt",
       {{"n_trees", gbdt.n_trees},
        {"max_depth", gbdt.max_depth},
        {"learning_rate", gbdt.learning_rate},
        {"min_samples_leaf", gbdt.min_samples_leaf},
        {"n_bins", gbdt.n_bins},
        {"l2", gbdt.l2}}},
      {"preprocess",
       {{"rare_threshold", preprocess.rare_threshold},
        {"max_vocab_per_field", preprocess.max_vocab_per_field}}},
      {"bootstrap",
       {{"m", m}, {"across_k", effective_across_k()}, {"max_redraws", max_redraws}}},
      {"cutoff", cutoff},
      {"tau", tau},
      {"alpha", alpha},
      {"target", std::string(admitaudit::to_string(target))},
      {"replica_check", replica_check}};
  return doc.dump(2);
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(to_json()); }

void ExperimentConfig::validate() const {
  cohort.validate();
  gbdt.validate();
  bootstrap().validate();
  if (policies.empty()) throw ValidationError("policies", "at least one policy is required");
  std::set<std::string> names;
  for (const auto& p : policies) {
    if (!valid_policy_name(p.name)) {
      throw ValidationError("policies", "invalid policy name '" + p.name + "'");
    }
    if (p.name == kNaivePolicy) {
      throw ValidationError("policies", "'" + std::string(kNaivePolicy) + "' is reserved");
    }
    if (!names.insert(p.name).second) {
      throw ValidationError("policies", "duplicate policy '" + p.name + "'");
    }
    for (const auto& g : p.excluded_groups) {
      if (!excludable_groups().count(g)) {
        throw ValidationError("policies", "policy '" + p.name + "' excludes unknown group '" +
                                              g + "'");
      }
    }
  }
  if (cutoff < 1 || cutoff > kDeciles) throw ValidationError("cutoff", "must lie in 1..10");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau", "must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha", "must lie in (0, 1)");
  const std::size_t k = effective_across_k();
  if (k < 1 || k > m) throw ValidationError("across_k", "must lie in 1..m");
  if (!(preprocess.rare_threshold >= 0.0 && preprocess.rare_threshold < 1.0)) {
    throw ValidationError("rare_threshold", "must lie in [0, 1)");
  }
}

PipelineConfig ExperimentConfig::pipeline() const {
  PipelineConfig p;
  p.schema = schema;
  p.preprocess = preprocess;
  p.gbdt = gbdt;
  p.gbdt.seed = derive_seed(seed, "gbdt");
  p.target = target;
  p.cutoff = cutoff;
  return p;
}

BootstrapSpec ExperimentConfig::bootstrap() const {
  BootstrapSpec b;
  b.m = m;
  b.master_seed = bootstrap_seed();
  b.max_redraws = max_redraws;
  return b;
}

std::uint64_t ExperimentConfig::cohort_seed() const { return derive_seed(seed, "cohort"); }
std::uint64_t ExperimentConfig::bootstrap_seed() const { return derive_seed(seed, "bootstrap"); }
std::uint64_t ExperimentConfig::across_seed() const { return derive_seed(seed, "across"); }

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error("config file not found: " + path.string());
  return ExperimentConfig::from_json(read_text(path), path.parent_path());
}

ExperimentConfig with_target(ExperimentConfig config, TargetDefinition target) {
  config.target = target;
  return config;
}

PolicySpec parse_policy(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) return builtin_policy(text);
  PolicySpec p;
  p.name = std::string(text.substr(0, eq));
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto plus = rest.find('+');
    const std::string_view group = rest.substr(0, plus);
    if (!group.empty()) p.excluded_groups.insert(std::string(group));
    if (plus == std::string_view::npos) break;
    rest = rest.substr(plus + 1);
  }
  return p;
}

std::vector<PolicySpec> parse_policy_list(std::string_view comma_separated) {
  std::vector<PolicySpec> out;
  std::string_view rest = comma_separated;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    if (!item.empty()) out.push_back(parse_policy(item));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (out.empty()) throw ValidationError("policies", "empty policy list");
  return out;
}

// ---- artifact helpers ----

namespace {

fs::path artifact(const ExperimentConfig& config, std::string_view name) {
  return config.output_dir / fs::path(std::string(name));
}

fs::path require(const ExperimentConfig& config, std::string_view stage, std::string_view name) {
  fs::path p = artifact(config, name);
  if (!fs::exists(p)) {
    throw StageError(std::string(stage), "missing upstream artifact " + p.string());
  }
  return p;
}

fs::path model_path(const ExperimentConfig& config, std::string_view policy) {
  return config.output_dir / std::string(artifacts::kModelsDir) / (std::string(policy) + ".json");
}

fs::path ensemble_path(const ExperimentConfig& config, std::string_view policy) {
  return config.output_dir / std::string(artifacts::kEnsemblesDir) /
         (std::string(policy) + ".csv");
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) { csv::write_row(out_, header); }
  void row(const std::vector<std::string>& cells) { csv::write_row(out_, cells); }
  void save(const fs::path& path) const { csv::write_file(path, out_.str()); }

 private:
  std::ostringstream out_;
};

std::string fmt(double v) { return csv::format_double(v); }
std::string fmt(const std::optional<double>& v) { return csv::format_optional(v); }

struct Cohort {
  std::vector<ApplicantRecord> train;
  std::vector<ApplicantRecord> test;
};

Cohort load_cohort(const ExperimentConfig& config, std::string_view stage) {
  const auto records = read_cohort(require(config, stage, artifacts::kApplicants));
  Cohort c{select_split(records, CohortSplit::kTrain), select_split(records, CohortSplit::kTest)};
  if (c.train.empty() || c.test.empty()) {
    throw StageError(std::string(stage), "applicants.csv needs both train and test rows");
  }
  return c;
}

template <typename Fn>
auto in_stage(std::string_view stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), e.what());
  }
}

std::vector<PolicySpec> audited_policies(const ExperimentConfig& config) {
  std::vector<PolicySpec> out = config.policies;
  if (config.replica_check) {
    PolicySpec replica = config.policies.front();
    replica.name += kReplicaSuffix;
    out.push_back(replica);
  }
  return out;
}

}  // namespace

// ---- stages ----

void stage_generate(const ExperimentConfig& config) {
  in_stage("generate", [&] {
    config.validate();
    CohortSpec spec = config.cohort;
    spec.seed = config.cohort_seed();
    write_cohort(generate_cohort(spec), artifact(config, artifacts::kApplicants));
  });
}

void stage_train(const ExperimentConfig& config, int workers) {
  in_stage("train", [&] {
    config.validate();
    const Cohort cohort = load_cohort(config, "train");
    const PipelineConfig pipeline = config.pipeline();
    std::vector<std::string> ids;
    for (const auto& r : cohort.test) ids.push_back(r.id);

    CsvWriter rankings({"policy", "applicant_id", "score", "decile", "pool", "rank", "top"});
    for (const auto& policy : config.policies) {
      const ScoredModel scored = fit_and_score(cohort.train, cohort.test, policy, pipeline, workers);
      csv::write_file(model_path(config, policy.name), scored.model.to_json());
      for (const auto& o : assign_deciles(ids, scored.scores, config.cutoff)) {
        rankings.row({policy.name, o.applicant_id, fmt(o.score), std::to_string(o.decile),
                      std::string(to_string(o.pool)), std::to_string(o.rank),
                      o.pool == Pool::kTop ? "1" : "0"});
      }
    }
    std::map<std::string, NaiveOutcome> naive;
    for (auto& o : naive_rank(cohort.test)) naive.emplace(o.applicant_id, o);
    for (const auto& r : cohort.test) {
      const NaiveOutcome& o = naive.at(r.id);
      rankings.row({std::string(kNaivePolicy), r.id, "", "", "", std::to_string(o.rank),
                    o.top ? "1" : "0"});
    }
    rankings.save(artifact(config, artifacts::kRankings));
  });
}

std::vector<ArbitrarinessComparison> arbitrariness_comparisons(
    const ConsistencyReport& reference, const ConsistencyReport& other,
    const ConsistencyReport& across) {
  const auto mask = usually_top_mask(reference);
  return {compare_arbitrariness(reference, other, across, {}, "all"),
          compare_arbitrariness(reference, other, across, mask, "usually_top")};
}

AuditResult audit_ensembles(std::span<const ApplicantRecord> train,
                            std::span<const ApplicantRecord> test, const ExperimentConfig& config,
                            int workers) {
  config.validate();
  const PipelineConfig pipeline = config.pipeline();
  const BootstrapSpec spec = config.bootstrap();
  AuditResult out;
  for (const auto& policy : audited_policies(config)) {
    out.within.push_back(build_within_set(train, test, policy, spec, pipeline, workers));
    out.within_reports.push_back(consistency_report(out.within.back(), config.tau));
  }
  for (std::size_t j = 1; j < out.within.size(); ++j) {
    out.across.push_back(build_across_set(out.within.front(), out.within[j],
                                          config.effective_across_k(), config.across_seed()));
    out.across_reports.push_back(consistency_report(out.across.back(), config.tau));
  }
  return out;
}

namespace {

void write_ensemble(const fs::path& path, const EnsembleOutcomes& e) {
  std::vector<std::string> header = {"applicant_id"};
  for (std::size_t j = 0; j < e.models; ++j) header.push_back("model_" + std::to_string(j));
  CsvWriter w(header);
  for (std::size_t i = 0; i < e.applicants(); ++i) {
    std::vector<std::string> row = {e.applicant_ids[i]};
    for (std::size_t j = 0; j < e.models; ++j) row.push_back(std::to_string(e.decile(i, j)));
    w.row(row);
  }
  w.save(path);
}

void add_consistency_rows(CsvWriter& w, const ConsistencyReport& r) {
  for (const auto& row : r.rows) {
    w.row({r.set_name, row.applicant_id, std::to_string(row.m), std::to_string(row.m1),
           fmt(row.sc), std::string(to_string(row.cls))});
  }
}

}  // namespace

void stage_audit(const ExperimentConfig& config, int workers) {
  in_stage("audit", [&] {
    config.validate();
    const Cohort cohort = load_cohort(config, "audit");
    const AuditResult result = audit_ensembles(cohort.train, cohort.test, config, workers);

    CsvWriter consistency({"set", "applicant_id", "m", "m1", "sc", "class"});
    CsvWriter shares({"policy", "metric", "mean", "p2_5", "p97_5"});
    for (std::size_t j = 0; j < result.within.size(); ++j) {
      write_ensemble(ensemble_path(config, result.within[j].name), result.within[j]);
      add_consistency_rows(consistency, result.within_reports[j]);
      for (const auto& s : ensemble_share_intervals(cohort.test, result.within[j])) {
        shares.row({s.policy, s.metric, fmt(s.mean), fmt(s.lower), fmt(s.upper)});
      }
    }
    for (const auto& r : result.across_reports) add_consistency_rows(consistency, r);
    consistency.save(artifact(config, artifacts::kConsistency));
    shares.save(artifact(config, artifacts::kEnsembleShares));
  });
}

// ---- report ----

namespace {

struct RankingRow {
  std::optional<int> decile;
  bool top = false;
};

// policy -> applicant id -> row, with policies in file order.
struct Rankings {
  std::vector<std::string> policies;
  std::map<std::string, std::map<std::string, RankingRow>> rows;
};

Rankings read_rankings(const fs::path& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t c_policy = t.column("policy"), c_id = t.column("applicant_id"),
                    c_decile = t.column("decile"), c_top = t.column("top");
  Rankings out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string& policy = row.at(c_policy);
    if (!out.rows.count(policy)) out.policies.push_back(policy);
    RankingRow r;
    try {
      if (!row.at(c_decile).empty()) r.decile = static_cast<int>(csv::parse_int(row.at(c_decile)));
      r.top = csv::parse_int(row.at(c_top)) != 0;
    } catch (const std::invalid_argument& e) {
      throw ParseError(i + 1, "decile/top", e.what());
    }
    out.rows[policy][row.at(c_id)] = r;
  }
  return out;
}

TopPool pool_for_policy(const Rankings& rankings, const std::string& policy,
                        std::span<const ApplicantRecord> test) {
  const auto& rows = rankings.rows.at(policy);
  TopPool pool{policy, {}};
  for (const auto& r : test) {
    auto it = rows.find(r.id);
    if (it == rows.end()) {
      throw Error("rankings.csv: policy '" + policy + "' has no row for " + r.id);
    }
    pool.in_top.push_back(it->second.top ? 1 : 0);
  }
  return pool;
}

std::vector<ConsistencyReport> read_consistency(const fs::path& path, double tau) {
  const csv::Table t = csv::read_file(path);
  const std::size_t c_set = t.column("set"), c_id = t.column("applicant_id"), c_m = t.column("m"),
                    c_m1 = t.column("m1");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> ids;
  std::map<std::string, std::vector<std::size_t>> m, m1;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string& set = row.at(c_set);
    if (!ids.count(set)) order.push_back(set);
    ids[set].push_back(row.at(c_id));
    long long mv = 0, m1v = 0;
    try {
      mv = csv::parse_int(row.at(c_m));
      m1v = csv::parse_int(row.at(c_m1));
    } catch (const std::invalid_argument& e) {
      throw ParseError(i + 1, "m/m1", e.what());
    }
    if (mv < 2 || m1v < 0 || m1v > mv) {
      throw ParseError(i + 1, "m1", "need m >= 2 and 0 <= m1 <= m");
    }
    m[set].push_back(static_cast<std::size_t>(mv));
    m1[set].push_back(static_cast<std::size_t>(m1v));
  }
  std::vector<ConsistencyReport> out;
  for (const auto& set : order) {
    out.push_back(classify_consistency(set, ids[set], m[set], m1[set], tau));
  }
  return out;
}

const ConsistencyReport* find_report(const std::vector<ConsistencyReport>& reports,
                                     std::string_view name) {
  for (const auto& r : reports) {
    if (r.set_name == name) return &r;
  }
  return nullptr;
}

// Splits "across(A,B)"; policy names never contain commas.
std::optional<std::pair<std::string, std::string>> split_across_name(std::string_view name) {
  constexpr std::string_view prefix = "across(";
  if (name.substr(0, prefix.size()) != prefix || name.back() != ')') return std::nullopt;
  const std::string_view inner = name.substr(prefix.size(), name.size() - prefix.size() - 1);
  const auto comma = inner.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  return std::make_pair(std::string(inner.substr(0, comma)), std::string(inner.substr(comma + 1)));
}

void add_summary_rows(CsvWriter& w, const ConsistencyReport& r) {
  const auto mask = usually_top_mask(r);
  for (const char* subset : {"all", "usually_top", "usually_not_top"}) {
    std::size_t n = 0, top = 0, not_top = 0, arbitrary = 0;
    double sc_sum = 0.0;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const std::string_view s = subset;
      if (s == "usually_top" && !mask[i]) continue;
      if (s == "usually_not_top" && mask[i]) continue;
      ++n;
      sc_sum += r.rows[i].sc;
      switch (r.rows[i].cls) {
        case ConsistencyClass::kConsistentlyTop:
          ++top;
          break;
        case ConsistencyClass::kConsistentlyNotTop:
          ++not_top;
          break;
        case ConsistencyClass::kArbitrary:
          ++arbitrary;
          break;
      }
    }
    auto share = [&](std::size_t k) {
      return n == 0 ? std::string() : fmt(static_cast<double>(k) / static_cast<double>(n));
    };
    w.row({r.set_name, subset, std::to_string(n),
           n == 0 ? std::string() : fmt(sc_sum / static_cast<double>(n)), share(top),
           share(not_top), share(arbitrary)});
  }
}

void add_ratio_row(CsvWriter& w, const std::string& pair, const RatioTest& t, double alpha) {
  const bool significant = t.p_value && *t.p_value < alpha;
  w.row({pair, t.numerator, t.denominator, t.subset, std::to_string(t.n),
         fmt(t.mean_sc_numerator), fmt(t.mean_sc_denominator), fmt(t.ar), fmt(t.p_value), "",
         significant ? "1" : "0"});
}

}  // namespace

void stage_report(const ExperimentConfig& config) {
  in_stage("report", [&] {
    config.validate();
    const Cohort cohort = load_cohort(config, "report");
    const Rankings rankings = read_rankings(require(config, "report", artifacts::kRankings));
    const auto reports =
        read_consistency(require(config, "report", artifacts::kConsistency), config.tau);

    // consistency_summary.csv
    CsvWriter summary({"set", "subset", "n", "mean_sc", "share_consistently_top",
                       "share_consistently_not_top", "share_arbitrary"});
    for (const auto& r : reports) add_summary_rows(summary, r);
    summary.save(artifact(config, artifacts::kConsistencySummary));

    // arbitrariness.csv
    std::map<std::string, RaceEthnicity> race_of;
    for (const auto& r : cohort.test) race_of[r.id] = r.race_ethnicity;
    CsvWriter arb({"pair", "numerator", "denominator", "subset", "n", "mean_sc_numerator",
                   "mean_sc_denominator", "ar", "p", "adjusted_p", "significant"});
    for (const auto& r : reports) {
      const auto names = split_across_name(r.set_name);
      if (!names) continue;
      const ConsistencyReport* a = find_report(reports, names->first);
      const ConsistencyReport* b = find_report(reports, names->second);
      if (!a || !b) {
        throw Error("consistency.csv has '" + r.set_name + "' but not both within-sets");
      }
      for (const auto& c : arbitrariness_comparisons(*a, *b, r)) {
        add_ratio_row(arb, r.set_name, c.across_vs_a, config.alpha);
        add_ratio_row(arb, r.set_name, c.across_vs_b, config.alpha);
        add_ratio_row(arb, r.set_name, c.b_vs_a, config.alpha);
      }
      std::vector<std::string> labels;
      for (const auto& row : a->rows) {
        auto it = race_of.find(row.applicant_id);
        if (it == race_of.end()) {
          throw Error("consistency.csv applicant " + row.applicant_id + " is not in the test split");
        }
        labels.push_back("race:" + std::string(to_string(it->second)));
      }
      for (const auto& g : group_arbitrariness(*a, *b, labels, config.alpha)) {
        arb.row({r.set_name, b->set_name, a->set_name, g.group, std::to_string(g.n),
                 fmt(g.mean_sc_b), fmt(g.mean_sc_a), fmt(g.ar), fmt(g.p_value), fmt(g.adjusted_p),
                 g.significant ? "1" : "0"});
      }
    }
    arb.save(artifact(config, artifacts::kArbitrariness));

    // group_impact.csv
    const std::string& baseline = config.policies.front().name;
    if (!rankings.rows.count(baseline)) {
      throw Error("rankings.csv has no rows for baseline '" + baseline + "'");
    }
    std::vector<TopPool> others;
    for (const auto& p : rankings.policies) {
      if (p != baseline) others.push_back(pool_for_policy(rankings, p, cohort.test));
    }
    const GroupImpactReport report = group_impact(
        cohort.test, pool_for_policy(rankings, baseline, cohort.test), others, config.target,
        config.alpha);
    CsvWriter impact({"policy", "target", "metric", "value", "baseline_value", "test", "p",
                      "adjusted_p", "significant"});
    const PolicyImpact& base = report.impact(baseline);
    std::map<std::string, double> base_values;
    for (auto& [metric, value] : base.metrics()) base_values[metric] = value;
    const std::string target(admitaudit::to_string(report.target));
    for (const auto& pi : report.impacts) {
      for (auto& [metric, value] : pi.metrics()) {
        std::optional<double> base_value;
        if (auto it = base_values.find(metric); it != base_values.end()) base_value = it->second;
        const ImpactComparison* cmp = nullptr;
        if (pi.policy != baseline) {
          for (const auto& c : report.comparisons) {
            if (c.policy == pi.policy && c.metric == metric) cmp = &c;
          }
        }
        impact.row({pi.policy, target, metric, fmt(value), fmt(base_value),
                    cmp ? cmp->test : std::string(), cmp ? fmt(cmp->p_value) : std::string(),
                    cmp ? fmt(cmp->adjusted_p) : std::string(),
                    cmp ? (cmp->significant ? "1" : "0") : std::string()});
      }
    }
    impact.save(artifact(config, artifacts::kGroupImpact));
  });
}

void stage_sweep(const ExperimentConfig& config) {
  in_stage("sweep", [&] {
    config.validate();
    const Cohort cohort = load_cohort(config, "sweep");
    const Rankings rankings = read_rankings(require(config, "sweep", artifacts::kRankings));
    CsvWriter w({"cutoff", "policy", "metric", "value"});
    for (const auto& policy : rankings.policies) {
      const auto& rows = rankings.rows.at(policy);
      std::vector<std::uint8_t> deciles;
      bool has_deciles = true;
      for (const auto& r : cohort.test) {
        auto it = rows.find(r.id);
        if (it == rows.end()) throw Error("rankings.csv: policy '" + policy + "' lacks " + r.id);
        if (!it->second.decile) {
          has_deciles = false;
          break;
        }
        deciles.push_back(static_cast<std::uint8_t>(*it->second.decile));
      }
      if (!has_deciles) continue;
      for (const auto& p : cutoff_sweep(cohort.test, policy, deciles)) {
        w.row({std::to_string(p.cutoff), p.policy, p.metric, fmt(p.value)});
      }
    }
    w.save(artifact(config, artifacts::kSweep));
  });
}

RunSummary run_experiment(const ExperimentConfig& config, int workers) {
  const auto start = std::chrono::steady_clock::now();
  stage_generate(config);
  stage_train(config, workers);
  stage_audit(config, workers);
  stage_report(config);
  stage_sweep(config);

  return in_stage("manifest", [&] {
    std::vector<std::string> files = {
        std::string(artifacts::kApplicants),     std::string(artifacts::kRankings),
        std::string(artifacts::kConsistency),    std::string(artifacts::kEnsembleShares),
        std::string(artifacts::kArbitrariness),  std::string(artifacts::kConsistencySummary),
        std::string(artifacts::kGroupImpact),    std::string(artifacts::kSweep)};
    for (const auto& p : config.policies) {
      files.push_back(fs::relative(model_path(config, p.name), config.output_dir).generic_string());
    }
    for (const auto& p : audited_policies(config)) {
      files.push_back(
          fs::relative(ensemble_path(config, p.name), config.output_dir).generic_string());
    }
    json hashes = json::object();
    std::string digest_input;
    for (const auto& f : files) {
      const std::string h = hex64(fnv1a64(read_text(config.output_dir / f)));
      hashes[f] = h;
      digest_input += f + "\n" + h + "\n";
    }
    RunSummary summary;
    summary.output_dir = config.output_dir;
    summary.content_hash = fnv1a64(digest_input);
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {
        {"version", std::string(kVersion)},
        {"config_hash", hex64(config.hash())},
        {"config", json::parse(config.to_json())},
        {"seeds",
         {{"master", config.seed},
          {"cohort", config.cohort_seed()},
          {"bootstrap", config.bootstrap_seed()},
          {"across", config.across_seed()}}},
        {"threads", workers},
        {"wall_time_seconds", summary.wall_seconds},
        {"artifacts", hashes},
        {"content_hash", hex64(summary.content_hash)}};
    csv::write_file(artifact(config, artifacts::kManifest), manifest.dump(2) + "\n");
    return summary;
  });
}

}  // namespace admitaudit
