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

#include "admitaudit/audit.h"

#include <algorithm>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>

#include "admitaudit/error.h"
#include "admitaudit/parallel.h"
#include "admitaudit/seeding.h"
#include "admitaudit/stats.h"

namespace admitaudit {

ScoredModel fit_and_score(std::span<const ApplicantRecord> train,
                          std::span<const ApplicantRecord> test, const PolicySpec& policy,
                          const PipelineConfig& config, int workers) {
  const PreprocessorState state = fit_preprocessor(train, config.schema, config.preprocess);
  const DesignMatrix train_matrix = transform(train, state, policy);
  const std::vector<std::uint8_t> labels = training_labels(train, config.target);
  ScoredModel out;
  out.model = admitaudit::train(train_matrix, labels, config.gbdt, config.target, workers);
  out.scores = out.model.predict_proba(transform(test, state, policy));
  return out;
}

void BootstrapSpec::validate() const {
  if (m < 2) throw ValidationError("m", "need at least 2 bootstrapped models");
  if (max_redraws < 1) throw ValidationError("max_redraws", "must be >= 1");
}

std::uint64_t bootstrap_seed(std::uint64_t master_seed, std::string_view policy_name,
                             std::size_t index, std::size_t attempt) {
  return derive_seed(master_seed, std::string("bootstrap/") + std::string(policy_name), index,
                     attempt);
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("bootstrap_indices: empty population");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::vector<std::size_t> EnsembleOutcomes::top_counts() const {
  std::vector<std::size_t> counts(applicants(), 0);
  for (std::size_t j = 0; j < models; ++j) {
    const std::uint8_t* col = deciles.data() + j * applicants();
    for (std::size_t i = 0; i < applicants(); ++i) counts[i] += col[i] >= cutoff ? 1 : 0;
  }
  return counts;
}

std::vector<std::uint8_t> EnsembleOutcomes::top_column(std::size_t model) const {
  std::vector<std::uint8_t> col(applicants());
  for (std::size_t i = 0; i < applicants(); ++i) col[i] = in_top(i, model) ? 1 : 0;
  return col;
}

EnsembleOutcomes build_within_set(std::span<const ApplicantRecord> train,
                                  std::span<const ApplicantRecord> test,
                                  const PolicySpec& policy, const BootstrapSpec& spec,
                                  const PipelineConfig& config, int workers) {
  spec.validate();
  if (train.empty()) throw Error("build_within_set: empty training cohort");
  EnsembleOutcomes out;
  out.name = policy.name;
  out.cutoff = config.cutoff;
  out.models = spec.m;
  for (const auto& r : test) out.applicant_ids.push_back(r.id);
  const std::size_t n_test = test.size();
  out.deciles.assign(spec.m * n_test, 0);
  out.redraws.assign(spec.m, 0);
  const std::vector<std::uint8_t> all_labels = training_labels(train, config.target);

  std::mutex log_mutex;
  parallel_for(spec.m, workers, [&](std::size_t j) {
    std::vector<std::size_t> idx;
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > spec.max_redraws) {
        throw Error("build_within_set: policy '" + policy.name + "', model " +
                    std::to_string(j) + ": every resample had a single label class");
      }
      idx = bootstrap_indices(train.size(), bootstrap_seed(spec.master_seed, policy.name, j,
                                                           attempt));
      std::size_t positives = 0;
      for (auto i : idx) positives += all_labels[i];
      if (positives > 0 && positives < idx.size()) break;
      out.redraws[j] = attempt + 1;
      std::lock_guard<std::mutex> lock(log_mutex);
      std::clog << "warning: policy '" << policy.name << "' model " << j
                << ": single-class resample redrawn (attempt " << attempt + 1 << ")\n";
    }
    std::vector<ApplicantRecord> sample;
    sample.reserve(idx.size());
    for (auto i : idx) sample.push_back(train[i]);
    const ScoredModel scored = fit_and_score(sample, test, policy, config, 1);
    const std::vector<std::uint8_t> d = compute_deciles(out.applicant_ids, scored.scores);
    std::copy(d.begin(), d.end(), out.deciles.begin() + static_cast<std::ptrdiff_t>(j * n_test));
  });
  return out;
}

std::string across_set_name(std::string_view a, std::string_view b) {
  return "across(" + std::string(a) + "," + std::string(b) + ")";
}

namespace {

std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t k,
                                                    std::uint64_t seed) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

EnsembleOutcomes build_across_set(const EnsembleOutcomes& a, const EnsembleOutcomes& b,
                                  std::size_t k, std::uint64_t seed) {
  if (a.applicant_ids != b.applicant_ids) {
    throw Error("build_across_set: '" + a.name + "' and '" + b.name +
                "' cover different applicants");
  }
  if (a.cutoff != b.cutoff) throw Error("build_across_set: within-sets use different cutoffs");
  if (k == 0 || k > a.models || k > b.models) {
    throw Error("build_across_set: k must lie in 1..min(M_a, M_b)");
  }
  EnsembleOutcomes out;
  out.name = across_set_name(a.name, b.name);
  out.applicant_ids = a.applicant_ids;
  out.cutoff = a.cutoff;
  out.models = 2 * k;
  const std::size_t n = a.applicants();
  out.deciles.reserve(out.models * n);
  const std::string label = "across/" + a.name + "/" + b.name;
  for (const auto* src : {&a, &b}) {
    const auto picked = sample_without_replacement(
        src->models, k, derive_seed(seed, label, src == &a ? 0 : 1));
    for (auto j : picked) {
      const auto begin = src->deciles.begin() + static_cast<std::ptrdiff_t>(j * n);
      out.deciles.insert(out.deciles.end(), begin, begin + static_cast<std::ptrdiff_t>(n));
      out.redraws.push_back(src->redraws.empty() ? 0 : src->redraws[j]);
    }
  }
  return out;
}

double self_consistency(std::size_t m0, std::size_t m1) {
  const std::size_t m = m0 + m1;
  if (m < 2) throw Error("self_consistency: need at least 2 models");
  const auto pairs = static_cast<double>(m * (m - 1));
  const auto agreeing = static_cast<double>(m * (m - 1) - 2 * m0 * m1);
  return agreeing / pairs;
}

namespace {

double mean_of(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

double arbitrariness_ratio(std::span<const double> sc_across, std::span<const double> sc_within) {
  if (sc_across.empty() || sc_within.empty()) {
    throw Error("arbitrariness_ratio: both sc lists must be non-empty");
  }
  const double within = mean_of(sc_within);
  if (within >= 1.0) {
    throw Error("arbitrariness_ratio: mean within-set sc is 1; ratio undefined");
  }
  return (1.0 - mean_of(sc_across)) / (1.0 - within);
}

std::string_view to_string(ConsistencyClass c) {
  switch (c) {
    case ConsistencyClass::kConsistentlyTop:
      return "consistently_top";
    case ConsistencyClass::kConsistentlyNotTop:
      return "consistently_not_top";
    case ConsistencyClass::kArbitrary:
      return "arbitrary";
  }
  return "arbitrary";
}

ConsistencyClass classify(std::size_t m, std::size_t m1, double tau) {
  if (m1 > m) throw Error("classify: m1 exceeds m");
  const double sc = self_consistency(m - m1, m1);
  if (sc < tau) return ConsistencyClass::kArbitrary;
  return 2 * m1 > m ? ConsistencyClass::kConsistentlyTop : ConsistencyClass::kConsistentlyNotTop;
}

std::vector<double> ConsistencyReport::sc_values() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.sc);
  return out;
}

double ConsistencyReport::mean_sc() const {
  if (rows.empty()) return 1.0;
  const auto sc = sc_values();
  return mean_of(sc);
}

ConsistencyReport classify_consistency(std::string set_name,
                                       std::span<const std::string> applicant_ids,
                                       std::span<const std::size_t> m,
                                       std::span<const std::size_t> m1, double tau) {
  if (applicant_ids.size() != m.size() || m.size() != m1.size()) {
    throw Error("classify_consistency: input lengths differ");
  }
  ConsistencyReport report;
  report.set_name = std::move(set_name);
  report.tau = tau;
  report.rows.reserve(m.size());
  std::size_t top = 0, not_top = 0, arbitrary = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m1[i] > m[i]) throw Error("classify_consistency: M1 exceeds M for " + applicant_ids[i]);
    ApplicantConsistency row;
    row.applicant_id = applicant_ids[i];
    row.m = m[i];
    row.m1 = m1[i];
    row.sc = self_consistency(row.m0(), row.m1);
    row.cls = classify(row.m, row.m1, tau);
    switch (row.cls) {
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
    report.rows.push_back(std::move(row));
  }
  if (!m.empty()) {
    const auto n = static_cast<double>(m.size());
    report.share_consistently_top = static_cast<double>(top) / n;
    report.share_consistently_not_top = static_cast<double>(not_top) / n;
    report.share_arbitrary = static_cast<double>(arbitrary) / n;
  }
  return report;
}

ConsistencyReport consistency_report(const EnsembleOutcomes& ensemble, double tau) {
  const std::vector<std::size_t> m(ensemble.applicants(), ensemble.models);
  const std::vector<std::size_t> m1 = ensemble.top_counts();
  return classify_consistency(ensemble.name, ensemble.applicant_ids, m, m1, tau);
}

RatioTest ratio_test(const ConsistencyReport& numerator, const ConsistencyReport& denominator,
                     std::span<const std::uint8_t> mask, std::string subset) {
  if (numerator.rows.size() != denominator.rows.size()) {
    throw Error("ratio_test: reports cover different applicants");
  }
  if (!mask.empty() && mask.size() != numerator.rows.size()) {
    throw Error("ratio_test: mask length differs from report");
  }
  RatioTest out;
  out.numerator = numerator.set_name;
  out.denominator = denominator.set_name;
  out.subset = std::move(subset);
  std::vector<double> num, den, diffs;
  for (std::size_t i = 0; i < numerator.rows.size(); ++i) {
    if (numerator.rows[i].applicant_id != denominator.rows[i].applicant_id) {
      throw Error("ratio_test: applicant order differs at row " + std::to_string(i));
    }
    if (!mask.empty() && !mask[i]) continue;
    num.push_back(numerator.rows[i].sc);
    den.push_back(denominator.rows[i].sc);
    diffs.push_back(numerator.rows[i].sc - denominator.rows[i].sc);
  }
  out.n = num.size();
  if (num.empty()) return out;
  out.mean_sc_numerator = mean_of(num);
  out.mean_sc_denominator = mean_of(den);
  if (out.mean_sc_denominator < 1.0) out.ar = arbitrariness_ratio(num, den);
  if (std::any_of(diffs.begin(), diffs.end(), [](double d) { return d != 0.0; })) {
    out.p_value = stats::wilcoxon_signed_rank(diffs).p_value;
  }
  return out;
}

ArbitrarinessComparison compare_arbitrariness(const ConsistencyReport& within_a,
                                              const ConsistencyReport& within_b,
                                              const ConsistencyReport& across,
                                              std::span<const std::uint8_t> mask,
                                              std::string subset) {
  ArbitrarinessComparison out;
  out.policy_a = within_a.set_name;
  out.policy_b = within_b.set_name;
  out.subset = subset;
  out.across_vs_a = ratio_test(across, within_a, mask, subset);
  out.across_vs_b = ratio_test(across, within_b, mask, subset);
  out.b_vs_a = ratio_test(within_b, within_a, mask, subset);
  out.mean_within_a = out.across_vs_a.mean_sc_denominator;
  out.mean_within_b = out.across_vs_b.mean_sc_denominator;
  out.mean_across = out.across_vs_a.mean_sc_numerator;
  return out;
}

std::vector<std::uint8_t> usually_top_mask(const ConsistencyReport& report) {
  std::vector<std::uint8_t> mask;
  mask.reserve(report.rows.size());
  for (const auto& r : report.rows) mask.push_back(r.usually_top() ? 1 : 0);
  return mask;
}

std::vector<GroupArbitrariness> group_arbitrariness(const ConsistencyReport& a,
                                                    const ConsistencyReport& b,
                                                    std::span<const std::string> group_labels,
                                                    double alpha) {
  if (a.rows.size() != b.rows.size() || a.rows.size() != group_labels.size()) {
    throw Error("group_arbitrariness: reports and labels differ in length");
  }
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < group_labels.size(); ++i) {
    if (a.rows[i].applicant_id != b.rows[i].applicant_id) {
      throw Error("group_arbitrariness: applicant order differs at row " + std::to_string(i));
    }
    members[group_labels[i]].push_back(i);
  }
  std::vector<GroupArbitrariness> out;
  std::vector<double> p_values;
  std::vector<std::size_t> with_p;
  for (const auto& [group, idx] : members) {
    GroupArbitrariness g;
    g.group = group;
    g.n = idx.size();
    std::vector<double> sa, sb, diffs;
    for (auto i : idx) {
      sa.push_back(a.rows[i].sc);
      sb.push_back(b.rows[i].sc);
      diffs.push_back(b.rows[i].sc - a.rows[i].sc);
    }
    g.mean_sc_a = mean_of(sa);
    g.mean_sc_b = mean_of(sb);
    if (g.n < 2) {
      g.insufficient_n = true;
    } else {
      if (g.mean_sc_a < 1.0) g.ar = arbitrariness_ratio(sb, sa);
      if (std::any_of(diffs.begin(), diffs.end(), [](double d) { return d != 0.0; })) {
        g.p_value = stats::wilcoxon_signed_rank(diffs).p_value;
        p_values.push_back(*g.p_value);
        with_p.push_back(out.size());
      }
    }
    out.push_back(std::move(g));
  }
  const auto correction = stats::bonferroni(p_values, alpha);
  for (std::size_t k = 0; k < with_p.size(); ++k) {
    out[with_p[k]].adjusted_p = correction.adjusted[k];
    out[with_p[k]].significant = correction.significant[k];
  }
  return out;
}

}  // namespace admitaudit
