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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// when a criterion fails that is not listed as a known limitation.
//
//   acceptance_test [--quick]
//
// --quick skips the desk-scale runs (qualitative and end-to-end checks, and
// the informational GBDT settings sweep).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "admitaudit/audit.h"
#include "admitaudit/csv.h"
#include "admitaudit/error.h"
#include "admitaudit/experiment.h"
#include "admitaudit/features.h"
#include "admitaudit/gbdt.h"
#include "admitaudit/groupstats.h"
#include "admitaudit/ranking.h"
#include "admitaudit/stats.h"
#include "admitaudit/synthgen.h"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace admitaudit;
using namespace admitaudit::stats;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
  // Fails for a reason recorded as a known limitation.
  bool known_limitation = false;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("admitaudit_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

// ---- oracle and arithmetic checks ----

Verdict self_consistency_oracle() {
  std::size_t cases = 0, mismatches = 0;
  for (std::size_t m = 2; m <= 200; ++m) {
    for (std::size_t m1 = 0; m1 <= m; ++m1) {
      ++cases;
      if (self_consistency(m - m1, m1) != oracle::pairwise_agreement(m - m1, m1)) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(cases) + " splits, " + std::to_string(mismatches) +
                               " mismatches"};
}

Verdict arbitrariness_arithmetic() {
  const std::vector<double> equal = {0.2, 0.7, 0.93, 1.0};
  const bool unit = arbitrariness_ratio(equal, equal) == 1.0;
  const std::vector<double> across = {0.8, 0.9, 0.85}, within = {0.95, 0.85, 0.9};
  const double ar = arbitrariness_ratio(across, within);
  const bool ratio = std::fabs(ar - 1.5) <= 1e-12;
  bool raises = false;
  try {
    const std::vector<double> ones = {1.0, 1.0};
    arbitrariness_ratio(across, ones);
  } catch (const Error&) {
    raises = true;
  }
  return {unit && ratio && raises, "equal lists -> " + std::string(unit ? "1" : "not 1") +
                                       ", 0.15/0.10 -> " + fmt(ar) + ", within mean 1 " +
                                       (raises ? "raises" : "does not raise")};
}

Verdict sc_threshold_semantics() {
  const double sc = self_consistency(25, 975);
  const bool value = std::fabs(sc - 0.95120) < 5e-6;
  const bool consistent = classify(1000, 975) == ConsistencyClass::kConsistentlyTop &&
                          classify(1000, 25) == ConsistencyClass::kConsistentlyNotTop;
  const bool arbitrary = classify(1000, 500) == ConsistencyClass::kArbitrary;
  // 97.5% agreement is the boundary: one more dissenting model crosses it.
  const bool boundary = classify(1000, 974) == ConsistencyClass::kArbitrary;
  return {value && consistent && arbitrary && boundary,
          "sc(25,975)=" + fmt(sc) + ", (25,975) " +
              std::string(to_string(classify(1000, 975))) + ", (500,500) " +
              std::string(to_string(classify(1000, 500))) + ", (26,974) " +
              std::string(to_string(classify(1000, 974)))};
}

Verdict exact_tests_vs_enumeration() {
  std::size_t binom_cases = 0, binom_bad = 0;
  for (unsigned n = 1; n <= 12; ++n) {
    for (double p0 : {0.05, 0.173, 0.3, 0.5, 0.62, 0.9}) {
      for (unsigned k = 0; k <= n; ++k) {
        ++binom_cases;
        if (std::fabs(binomial_test(k, n, p0) - oracle::binomial_two_sided(k, n, p0)) > 1e-12) {
          ++binom_bad;
        }
      }
    }
  }

  // Every labeling of n distinct values into two non-empty groups, n <= 12.
  std::mt19937_64 rng(17);
  std::size_t mw_cases = 0, mw_bad = 0;
  double mw_worst = 0.0, mw_worst_balanced = 0.0;
  for (unsigned n = 2; n <= 12; ++n) {
    std::vector<double> values(n);
    std::iota(values.begin(), values.end(), 1.0);
    std::shuffle(values.begin(), values.end(), rng);
    for (std::uint32_t mask = 1; mask + 1 < (1U << n); ++mask) {
      std::vector<double> x, y;
      for (unsigned i = 0; i < n; ++i) (mask >> i & 1U ? x : y).push_back(values[i]);
      const TestResult r = mann_whitney_u(x, y);
      ++mw_cases;
      if (!r.exact || r.p_value != oracle::mann_whitney_two_sided(x, y)) ++mw_bad;
      if (n == kExactRankTestMaxN) {
        const double d = std::fabs(mann_whitney_u(x, y, RankTestMethod::kNormal).p_value -
                                   r.p_value);
        mw_worst = std::max(mw_worst, d);
        if (x.size() == n / 2) mw_worst_balanced = std::max(mw_worst_balanced, d);
      }
    }
  }

  std::size_t w_cases = 0, w_bad = 0;
  double w_worst = 0.0;
  for (unsigned n = 1; n <= 12; ++n) {
    std::vector<double> mags(n);
    for (unsigned i = 0; i < n; ++i) mags[i] = 0.5 + 1.7 * i;
    std::shuffle(mags.begin(), mags.end(), rng);
    for (std::uint32_t signs = 0; signs < (1U << n); ++signs) {
      std::vector<double> d(n);
      for (unsigned i = 0; i < n; ++i) d[i] = signs >> i & 1U ? mags[i] : -mags[i];
      const WilcoxonResult r = wilcoxon_signed_rank(d);
      ++w_cases;
      if (!r.exact || r.p_value != oracle::wilcoxon_two_sided(d)) ++w_bad;
      if (n == kExactRankTestMaxN) {
        w_worst = std::max(w_worst, std::fabs(wilcoxon_signed_rank(d, RankTestMethod::kNormal)
                                                  .p_value -
                                              r.p_value));
      }
    }
  }

  const bool exact_ok = binom_bad == 0 && mw_bad == 0 && w_bad == 0;
  const bool approx_ok = mw_worst <= 0.01 && w_worst <= 0.01;
  Verdict o;
  o.pass = exact_ok && approx_ok;
  o.known_limitation = exact_ok && !approx_ok;
  o.detail = "exact: binomial " + std::to_string(binom_bad) + "/" + std::to_string(binom_cases) +
             ", mann-whitney " + std::to_string(mw_bad) + "/" + std::to_string(mw_cases) +
             ", wilcoxon " + std::to_string(w_bad) + "/" + std::to_string(w_cases) +
             " mismatches; normal approximation at n=12 worst |dp|: mann-whitney " +
             fmt(mw_worst) + " (6/6 split " + fmt(mw_worst_balanced) + "), wilcoxon " +
             fmt(w_worst) + " (limit 0.01)";
  return o;
}

// ---- GBDT ----

struct Design {
  DesignMatrix matrix;
  std::vector<std::uint8_t> labels;
};

Design cohort_design() {
  CohortSpec spec;
  spec.n_train = 2000;
  spec.n_test = 100;
  spec.seed = 41;
  const auto train = select_split(generate_cohort(spec), CohortSplit::kTrain);
  const auto state = fit_preprocessor(train, FeatureSchema::builtin());
  return {transform(train, state, builtin_policy("ml_baseline")),
          training_labels(train, TargetDefinition::kAdmitted)};
}

double auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      wins += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

Verdict gbdt_properties() {
  const Design d = cohort_design();
  GbdtConfig config;
  config.n_trees = 40;

  TrainingTrace trace;
  const TrainedModel m1 = train(d.matrix, d.labels, config, TargetDefinition::kAdmitted, 1, &trace);
  bool monotone = trace.loss.size() == 41;
  for (std::size_t t = 1; t < trace.loss.size(); ++t) {
    monotone = monotone && trace.loss[t] <= trace.loss[t - 1];
  }

  double grad_err = 0.0, hess_err = 0.0;
  const double h = 1e-5;
  for (double margin : {-6.0, -2.5, -0.3, 0.0, 0.7, 3.1, 8.0}) {
    for (double y : {0.0, 1.0}) {
      const double fd_grad =
          (logistic::loss(margin + h, y) - logistic::loss(margin - h, y)) / (2.0 * h);
      const double fd_hess =
          (logistic::gradient(margin + h, y) - logistic::gradient(margin - h, y)) / (2.0 * h);
      grad_err = std::max(grad_err, std::fabs(fd_grad - logistic::gradient(margin, y)));
      hess_err = std::max(hess_err, std::fabs(fd_hess - logistic::hessian(margin)));
    }
  }
  const bool derivatives = grad_err <= 1e-6 && hess_err <= 1e-6;

  // Two features, one of which separates the classes at a threshold.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  DesignMatrix sep;
  sep.columns = {{"noise", "noise", ColumnRole::kRawNumeric, ""},
                 {"signal", "signal", ColumnRole::kRawNumeric, ""}};
  std::vector<std::uint8_t> sep_labels;
  for (std::size_t i = 0; i < 200; ++i) {
    const double signal = g(rng);
    sep.row_ids.push_back("r" + std::to_string(i));
    sep.values.push_back(g(rng));
    sep.values.push_back(signal);
    sep_labels.push_back(signal > 0.3 ? 1 : 0);
  }
  GbdtConfig sep_config;
  sep_config.n_trees = 10;
  sep_config.n_bins = 256;
  sep_config.min_samples_leaf = 5;
  const double sep_auc = auc(train(sep, sep_labels, sep_config).predict_proba(sep), sep_labels);

  const TrainedModel m2 = train(d.matrix, d.labels, config, TargetDefinition::kAdmitted, 2);
  const TrainedModel m8 = train(d.matrix, d.labels, config, TargetDefinition::kAdmitted, 8);
  const bool deterministic = m1 == m2 && m1 == m8 && m1.to_json() == m8.to_json() &&
                             m1.predict_proba(d.matrix) == m8.predict_proba(d.matrix);

  return {monotone && derivatives && sep_auc == 1.0 && deterministic,
          std::string("loss monotone ") + (monotone ? "yes" : "no") + ", max |fd-grad| " +
              fmt(grad_err) + ", max |fd-hess| " + fmt(hess_err) + ", separable AUC " +
              fmt(sep_auc) + ", workers 1/2/8 identical " + (deterministic ? "yes" : "no")};
}

// ---- deciles and pools ----

Verdict decile_pool_invariants() {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> size(10, 997);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t bad_partition = 0, bad_fraction = 0, trials = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = t < 100 ? 10 * (1 + t) : size(rng);
    std::vector<std::string> ids;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("a" + std::to_string(i));
      // Coarse scores so ties occur.
      scores.push_back(std::round(u(rng) * 50.0));
    }
    const auto deciles = compute_deciles(ids, scores);
    std::vector<std::size_t> counts(kDeciles + 1, 0);
    for (auto dec : deciles) ++counts[dec];
    const auto [lo, hi] = std::minmax_element(counts.begin() + 1, counts.end());
    if (*hi - *lo > 1) ++bad_partition;
    for (int cutoff = 1; cutoff <= kDeciles; ++cutoff) {
      std::size_t top = 0;
      for (auto dec : deciles) top += dec >= cutoff;
      // Exact when n divides into tenths. Otherwise the leftover rows sit in
      // the highest deciles: never below the nominal share, and off by less
      // than one row per top decile.
      const double nominal = static_cast<double>(n) * (11 - cutoff) / 10.0;
      const double got = static_cast<double>(top);
      const bool ok = n % 10 == 0 ? got == nominal
                                  : got >= nominal && got - nominal < 11 - cutoff;
      if (!ok) ++bad_fraction;
    }
    ++trials;
  }

  // At cutoff 1 every applicant is in the top pool, so the sweep shares are
  // the cohort shares.
  CohortSpec spec;
  spec.n_train = 100;
  spec.n_test = 1500;
  spec.seed = 5;
  const auto test = select_split(generate_cohort(spec), CohortSplit::kTest);
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (const auto& r : test) {
    ids.push_back(r.id);
    scores.push_back(r.gpa);
  }
  const auto sweep = cutoff_sweep(test, "gpa", compute_deciles(ids, scores));
  std::map<std::string, double> expected;
  double urm = 0, fg = 0, li = 0, adm = 0, aow = 0, pct_sum = 0, submitters = 0;
  std::map<RaceEthnicity, double> race;
  for (const auto& r : test) {
    urm += r.urm_flag;
    fg += r.first_gen;
    li += r.fee_waiver;
    adm += r.outcome == admitaudit::Outcome::kAdmitted;
    aow += r.admitted_or_waitlisted();
    race[r.race_ethnicity] += 1;
    if (r.best_test_percentile()) {
      pct_sum += *r.best_test_percentile();
      submitters += 1;
    }
  }
  const double n = static_cast<double>(test.size());
  expected[std::string(kUrmShare)] = urm / n;
  expected[std::string(kFirstGenShare)] = fg / n;
  expected[std::string(kLowIncomeShare)] = li / n;
  expected[std::string(kAdmittedShare)] = adm / n;
  expected[std::string(kAdmittedOrWaitlistedShare)] = aow / n;
  expected[std::string(kMeanTestPercentile)] = pct_sum / submitters;
  for (RaceEthnicity r : kAllRaces) expected[race_share_metric(r)] = race[r] / n;
  double worst = 0.0;
  std::size_t matched = 0;
  for (const auto& p : sweep) {
    if (p.cutoff != 1) continue;
    auto it = expected.find(p.metric);
    if (it == expected.end()) continue;
    ++matched;
    worst = std::max(worst, std::fabs(p.value - it->second));
  }
  const bool sweep_ok = matched == expected.size() && worst <= 1e-12;

  return {bad_partition == 0 && bad_fraction == 0 && sweep_ok,
          std::to_string(trials) + " cohorts: " + std::to_string(bad_partition) +
              " uneven partitions, " + std::to_string(bad_fraction) +
              " wrong top fractions; cutoff-1 sweep worst |share - cohort| " + fmt(worst) +
              " over " + std::to_string(matched) + " metrics"};
}

// ---- naive baseline ----

Verdict naive_baseline_properties() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> band(kMinMathBand, kMaxMathBand);
  std::uniform_int_distribution<int> pct(40, 99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t dominance = 0, keying = 0, missing_order = 0, rank_bad = 0;
  const int cohorts = 1000;
  for (int c = 0; c < cohorts; ++c) {
    std::vector<ApplicantRecord> records(60);
    for (std::size_t i = 0; i < records.size(); ++i) {
      ApplicantRecord& r = records[i];
      r.id = "n" + std::to_string(i);
      r.highest_math = band(rng);
      if (u(rng) < 0.6) r.sat_percentile = pct(rng);
      if (u(rng) < 0.4) r.act_percentile = pct(rng);
    }
    const auto ranked = naive_rank(records);
    std::map<std::string, const ApplicantRecord*> by_id;
    for (const auto& r : records) by_id[r.id] = &r;

    // Independent key: (band, submitted, best percentile).
    auto key = [&](const std::string& id) {
      const ApplicantRecord& r = *by_id.at(id);
      double best = -1.0;
      if (r.sat_percentile) best = *r.sat_percentile;
      if (r.act_percentile) best = std::max(best, *r.act_percentile);
      return std::tuple<int, bool, double>(r.highest_math, best >= 0.0, best);
    };
    for (const auto& o : ranked) {
      const auto [b, sub, best] = key(o.applicant_id);
      if (o.key.math_band != b || o.key.submitted() != sub ||
          (sub && *o.key.best_percentile != best)) {
        ++keying;
      }
    }
    for (std::size_t i = 1; i < ranked.size(); ++i) {
      const auto prev = key(ranked[i - 1].applicant_id), cur = key(ranked[i].applicant_id);
      if (std::get<0>(prev) < std::get<0>(cur)) ++dominance;
      if (std::get<0>(prev) == std::get<0>(cur) && !std::get<1>(prev) && std::get<1>(cur)) {
        ++missing_order;
      }
      if (std::get<0>(prev) == std::get<0>(cur) && std::get<1>(prev) && std::get<1>(cur) &&
          std::get<2>(prev) < std::get<2>(cur)) {
        ++keying;
      }
    }
    for (const auto& o : ranked) {
      std::size_t better = 0;
      for (const auto& other : ranked) better += key(other.applicant_id) > key(o.applicant_id);
      if (o.rank != better + 1) ++rank_bad;
    }
  }
  return {dominance + keying + missing_order + rank_bad == 0,
          std::to_string(cohorts) + " cohorts: " + std::to_string(dominance) +
              " band inversions, " + std::to_string(keying) + " keying errors, " +
              std::to_string(missing_order) + " non-submitters ahead of submitters, " +
              std::to_string(rank_bad) + " rank errors"};
}

// ---- desk-scale runs ----

struct SeedResult {
  bool a = false, b = false, c = false, d = false, e = false, f = false;
  std::string detail;
};

const std::vector<std::string>& find_row(const csv::Table& t,
                                         const std::map<std::string, std::string>& where) {
  for (const auto& row : t.rows) {
    bool ok = true;
    for (const auto& [col, value] : where) ok = ok && row[t.column(col)] == value;
    if (ok) return row;
  }
  throw Error("no matching row");
}

double num(const csv::Table& t, const std::vector<std::string>& row, const std::string& col) {
  const std::string& cell = row[t.column(col)];
  return cell.empty() ? std::nan("") : csv::parse_double(cell);
}

SeedResult qualitative_seed(std::uint64_t seed) {
  ExperimentConfig config = ExperimentConfig::demo();
  config.seed = seed;
  config.replica_check = true;
  config.output_dir = scratch("seed" + std::to_string(seed));
  run_experiment(config, workers());

  const csv::Table gi = csv::read_file(config.output_dir / artifacts::kGroupImpact);
  auto impact = [&](const std::string& policy, std::string_view metric) {
    return find_row(gi, {{"policy", policy}, {"metric", std::string(metric)}});
  };
  SeedResult r;
  const auto race = impact("no_race", kUrmShare);
  const double base_urm = num(gi, race, "baseline_value");
  const double race_urm = num(gi, race, "value");
  r.a = race_urm < base_urm && race[gi.column("significant")] == "1";
  const double unc_urm = num(gi, impact("no_uncontrollable", kUrmShare), "value");
  r.b = unc_urm <= race_urm;
  const auto major = impact("no_major", kUrmShare);
  r.c = major[gi.column("significant")] == "0";
  double lo = 1.0, hi = 0.0;
  for (const char* p : {"ml_baseline", "no_race", "no_major", "no_uncontrollable"}) {
    const double v = num(gi, impact(p, kAdmittedOrWaitlistedShare), "value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.d = hi - lo < 0.05;

  const csv::Table arb = csv::read_file(config.output_dir / artifacts::kArbitrariness);
  const std::string across = across_set_name("ml_baseline", "no_race");
  const auto e = find_row(arb, {{"pair", across}, {"numerator", across},
                                {"denominator", "ml_baseline"}, {"subset", "all"}});
  const double ar_e = num(arb, e, "ar"), p_e = num(arb, e, "p");
  r.e = ar_e > 1.0 && p_e < 0.05;
  const std::string replica = "ml_baseline" + std::string(kReplicaSuffix);
  const std::string same = across_set_name("ml_baseline", replica);
  const auto f = find_row(arb, {{"pair", same}, {"numerator", same},
                                {"denominator", "ml_baseline"}, {"subset", "all"}});
  const double ar_f = num(arb, f, "ar");
  r.f = ar_f >= 0.9 && ar_f <= 1.1;

  r.detail = "seed " + std::to_string(seed) + ": urm base " + fmt(base_urm) + " no_race " +
             fmt(race_urm) + " (adj p " + fmt(num(gi, race, "adjusted_p")) + ") no_unc " +
             fmt(unc_urm) + " no_major " + fmt(num(gi, major, "value")) + " (adj p " +
             fmt(num(gi, major, "adjusted_p")) + "); aow spread " + fmt(hi - lo) +
             "; ar(across no_race) " + fmt(ar_e) + " p " + fmt(p_e) + "; ar(replica) " +
             fmt(ar_f);
  fs::remove_all(config.output_dir);
  return r;
}

std::vector<std::pair<std::string, Verdict>> qualitative() {
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<SeedResult> results;
  for (auto s : seeds) {
    results.push_back(qualitative_seed(s));
    std::printf("  %s\n", results.back().detail.c_str());
    std::fflush(stdout);
  }
  auto vote = [&](bool SeedResult::*field) {
    std::size_t yes = 0;
    for (const auto& r : results) yes += r.*field;
    return Verdict{2 * yes > results.size(),
                   std::to_string(yes) + "/" + std::to_string(results.size()) + " seeds"};
  };
  return {{"qualitative_a_no_race_lowers_urm_share", vote(&SeedResult::a)},
          {"qualitative_b_no_uncontrollable_at_most_no_race", vote(&SeedResult::b)},
          {"qualitative_c_no_major_not_significant", vote(&SeedResult::c)},
          {"qualitative_d_merit_share_stable_within_5pp", vote(&SeedResult::d)},
          {"qualitative_e_policy_change_adds_arbitrariness", vote(&SeedResult::e)},
          {"qualitative_f_identical_policy_ratio_near_1", vote(&SeedResult::f)}};
}

// Informational: the direction of the headline effects under other GBDT
// settings. Smaller ensembles keep this to a few minutes.
void gbdt_config_sweep() {
  struct Variant {
    const char* label;
    int n_trees, max_depth;
    double learning_rate;
  };
  for (const Variant v : {Variant{"depth3", 50, 3, 0.1}, Variant{"depth6", 50, 6, 0.1},
                          Variant{"trees100_lr0.05", 100, 4, 0.05}}) {
    ExperimentConfig config = ExperimentConfig::demo();
    config.seed = 1;
    config.policies = {builtin_policy("ml_baseline"), builtin_policy("no_race")};
    config.m = 40;
    config.gbdt.n_trees = v.n_trees;
    config.gbdt.max_depth = v.max_depth;
    config.gbdt.learning_rate = v.learning_rate;
    config.output_dir = scratch(std::string("sweep_") + v.label);
    const auto start = std::chrono::steady_clock::now();
    try {
      run_experiment(config, workers());
      const csv::Table gi = csv::read_file(config.output_dir / artifacts::kGroupImpact);
      const auto race =
          find_row(gi, {{"policy", "no_race"}, {"metric", std::string(kUrmShare)}});
      const csv::Table arb = csv::read_file(config.output_dir / artifacts::kArbitrariness);
      const std::string across = across_set_name("ml_baseline", "no_race");
      const auto e = find_row(arb, {{"pair", across}, {"numerator", across},
                                    {"denominator", "ml_baseline"}, {"subset", "all"}});
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("INFO gbdt_sweep %s (m=40, seed 1): urm base %s no_race %s (adj p %s); "
                  "ar(across no_race) %s p %s [%s s]\n",
                  v.label, fmt(num(gi, race, "baseline_value")).c_str(),
                  fmt(num(gi, race, "value")).c_str(), fmt(num(gi, race, "adjusted_p")).c_str(),
                  fmt(num(arb, e, "ar")).c_str(), fmt(num(arb, e, "p")).c_str(),
                  fmt(secs).c_str());
    } catch (const std::exception& ex) {
      std::printf("INFO gbdt_sweep %s: threw: %s\n", v.label, ex.what());
    }
    std::fflush(stdout);
    fs::remove_all(config.output_dir);
  }
}

Verdict end_to_end_determinism() {
  ExperimentConfig config =
      load_config(fs::path(ADMITAUDIT_SOURCE_DIR) / "configs" / "demo.json");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  config.output_dir = a;
  run_experiment(config, 1);
  config.output_dir = b;
  run_experiment(config, workers());
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    ++files;
    if (slurp(e.path()) != slurp(b / fs::relative(e.path(), a))) ++differing;
  }
  const auto ha = nlohmann::json::parse(slurp(a / artifacts::kManifest)).at("content_hash");
  const auto hb = nlohmann::json::parse(slurp(b / artifacts::kManifest)).at("content_hash");
  fs::remove_all(a);
  fs::remove_all(b);
  return {files > 0 && differing == 0 && ha == hb,
          std::to_string(files) + " CSV files, " + std::to_string(differing) +
              " differ; content hash " + ha.get<std::string>() +
              (ha == hb ? " on both runs" : " vs " + hb.get<std::string>())};
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  std::vector<std::pair<std::string, Verdict>> results;
  auto check = [&](const std::string& name, const std::function<Verdict()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.detail += " [" + fmt(secs) + " s]";
    results.emplace_back(name, o);
    std::printf("%s %s: %s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                !o.pass && o.known_limitation ? " (known limitation)" : "");
    std::fflush(stdout);
  };

  check("self_consistency_pair_oracle", self_consistency_oracle);
  check("arbitrariness_ratio_arithmetic", arbitrariness_arithmetic);
  check("sc_threshold_semantics", sc_threshold_semantics);
  check("exact_tests_vs_enumeration", exact_tests_vs_enumeration);
  check("gbdt_properties", gbdt_properties);
  check("decile_pool_invariants", decile_pool_invariants);
  check("naive_baseline_properties", naive_baseline_properties);
  if (!quick) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, Verdict>> votes;
    try {
      votes = qualitative();
    } catch (const std::exception& e) {
      votes = {{"qualitative_desk_scale", Verdict{false, std::string("threw: ") + e.what()}}};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& [name, o] : votes) {
      o.detail += " [" + fmt(secs) + " s for all five seeds]";
      results.emplace_back(name, o);
      std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    }
    check("end_to_end_determinism", end_to_end_determinism);
    gbdt_config_sweep();
  }

  std::size_t failed = 0, unexpected = 0;
  for (const auto& [name, o] : results) {
    if (o.pass) continue;
    ++failed;
    if (!o.known_limitation) ++unexpected;
  }
  std::printf("%zu/%zu criteria pass; %zu known limitation(s), %zu unexpected failure(s)\n",
              results.size() - failed, results.size(), failed - unexpected, unexpected);
  return unexpected == 0 ? 0 : 1;
}
