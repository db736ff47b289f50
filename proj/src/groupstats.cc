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

#include "admitaudit/groupstats.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "admitaudit/error.h"
#include "admitaudit/stats.h"

namespace admitaudit {

std::string race_share_metric(RaceEthnicity race) {
  return "race_share:" + std::string(to_string(race));
}

TopPool top_pool_from_deciles(std::string policy, std::span<const std::uint8_t> deciles,
                              int cutoff) {
  TopPool pool{std::move(policy), {}};
  pool.in_top.reserve(deciles.size());
  for (auto d : deciles) pool.in_top.push_back(d >= cutoff ? 1 : 0);
  return pool;
}

std::vector<std::pair<std::string, double>> PolicyImpact::metrics() const {
  std::vector<std::pair<std::string, double>> out = {
      {std::string(kUrmShare), urm_share},
      {std::string(kFirstGenShare), first_gen_share},
      {std::string(kLowIncomeShare), low_income_share},
      {std::string(kAdmittedShare), admitted_share},
      {std::string(kAdmittedOrWaitlistedShare), admitted_or_waitlisted_share},
  };
  if (mean_test_percentile) out.emplace_back(std::string(kMeanTestPercentile), *mean_test_percentile);
  for (const auto& [race, share] : race_shares) out.emplace_back(race_share_metric(race), share);
  return out;
}

PolicyImpact policy_impact(std::span<const ApplicantRecord> records, const TopPool& pool) {
  if (pool.in_top.size() != records.size()) {
    throw Error("group impact: top pool for '" + pool.policy + "' has " +
                std::to_string(pool.in_top.size()) + " entries but the cohort has " +
                std::to_string(records.size()));
  }
  PolicyImpact out;
  out.policy = pool.policy;
  std::map<RaceEthnicity, std::size_t> race_counts;
  double percentile_sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!pool.in_top[i]) continue;
    const ApplicantRecord& r = records[i];
    ++out.top_n;
    out.urm += r.urm_flag;
    out.first_gen += r.first_gen;
    out.low_income += r.fee_waiver;
    out.admitted += r.outcome == Outcome::kAdmitted;
    out.admitted_or_waitlisted += r.admitted_or_waitlisted();
    ++race_counts[r.race_ethnicity];
    if (auto p = r.best_test_percentile()) {
      ++out.submitters;
      percentile_sum += *p;
      out.test_percentiles.push_back(*p);
    }
  }
  if (out.top_n == 0) throw Error("group impact: empty top pool for '" + pool.policy + "'");
  const auto n = static_cast<double>(out.top_n);
  out.urm_share = static_cast<double>(out.urm) / n;
  out.first_gen_share = static_cast<double>(out.first_gen) / n;
  out.low_income_share = static_cast<double>(out.low_income) / n;
  out.admitted_share = static_cast<double>(out.admitted) / n;
  out.admitted_or_waitlisted_share = static_cast<double>(out.admitted_or_waitlisted) / n;
  if (out.submitters > 0) {
    out.mean_test_percentile = percentile_sum / static_cast<double>(out.submitters);
  }
  for (auto race : kAllRaces) {
    out.race_shares.emplace_back(race, static_cast<double>(race_counts[race]) / n);
  }
  return out;
}

const PolicyImpact& GroupImpactReport::impact(std::string_view policy) const {
  for (const auto& i : impacts) {
    if (i.policy == policy) return i;
  }
  throw Error("group impact: no policy '" + std::string(policy) + "' in report");
}

const ImpactComparison& GroupImpactReport::comparison(std::string_view policy,
                                                      std::string_view metric) const {
  for (const auto& c : comparisons) {
    if (c.policy == policy && c.metric == metric) return c;
  }
  throw Error("group impact: no comparison for '" + std::string(policy) + "' on " +
              std::string(metric));
}

double binomial_vs_share(std::size_t k, std::size_t n, double p0) {
  if (p0 <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p0 >= 1.0) return k == n ? 1.0 : 0.0;
  return stats::binomial_test(k, n, p0);
}

GroupImpactReport group_impact(std::span<const ApplicantRecord> records,
                               const TopPool& baseline, std::span<const TopPool> policies,
                               TargetDefinition target, double alpha) {
  GroupImpactReport report;
  report.target = target;
  report.baseline = baseline.policy;
  report.alpha = alpha;
  report.impacts.push_back(policy_impact(records, baseline));
  for (const auto& pool : policies) report.impacts.push_back(policy_impact(records, pool));

  const PolicyImpact& base = report.impacts.front();
  for (std::size_t j = 1; j < report.impacts.size(); ++j) {
    const PolicyImpact& p = report.impacts[j];
    auto binomial = [&](std::string_view metric, std::size_t count, double share,
                        double base_share) {
      ImpactComparison c;
      c.policy = p.policy;
      c.baseline = base.policy;
      c.metric = std::string(metric);
      c.test = "binomial";
      c.value = share;
      c.baseline_value = base_share;
      c.p_value = binomial_vs_share(count, p.top_n, base_share);
      report.comparisons.push_back(std::move(c));
    };
    binomial(kUrmShare, p.urm, p.urm_share, base.urm_share);
    binomial(kFirstGenShare, p.first_gen, p.first_gen_share, base.first_gen_share);
    binomial(kLowIncomeShare, p.low_income, p.low_income_share, base.low_income_share);
    binomial(kAdmittedShare, p.admitted, p.admitted_share, base.admitted_share);
    binomial(kAdmittedOrWaitlistedShare, p.admitted_or_waitlisted,
             p.admitted_or_waitlisted_share, base.admitted_or_waitlisted_share);

    ImpactComparison c;
    c.policy = p.policy;
    c.baseline = base.policy;
    c.metric = std::string(kMeanTestPercentile);
    c.test = "mann_whitney";
    c.value = p.mean_test_percentile.value_or(std::nan(""));
    c.baseline_value = base.mean_test_percentile.value_or(std::nan(""));
    if (!p.test_percentiles.empty() && !base.test_percentiles.empty()) {
      c.p_value = stats::mann_whitney_u(p.test_percentiles, base.test_percentiles).p_value;
    }
    report.comparisons.push_back(std::move(c));
  }

  std::vector<double> p_values;
  std::vector<std::size_t> tested;
  for (std::size_t i = 0; i < report.comparisons.size(); ++i) {
    if (report.comparisons[i].p_value) {
      p_values.push_back(*report.comparisons[i].p_value);
      tested.push_back(i);
    }
  }
  if (!p_values.empty()) {
    const auto correction = stats::bonferroni(p_values, alpha);
    for (std::size_t k = 0; k < tested.size(); ++k) {
      report.comparisons[tested[k]].adjusted_p = correction.adjusted[k];
      report.comparisons[tested[k]].significant = correction.significant[k];
    }
  }
  return report;
}

namespace {

void append_sweep(std::vector<SweepPoint>& out, int cutoff, const PolicyImpact& impact) {
  for (auto& [metric, value] : impact.metrics()) {
    out.push_back({cutoff, impact.policy, metric, value});
  }
}

bool any_top(std::span<const std::uint8_t> deciles, int cutoff) {
  return std::any_of(deciles.begin(), deciles.end(), [&](auto d) { return d >= cutoff; });
}

}  // namespace

std::vector<SweepPoint> cutoff_sweep(std::span<const ApplicantRecord> records,
                                     std::string policy, std::span<const std::uint8_t> deciles) {
  std::vector<SweepPoint> out;
  for (int cutoff = kDeciles; cutoff >= 1; --cutoff) {
    if (!any_top(deciles, cutoff)) continue;
    append_sweep(out, cutoff, policy_impact(records, top_pool_from_deciles(policy, deciles, cutoff)));
  }
  return out;
}

namespace {

void check_alignment(std::span<const ApplicantRecord> records, const EnsembleOutcomes& ensemble) {
  if (records.size() != ensemble.applicants()) {
    throw Error("ensemble '" + ensemble.name + "' does not cover the test cohort");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id != ensemble.applicant_ids[i]) {
      throw Error("ensemble '" + ensemble.name + "' applicant order differs at " +
                  records[i].id);
    }
  }
}

// Per-model metric values, keyed by metric name in first-seen order.
std::vector<std::pair<std::string, std::vector<double>>> per_model_metrics(
    std::span<const ApplicantRecord> records, const EnsembleOutcomes& ensemble, int cutoff) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  const std::size_t n = ensemble.applicants();
  for (std::size_t j = 0; j < ensemble.models; ++j) {
    std::span<const std::uint8_t> col(ensemble.deciles.data() + j * n, n);
    if (!any_top(col, cutoff)) continue;
    const auto impact = policy_impact(records, top_pool_from_deciles(ensemble.name, col, cutoff));
    for (auto& [metric, value] : impact.metrics()) {
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == metric; });
      if (it == out.end()) {
        out.emplace_back(metric, std::vector<double>{});
        it = out.end() - 1;
      }
      it->second.push_back(value);
    }
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

}  // namespace

std::vector<SweepPoint> cutoff_sweep(std::span<const ApplicantRecord> records,
                                     const EnsembleOutcomes& ensemble) {
  check_alignment(records, ensemble);
  std::vector<SweepPoint> out;
  for (int cutoff = kDeciles; cutoff >= 1; --cutoff) {
    for (auto& [metric, values] : per_model_metrics(records, ensemble, cutoff)) {
      out.push_back({cutoff, ensemble.name, metric, mean(values)});
    }
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<ShareInterval> ensemble_share_intervals(std::span<const ApplicantRecord> records,
                                                    const EnsembleOutcomes& ensemble) {
  check_alignment(records, ensemble);
  std::vector<ShareInterval> out;
  for (auto& [metric, values] : per_model_metrics(records, ensemble, ensemble.cutoff)) {
    out.push_back({ensemble.name, metric, mean(values), quantile(values, 0.025),
                   quantile(values, 0.975)});
  }
  return out;
}

}  // namespace admitaudit
