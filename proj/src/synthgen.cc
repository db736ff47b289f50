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

#include "admitaudit/synthgen.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <fstream>
#include <sstream>

#include "admitaudit/csv.h"
#include "admitaudit/error.h"
#include "admitaudit/seeding.h"

namespace admitaudit {
namespace {

struct RaceInfo {
  RaceEthnicity race;
  std::string_view name;
};

constexpr std::array<RaceInfo, 8> kRaceNames = {{
    {RaceEthnicity::kWhite, "White"},
    {RaceEthnicity::kAsian, "Asian"},
    {RaceEthnicity::kHispanic, "Hispanic"},
    {RaceEthnicity::kBlack, "Black"},
    {RaceEthnicity::kAmericanIndianAlaskaNative, "AmericanIndianAlaskaNative"},
    {RaceEthnicity::kNativeHawaiianPacificIslander, "NativeHawaiianPacificIslander"},
    {RaceEthnicity::kMultiracial, "Multiracial"},
    {RaceEthnicity::kNotReported, "NotReported"},
}};

template <typename T>
struct Weighted {
  T value;
  double weight;
};

template <typename T, std::size_t N>
const T& draw(std::mt19937_64& rng, const std::array<Weighted<T>, N>& table) {
  double total = 0.0;
  for (const auto& w : table) total += w.weight;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (const auto& w : table) {
    if (u < w.weight) return w.value;
    u -= w.weight;
  }
  return table.back().value;
}

constexpr std::array<Weighted<RaceEthnicity>, 4> kUrmRaces = {{
    {RaceEthnicity::kHispanic, 0.56},
    {RaceEthnicity::kBlack, 0.33},
    {RaceEthnicity::kAmericanIndianAlaskaNative, 0.07},
    {RaceEthnicity::kNativeHawaiianPacificIslander, 0.04},
}};

constexpr std::array<Weighted<RaceEthnicity>, 4> kNonUrmRaces = {{
    {RaceEthnicity::kWhite, 0.46},
    {RaceEthnicity::kAsian, 0.34},
    {RaceEthnicity::kMultiracial, 0.08},
    {RaceEthnicity::kNotReported, 0.12},
}};

// Empty string encodes a missing answer.
constexpr std::array<Weighted<std::string_view>, 5> kCitizenship = {{
    {"USCitizen", 0.845},
    {"PermanentResident", 0.06},
    {"International", 0.08},
    {"DualCitizen", 0.005},
    {"", 0.01},
}};

constexpr std::array<Weighted<std::string_view>, 4> kFirstGenParents = {{
    {"NoCollege", 0.5},
    {"SomeCollege", 0.33},
    {"Associate", 0.15},
    {"", 0.02},
}};

constexpr std::array<Weighted<std::string_view>, 4> kCollegeParents = {{
    {"Bachelor", 0.44},
    {"Master", 0.35},
    {"Doctorate", 0.19},
    {"", 0.02},
}};

constexpr std::array<Weighted<std::string_view>, 5> kSchoolsDisadvantaged = {{
    {"Public", 0.86},
    {"Charter", 0.07},
    {"Religious", 0.04},
    {"Private", 0.025},
    {"Homeschool", 0.005},
}};

constexpr std::array<Weighted<std::string_view>, 5> kSchoolsOther = {{
    {"Public", 0.62},
    {"Private", 0.24},
    {"Religious", 0.08},
    {"Charter", 0.052},
    {"Homeschool", 0.008},
}};

constexpr std::string_view kOversubscribedMajor = "ComputerScience";

constexpr std::array<Weighted<std::string_view>, 7> kMajors = {{
    {"ComputerScience", 0.30},
    {"Engineering", 0.34},
    {"Mathematics", 0.07},
    {"Physics", 0.06},
    {"Biology", 0.10},
    {"Business", 0.08},
    {"Humanities", 0.05},
}};

struct Activity {
  std::string_view phrase;
  double merit_loading;
  std::string_view affine_major;
  double affinity;
};

constexpr std::array<Activity, 12> kActivities = {{
    {"math olympiad", 0.9, "Mathematics", 1.0},
    {"research internship", 0.8, "Biology", 0.6},
    {"robotics team", 0.5, "Engineering", 1.0},
    {"coding club", 0.4, "ComputerScience", 1.0},
    {"team captain", 0.4, "", 0.0},
    {"club founder", 0.6, "Business", 0.8},
    {"student council", 0.2, "", 0.0},
    {"varsity sports", 0.0, "", 0.0},
    {"school band", 0.0, "Humanities", 0.5},
    {"community service", 0.0, "", 0.0},
    {"part time job", -0.2, "", 0.0},
    {"peer tutoring", 0.2, "Physics", 0.4},
}};
constexpr std::size_t kActivitiesPerApplicant = 3;

constexpr std::array<std::string_view, 4> kEssayOpeners = {
    "i love", "i enjoy", "i am fascinated by", "i have always wanted to study"};

struct MajorTopics {
  std::string_view major;
  std::array<std::string_view, 2> topics;
};

constexpr std::array<MajorTopics, 7> kEssayTopics = {{
    {"ComputerScience", {"computer science", "software design"}},
    {"Engineering", {"mechanical engineering", "building machines"}},
    {"Mathematics", {"pure mathematics", "number theory"}},
    {"Physics", {"quantum physics", "astrophysics"}},
    {"Biology", {"molecular biology", "medicine"}},
    {"Business", {"entrepreneurship", "economics"}},
    {"Humanities", {"history", "philosophy"}},
}};

struct Closer {
  std::string_view text;
  double merit_loading;
};

constexpr std::array<Closer, 4> kEssayClosers = {{
    {"and i published original research", 0.8},
    {"and i led a team project", 0.4},
    {"and i want to learn more", 0.0},
    {"and i hope to grow", -0.3},
}};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

// Conditional rates (given URM, given non-URM) with a fixed relative risk for
// URM applicants that reproduce `marginal` in expectation.
std::pair<double, double> split_rate(double marginal, double urm_rate,
                                     double relative_risk) {
  const double denom = urm_rate * relative_risk + (1.0 - urm_rate);
  double non_urm = marginal / denom;
  double urm = relative_risk * non_urm;
  if (urm > 1.0) {
    urm = 1.0;
    non_urm = urm_rate < 1.0 ? (marginal - urm_rate) / (1.0 - urm_rate) : 0.0;
  }
  return {std::clamp(urm, 0.0, 1.0), std::clamp(non_urm, 0.0, 1.0)};
}

constexpr double kFirstGenRelativeRisk = 2.5;
constexpr double kLowSesRelativeRisk = 2.0;

double round_to(double value, double step) { return std::round(value / step) * step; }

std::string make_activity_text(std::mt19937_64& rng, double merit,
                               std::string_view major) {
  std::array<double, kActivities.size()> weights{};
  for (std::size_t i = 0; i < kActivities.size(); ++i) {
    const auto& a = kActivities[i];
    const double affinity = a.affine_major == major ? a.affinity : 0.0;
    weights[i] = std::exp(a.merit_loading * merit + affinity);
  }
  std::array<bool, kActivities.size()> chosen{};
  for (std::size_t k = 0; k < kActivitiesPerApplicant; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!chosen[i]) total += weights[i];
    }
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = weights.size() - 1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (chosen[i]) continue;
      if (u < weights[i]) {
        pick = i;
        break;
      }
      u -= weights[i];
    }
    while (chosen[pick]) --pick;
    chosen[pick] = true;
  }
  std::string text;
  for (std::size_t i = 0; i < kActivities.size(); ++i) {
    if (!chosen[i]) continue;
    if (!text.empty()) text += ' ';
    text += kActivities[i].phrase;
  }
  return text;
}

std::string make_essay_text(std::mt19937_64& rng, double merit,
                            std::string_view major) {
  std::uniform_int_distribution<std::size_t> pick_opener(0, kEssayOpeners.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_topic(0, 1);
  const std::string_view opener = kEssayOpeners[pick_opener(rng)];
  std::string_view topic = kEssayTopics.front().topics[0];
  const std::size_t topic_index = pick_topic(rng);
  for (const auto& t : kEssayTopics) {
    if (t.major == major) topic = t.topics[topic_index];
  }
  std::array<double, kEssayClosers.size()> weights{};
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = std::exp(1.5 * kEssayClosers[i].merit_loading * merit);
    total += weights[i];
  }
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  std::size_t closer = weights.size() - 1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) {
      closer = i;
      break;
    }
    u -= weights[i];
  }
  std::string text(opener);
  text += ' ';
  text += topic;
  text += ' ';
  text += kEssayClosers[closer].text;
  return text;
}

int math_band(double signal) {
  constexpr std::array<double, 5> kCuts = {-2.0, -1.2, -0.4, 0.5, 1.4};
  int band = kMinMathBand;
  for (double cut : kCuts) {
    if (signal >= cut) ++band;
  }
  return band;
}

// Admits the top admit_rate share by admit score, then waitlists the next
// waitlist_rate share of the remaining applicants by waitlist score.
void assign_outcomes(std::span<ApplicantRecord> block, std::span<const double> admit_scores,
                     std::span<const double> waitlist_scores, const CohortSpec& spec) {
  const std::size_t n = block.size();
  const auto n_admit = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(spec.admit_rate * n)));
  const auto n_listed = std::min<std::size_t>(
      n, static_cast<std::size_t>(
             std::llround((spec.admit_rate + spec.waitlist_rate) * n)));
  auto ranked = [&](std::span<const double> scores) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
  };
  for (auto& r : block) r.outcome = Outcome::kRejected;
  const auto by_admit = ranked(admit_scores);
  for (std::size_t pos = 0; pos < n_admit; ++pos) block[by_admit[pos]].outcome = Outcome::kAdmitted;
  std::size_t listed = n_admit;
  for (std::size_t i : ranked(waitlist_scores)) {
    if (listed >= n_listed) break;
    if (block[i].outcome == Outcome::kAdmitted) continue;
    block[i].outcome = Outcome::kWaitlisted;
    ++listed;
  }
}

std::string make_id(CohortSplit split, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%07zu", split == CohortSplit::kTrain ? "tr" : "te",
                index + 1);
  return buf;
}

}  // namespace

std::string_view to_string(RaceEthnicity race) {
  for (const auto& r : kRaceNames) {
    if (r.race == race) return r.name;
  }
  return "NotReported";
}

RaceEthnicity parse_race(std::string_view text) {
  for (const auto& r : kRaceNames) {
    if (r.name == text) return r.race;
  }
  throw std::invalid_argument("unknown race_ethnicity '" + std::string(text) + "'");
}

bool is_urm(RaceEthnicity race) {
  switch (race) {
    case RaceEthnicity::kHispanic:
    case RaceEthnicity::kBlack:
    case RaceEthnicity::kAmericanIndianAlaskaNative:
    case RaceEthnicity::kNativeHawaiianPacificIslander:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kAdmitted:
      return "admitted";
    case Outcome::kWaitlisted:
      return "waitlisted";
    case Outcome::kRejected:
      return "rejected";
  }
  return "rejected";
}

Outcome parse_outcome(std::string_view text) {
  if (text == "admitted") return Outcome::kAdmitted;
  if (text == "waitlisted") return Outcome::kWaitlisted;
  if (text == "rejected") return Outcome::kRejected;
  throw std::invalid_argument("unknown outcome '" + std::string(text) + "'");
}

std::string_view to_string(CohortSplit split) {
  return split == CohortSplit::kTrain ? "train" : "test";
}

CohortSplit parse_split(std::string_view text) {
  if (text == "train") return CohortSplit::kTrain;
  if (text == "test") return CohortSplit::kTest;
  throw std::invalid_argument("unknown cohort '" + std::string(text) + "'");
}

std::optional<double> ApplicantRecord::best_test_percentile() const {
  if (sat_percentile && act_percentile) {
    return std::max(*sat_percentile, *act_percentile);
  }
  return sat_percentile ? sat_percentile : act_percentile;
}

void CohortSpec::validate() const {
  auto check_rate = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(name, "must lie in [0, 1]");
  };
  check_rate("urm_rate", urm_rate);
  check_rate("female_rate", female_rate);
  check_rate("first_gen_rate", first_gen_rate);
  check_rate("low_ses_rate", low_ses_rate);
  check_rate("admit_rate", admit_rate);
  check_rate("waitlist_rate", waitlist_rate);
  check_rate("test_submission_rate", test_submission_rate);
  if (admit_rate + waitlist_rate > 1.0) {
    throw ValidationError("waitlist_rate", "admit_rate + waitlist_rate must not exceed 1");
  }
  if (n_train < 100) throw ValidationError("n_train", "must be at least 100");
  if (n_test < 100) throw ValidationError("n_test", "must be at least 100");
  if (!(merit_noise_sd >= 0.0) || !std::isfinite(merit_noise_sd)) {
    throw ValidationError("merit_noise_sd", "must be finite and >= 0");
  }
  if (!std::isfinite(group_boost)) throw ValidationError("group_boost", "must be finite");
  if (!std::isfinite(waitlist_group_boost)) {
    throw ValidationError("waitlist_group_boost", "must be finite");
  }
  if (!std::isfinite(major_effect)) throw ValidationError("major_effect", "must be finite");
  if (!std::isfinite(submission_merit_slope)) {
    throw ValidationError("submission_merit_slope", "must be finite");
  }
}

SyntheticCohort generate_cohort_detailed(const CohortSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(derive_seed(spec.seed, "synthgen"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto [first_gen_urm, first_gen_other] =
      split_rate(spec.first_gen_rate, spec.urm_rate, kFirstGenRelativeRisk);
  const auto [low_ses_urm, low_ses_other] =
      split_rate(spec.low_ses_rate, spec.urm_rate, kLowSesRelativeRisk);
  const double submit_logit =
      spec.test_submission_rate <= 0.0   ? -INFINITY
      : spec.test_submission_rate >= 1.0 ? INFINITY
                                         : logit(spec.test_submission_rate);

  const std::size_t total = spec.n_train + spec.n_test;
  SyntheticCohort out;
  out.records.resize(total);
  out.latent_merit.resize(total);
  out.label_score.resize(total);
  out.waitlist_score.resize(total);

  for (std::size_t i = 0; i < total; ++i) {
    ApplicantRecord& r = out.records[i];
    const bool train = i < spec.n_train;
    r.cohort = train ? CohortSplit::kTrain : CohortSplit::kTest;
    r.id = make_id(r.cohort, train ? i : i - spec.n_train);

    const bool urm = unif(rng) < spec.urm_rate;
    r.race_ethnicity = urm ? draw(rng, kUrmRaces) : draw(rng, kNonUrmRaces);
    r.urm_flag = is_urm(r.race_ethnicity);

    if (unif(rng) < spec.female_rate) {
      r.sex = "Female";
    } else {
      r.sex = unif(rng) < 0.006 ? "Another" : "Male";
    }
    r.first_gen = unif(rng) < (urm ? first_gen_urm : first_gen_other);
    r.fee_waiver = unif(rng) < (urm ? low_ses_urm : low_ses_other);
    r.citizenship = std::string(draw(rng, kCitizenship));
    r.parental_education =
        std::string(draw(rng, r.first_gen ? kFirstGenParents : kCollegeParents));
    r.school_type = std::string(
        draw(rng, (urm || r.fee_waiver) ? kSchoolsDisadvantaged : kSchoolsOther));

    const double merit = gauss(rng);
    out.latent_merit[i] = merit;
    r.highest_math = math_band(merit + 0.7 * gauss(rng));
    r.gpa = std::clamp(round_to(3.4 + 0.35 * merit + 0.25 * gauss(rng), 0.01), 0.0, 4.0);

    const double p_submit = sigmoid(submit_logit + spec.submission_merit_slope * merit);
    const bool submitted = unif(rng) < p_submit;
    const double which = unif(rng);
    const double sat_noise = gauss(rng);
    const double act_noise = gauss(rng);
    auto percentile = [&](double noise) {
      return std::clamp(round_to(100.0 * normal_cdf(0.9 * merit + 0.45 * noise + 0.9), 0.1),
                        0.0, 100.0);
    };
    if (submitted) {
      if (which < 0.60) {
        r.sat_percentile = percentile(sat_noise);
      } else if (which < 0.85) {
        r.act_percentile = percentile(act_noise);
      } else {
        r.sat_percentile = percentile(sat_noise);
        r.act_percentile = percentile(act_noise);
      }
    }

    r.intended_major = std::string(draw(rng, kMajors));
    r.activity_text = make_activity_text(rng, merit, r.intended_major);
    r.essay_text = make_essay_text(rng, merit, r.intended_major);

    const double noise = gauss(rng);
    out.label_score[i] = merit + spec.group_boost * (r.urm_flag ? 1.0 : 0.0) +
                         (r.intended_major == kOversubscribedMajor ? spec.major_effect : 0.0) +
                         spec.merit_noise_sd * noise;
    out.waitlist_score[i] = merit + spec.waitlist_group_boost * (r.urm_flag ? 1.0 : 0.0) +
                            spec.merit_noise_sd * gauss(rng);
  }

  const std::span<const double> admit(out.label_score), waitlist(out.waitlist_score);
  assign_outcomes(std::span(out.records).first(spec.n_train), admit.first(spec.n_train),
                  waitlist.first(spec.n_train), spec);
  assign_outcomes(std::span(out.records).subspan(spec.n_train), admit.subspan(spec.n_train),
                  waitlist.subspan(spec.n_train), spec);
  return out;
}

std::vector<ApplicantRecord> generate_cohort(const CohortSpec& spec) {
  return generate_cohort_detailed(spec).records;
}

std::vector<ApplicantRecord> select_split(std::span<const ApplicantRecord> records,
                                          CohortSplit split) {
  std::vector<ApplicantRecord> out;
  for (const auto& r : records) {
    if (r.cohort == split) out.push_back(r);
  }
  return out;
}

const std::vector<std::string>& applicant_columns() {
  static const std::vector<std::string> kColumns = {
      "id",           "race_ethnicity", "urm_flag",       "sex",
      "first_gen",    "fee_waiver",     "citizenship",    "parental_education",
      "school_type",  "highest_math",   "gpa",            "sat_percentile",
      "act_percentile", "intended_major", "activity_text", "essay_text",
      "outcome",      "cohort",
  };
  return kColumns;
}

std::string cohort_to_csv(std::span<const ApplicantRecord> records) {
  std::ostringstream out;
  csv::write_row(out, applicant_columns());
  for (const auto& r : records) {
    csv::write_row(out, {
                            r.id,
                            std::string(to_string(r.race_ethnicity)),
                            r.urm_flag ? "1" : "0",
                            r.sex,
                            r.first_gen ? "1" : "0",
                            r.fee_waiver ? "1" : "0",
                            r.citizenship,
                            r.parental_education,
                            r.school_type,
                            std::to_string(r.highest_math),
                            csv::format_double(r.gpa),
                            csv::format_optional(r.sat_percentile),
                            csv::format_optional(r.act_percentile),
                            r.intended_major,
                            r.activity_text,
                            r.essay_text,
                            std::string(to_string(r.outcome)),
                            std::string(to_string(r.cohort)),
                        });
  }
  return out.str();
}

namespace {

bool parse_bool(std::string_view text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw std::invalid_argument("not a boolean: '" + std::string(text) + "'");
}

std::optional<double> parse_percentile(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const double v = csv::parse_double(text);
  if (!(v >= 0.0 && v <= 100.0)) throw std::invalid_argument("percentile outside [0, 100]");
  return v;
}

}  // namespace

std::vector<ApplicantRecord> cohort_from_csv(std::string_view text) {
  const csv::Table table = csv::parse(text);
  const auto& columns = applicant_columns();
  std::vector<std::size_t> index;
  for (const auto& c : columns) {
    auto idx = table.find_column(c);
    if (!idx) throw ParseError(0, c, "column missing from header");
    index.push_back(*idx);
  }
  std::vector<ApplicantRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const auto& cells = table.rows[row];
    const std::size_t row_number = row + 1;
    std::size_t current = 0;
    auto cell = [&](std::size_t k) -> const std::string& {
      current = k;
      if (index[k] >= cells.size()) {
        throw ParseError(row_number, columns[k], "row has too few cells");
      }
      return cells[index[k]];
    };
    try {
      ApplicantRecord r;
      r.id = cell(0);
      if (r.id.empty()) throw std::invalid_argument("empty id");
      r.race_ethnicity = parse_race(cell(1));
      r.urm_flag = parse_bool(cell(2));
      if (r.urm_flag != is_urm(r.race_ethnicity)) {
        throw std::invalid_argument("urm_flag inconsistent with race_ethnicity");
      }
      r.sex = cell(3);
      r.first_gen = parse_bool(cell(4));
      r.fee_waiver = parse_bool(cell(5));
      r.citizenship = cell(6);
      r.parental_education = cell(7);
      r.school_type = cell(8);
      const long long band = csv::parse_int(cell(9));
      if (band < kMinMathBand || band > kMaxMathBand) {
        throw std::invalid_argument("highest_math outside 1..6");
      }
      r.highest_math = static_cast<int>(band);
      r.gpa = csv::parse_double(cell(10));
      if (!(r.gpa >= 0.0 && r.gpa <= 4.0)) throw std::invalid_argument("gpa outside [0, 4]");
      r.sat_percentile = parse_percentile(cell(11));
      r.act_percentile = parse_percentile(cell(12));
      r.intended_major = cell(13);
      r.activity_text = cell(14);
      r.essay_text = cell(15);
      r.outcome = parse_outcome(cell(16));
      r.cohort = parse_split(cell(17));
      records.push_back(std::move(r));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(row_number, columns[current], e.what());
    }
  }
  return records;
}

void write_cohort(std::span<const ApplicantRecord> records,
                  const std::filesystem::path& path) {
  csv::write_file(path, cohort_to_csv(records));
}

std::vector<ApplicantRecord> read_cohort(const std::filesystem::path& path) {
  std::ifstream probe(path);
  if (!probe) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << probe.rdbuf();
  return cohort_from_csv(ss.str());
}

}  // namespace admitaudit
