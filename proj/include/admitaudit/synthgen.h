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

#ifndef ADMITAUDIT_SYNTHGEN_H_
#define ADMITAUDIT_SYNTHGEN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace admitaudit {

enum class RaceEthnicity {
  kWhite,
  kAsian,
  kHispanic,
  kBlack,
  kAmericanIndianAlaskaNative,
  kNativeHawaiianPacificIslander,
  kMultiracial,
  kNotReported,
};

inline constexpr RaceEthnicity kAllRaces[] = {
    RaceEthnicity::kWhite,
    RaceEthnicity::kAsian,
    RaceEthnicity::kHispanic,
    RaceEthnicity::kBlack,
    RaceEthnicity::kAmericanIndianAlaskaNative,
    RaceEthnicity::kNativeHawaiianPacificIslander,
    RaceEthnicity::kMultiracial,
    RaceEthnicity::kNotReported,
};

std::string_view to_string(RaceEthnicity race);
RaceEthnicity parse_race(std::string_view text);

// Common App URM rule: Black, Hispanic/Latinx, American Indian/Alaska Native,
// Native Hawaiian/Pacific Islander.
bool is_urm(RaceEthnicity race);

enum class Outcome { kAdmitted, kWaitlisted, kRejected };
std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

enum class CohortSplit { kTrain, kTest };
std::string_view to_string(CohortSplit split);
CohortSplit parse_split(std::string_view text);

// Highest math course taken, 1 = Algebra ... 6 = beyond Calculus.
inline constexpr int kMinMathBand = 1;
inline constexpr int kMaxMathBand = 6;

struct ApplicantRecord {
  std::string id;
  RaceEthnicity race_ethnicity = RaceEthnicity::kNotReported;
  bool urm_flag = false;
  std::string sex;
  bool first_gen = false;
  bool fee_waiver = false;  // low-income proxy
  std::string citizenship;  // empty = missing
  std::string parental_education;  // empty = missing
  std::string school_type;
  int highest_math = kMinMathBand;
  double gpa = 0.0;
  std::optional<double> sat_percentile;
  std::optional<double> act_percentile;
  std::string intended_major;
  std::string activity_text;
  std::string essay_text;
  Outcome outcome = Outcome::kRejected;
  CohortSplit cohort = CohortSplit::kTrain;

  // Higher of the two test percentiles, absent for non-submitters.
  std::optional<double> best_test_percentile() const;
  bool admitted_or_waitlisted() const { return outcome != Outcome::kRejected; }

  bool operator==(const ApplicantRecord&) const = default;
};

// Defaults reproduce the training-cohort marginals of the case institution
// (44,293 applicants; 5.7% admitted, 14.4% waitlisted, 17.3% URM, 31.1%
// female, 15.9% first-generation, 25.7% low SES) and the 67% post
// test-optional submission rate.
struct CohortSpec {
  std::size_t n_train = 44293;
  std::size_t n_test = 15540;
  std::uint64_t seed = 0;
  double urm_rate = 0.173;
  double female_rate = 0.311;
  double first_gen_rate = 0.159;
  double low_ses_rate = 0.257;
  double admit_rate = 0.057;
  double waitlist_rate = 0.144;
  double test_submission_rate = 0.67;
  // Score bonus URM applicants receive in the historical admission rule.
  double group_boost = 1.25;
  // Score bonus URM applicants receive when the waitlist is filled.
  double waitlist_group_boost = 0.25;
  double merit_noise_sd = 1.0;
  // Label-rule offset for applicants whose intended major is oversubscribed
  // (Computer Science); negative values make admission harder.
  double major_effect = -0.5;
  // Log-odds slope of test submission on latent merit. 0 keeps submission
  // independent of merit.
  double submission_merit_slope = 0.0;

  // Throws ValidationError naming the first offending field.
  void validate() const;
};

// Records plus the latent quantities used to generate them, aligned by index.
struct SyntheticCohort {
  std::vector<ApplicantRecord> records;
  std::vector<double> latent_merit;
  std::vector<double> label_score;     // ranks admission
  std::vector<double> waitlist_score;  // ranks the waitlist among the rest
};

// Train records come first, then test records. Pure function of `spec`.
SyntheticCohort generate_cohort_detailed(const CohortSpec& spec);
std::vector<ApplicantRecord> generate_cohort(const CohortSpec& spec);

std::vector<ApplicantRecord> select_split(std::span<const ApplicantRecord> records,
                                          CohortSplit split);

// applicants.csv columns, in file order.
const std::vector<std::string>& applicant_columns();

std::string cohort_to_csv(std::span<const ApplicantRecord> records);
std::vector<ApplicantRecord> cohort_from_csv(std::string_view text);

void write_cohort(std::span<const ApplicantRecord> records,
                  const std::filesystem::path& path);
std::vector<ApplicantRecord> read_cohort(const std::filesystem::path& path);

}  // namespace admitaudit

#endif  // ADMITAUDIT_SYNTHGEN_H_
