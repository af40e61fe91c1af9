#pragma once

// Outcome derivation from raw participant data.
//
// Binary outcomes are std::optional<int> holding 0/1; nullopt means missing.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dipt/config.hpp"
#include "dipt/data_model.hpp"

namespace dipt {

enum class CovidCohort { pre_lockdown, post_lockdown };
std::string to_string(CovidCohort c);

struct DerivedOutcomes {
  std::optional<int> no_heavy_drinking;
  std::optional<int> inh_adherent;
  std::optional<double> mems_proportion;
  std::optional<double> peth6_continuous;
  std::optional<int> vl_suppressed_12m;
  std::optional<int> vl_suppressed_6m;
  int hepatotox_discontinuation = 0;
  int active_tb = 0;
  std::optional<int> drink_days_30;
  std::optional<int> heavy_days_14;
  CovidCohort covid_cohort = CovidCohort::pre_lockdown;

  std::optional<int> mems_denominator;
  std::vector<std::string> notes;
};

// No heavy drinking at both the 3- and 6-month visits: PEth below threshold
// and AUDIT-C below the sex-specific heavy-drinking cutoff at each visit.
// A measured failing component decides the outcome even if another is
// missing.
std::optional<int> alcohol_primary_outcome(const ParticipantRecord& record,
                                           const OutcomeCutoffs& cutoffs);

// Prescribed doses for the MEMS denominator. Discontinued participants use
// days from enrollment to discontinuation, capped at prescribed_doses.
// Throws std::domain_error when the result is zero.
int mems_denominator(const ParticipantRecord& record);

// Distinct calendar days with an opening in [enrollment, enrollment + window).
int mems_opening_days(const ParticipantRecord& record, std::span<const DateTime> openings,
                      const OutcomeCutoffs& cutoffs);

// `openings` is nullopt when the participant has no MEMS data at all.
std::optional<double> mems_adherence_continuous(const ParticipantRecord& record,
                                                std::optional<std::span<const DateTime>> openings,
                                                const OutcomeCutoffs& cutoffs);
std::optional<int> mems_adherence_binary(const ParticipantRecord& record,
                                         std::optional<std::span<const DateTime>> openings,
                                         const OutcomeCutoffs& cutoffs);

int hepatotoxicity_outcome(const ParticipantRecord& record);
// month in {6, 12}
std::optional<int> viral_suppression(const ParticipantRecord& record, int month);
CovidCohort covid_cohort(const ParticipantRecord& record, Date cutoff_date);

// Derivations for every participant, aligned with dataset.participants.
std::vector<DerivedOutcomes> derive_rows(const TrialDataset& dataset, const AnalysisConfig& config);
std::map<std::string, DerivedOutcomes> derive_all(const TrialDataset& dataset,
                                                  const AnalysisConfig& config);

// Outcome lookup by name: no_heavy_drinking, inh_adherent, mems_proportion,
// peth6_continuous, vl_suppressed_12m, vl_suppressed_6m,
// hepatotox_discontinuation, active_tb, drink_days_30, heavy_days_14,
// peth3_continuous, peth12_continuous.
std::optional<double> outcome_value(const ParticipantRecord& record, const DerivedOutcomes& derived,
                                    const std::string& name);
bool is_known_outcome(const std::string& name);
bool is_binary_outcome(const std::string& name);

// Numeric participant variables used as covariates and moderators:
// gender_male, arm, alcohol_int, adherence_int, peth_0..peth_12,
// auditc_0..auditc_6, drink_days_30, heavy_days_14, timepref_score,
// riskpref_score, readiness_score, prescribed_doses, covid_post_lockdown.
std::optional<double> numeric_variable(const ParticipantRecord& record,
                                       const DerivedOutcomes& derived, const std::string& name);
bool is_numeric_variable(const std::string& name);

// Categorical variables for descriptive tables: gender, site, arm,
// covid_cohort. Numeric variables are returned as nullopt here.
std::optional<std::string> categorical_variable(const ParticipantRecord& record,
                                                const DerivedOutcomes& derived,
                                                const std::string& name);
bool is_categorical_variable(const std::string& name);

}  // namespace dipt
