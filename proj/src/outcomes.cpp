#include "dipt/outcomes.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <unordered_map>

#include "dipt/errors.hpp"

namespace dipt {

std::string to_string(CovidCohort c) {
  return c == CovidCohort::pre_lockdown ? "pre_lockdown" : "post_lockdown";
}

std::optional<int> alcohol_primary_outcome(const ParticipantRecord& record,
                                           const OutcomeCutoffs& cutoffs) {
  const int heavy_at = record.gender == Gender::female ? cutoffs.auditc_female : cutoffs.auditc_male;
  bool any_missing = false;
  bool any_fail = false;
  for (int month : {3, 6}) {
    const auto peth = record.peth_at(month);
    if (!peth) {
      any_missing = true;
    } else if (!(*peth < cutoffs.peth_threshold)) {
      any_fail = true;
    }
    const auto audit = record.auditc_at(month);
    if (!audit) {
      any_missing = true;
    } else if (*audit >= heavy_at) {
      any_fail = true;
    }
  }
  if (any_fail) return 0;
  if (any_missing) return std::nullopt;
  return 1;
}

int mems_denominator(const ParticipantRecord& record) {
  int denom = record.prescribed_doses;
  if (record.discontinued_inh && record.discontinuation_date) {
    const long days = days_between(record.enrollment_date, *record.discontinuation_date);
    denom = static_cast<int>(std::clamp<long>(days, 0, record.prescribed_doses));
  }
  if (denom <= 0) {
    throw std::domain_error("MEMS denominator is zero for participant " + record.participant_id);
  }
  return denom;
}

int mems_opening_days(const ParticipantRecord& record, std::span<const DateTime> openings,
                      const OutcomeCutoffs& cutoffs) {
  const Date start = record.enrollment_date;
  const Date end = add_days(start, cutoffs.mems_window_days);
  std::vector<Date> days;
  days.reserve(openings.size());
  for (const DateTime t : openings) {
    const Date d = date_of(t);
    if (d >= start && d < end) days.push_back(d);
  }
  std::sort(days.begin(), days.end());
  return static_cast<int>(std::unique(days.begin(), days.end()) - days.begin());
}

std::optional<double> mems_adherence_continuous(const ParticipantRecord& record,
                                                std::optional<std::span<const DateTime>> openings,
                                                const OutcomeCutoffs& cutoffs) {
  if (!openings) return std::nullopt;
  const int denom = mems_denominator(record);
  const int days = mems_opening_days(record, *openings, cutoffs);
  return std::min(1.0, static_cast<double>(days) / denom);
}

std::optional<int> mems_adherence_binary(const ParticipantRecord& record,
                                         std::optional<std::span<const DateTime>> openings,
                                         const OutcomeCutoffs& cutoffs) {
  if (!openings) return std::nullopt;
  const int denom = mems_denominator(record);
  const int days = mems_opening_days(record, *openings, cutoffs);
  // Uncapped ratio; strict inequality.
  const double ratio = static_cast<double>(days) / denom;
  return ratio > cutoffs.mems_threshold ? 1 : 0;
}

int hepatotoxicity_outcome(const ParticipantRecord& record) {
  if (!record.discontinued_inh || !record.discontinuation_reason) return 0;
  const auto r = *record.discontinuation_reason;
  return (r == DiscontinuationReason::hepatotoxicity_grade3 ||
          r == DiscontinuationReason::hepatotoxicity_grade4)
             ? 1
             : 0;
}

std::optional<int> viral_suppression(const ParticipantRecord& record, int month) {
  const auto detectable = record.vl_detectable_at(month);
  if (!detectable) return std::nullopt;
  return *detectable ? 0 : 1;
}

CovidCohort covid_cohort(const ParticipantRecord& record, Date cutoff_date) {
  return record.scheduled_inh_completion_date < cutoff_date ? CovidCohort::pre_lockdown
                                                            : CovidCohort::post_lockdown;
}

std::vector<DerivedOutcomes> derive_rows(const TrialDataset& dataset, const AnalysisConfig& config) {
  const auto events = dataset.events_by_participant();
  const auto& cut = config.cutoffs;
  std::vector<DerivedOutcomes> out;
  out.reserve(dataset.participants.size());
  for (const auto& p : dataset.participants) {
    DerivedOutcomes d;
    d.no_heavy_drinking = alcohol_primary_outcome(p, cut);

    std::optional<std::span<const DateTime>> openings;
    const auto it = events.find(p.participant_id);
    const bool has_events = it != events.end() && !it->second.empty();
    const bool available = p.mems_available.value_or(has_events);
    if (available) {
      openings = has_events ? std::span<const DateTime>(it->second) : std::span<const DateTime>{};
    } else if (has_events) {
      d.notes.push_back("mems_available is false but MEMS openings exist; treated as missing");
    }
    if (openings) {
      try {
        d.mems_denominator = mems_denominator(p);
        d.mems_proportion = mems_adherence_continuous(p, openings, cut);
        d.inh_adherent = mems_adherence_binary(p, openings, cut);
      } catch (const std::domain_error& e) {
        d.notes.push_back(e.what());
      }
    }

    d.peth6_continuous = p.peth_at(6);
    d.vl_suppressed_12m = viral_suppression(p, 12);
    d.vl_suppressed_6m = viral_suppression(p, 6);
    d.hepatotox_discontinuation = hepatotoxicity_outcome(p);
    d.active_tb = p.active_tb ? 1 : 0;
    d.drink_days_30 = p.drink_days_30;
    d.heavy_days_14 = p.heavy_days_14;
    d.covid_cohort = covid_cohort(p, cut.covid_cutoff_date);
    out.push_back(std::move(d));
  }
  return out;
}

std::map<std::string, DerivedOutcomes> derive_all(const TrialDataset& dataset,
                                                  const AnalysisConfig& config) {
  auto rows = derive_rows(dataset, config);
  std::map<std::string, DerivedOutcomes> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.emplace(dataset.participants[i].participant_id, std::move(rows[i]));
  }
  return out;
}

namespace {

template <typename T>
std::optional<double> as_double(const std::optional<T>& v) {
  if (!v) return std::nullopt;
  return static_cast<double>(*v);
}

using OutcomeGetter =
    std::function<std::optional<double>(const ParticipantRecord&, const DerivedOutcomes&)>;

const std::vector<std::pair<std::string, std::pair<bool, OutcomeGetter>>>& outcome_table() {
  static const std::vector<std::pair<std::string, std::pair<bool, OutcomeGetter>>> table{
      {"no_heavy_drinking", {true, [](const auto&, const auto& d) { return as_double(d.no_heavy_drinking); }}},
      {"inh_adherent", {true, [](const auto&, const auto& d) { return as_double(d.inh_adherent); }}},
      {"mems_proportion", {false, [](const auto&, const auto& d) { return d.mems_proportion; }}},
      {"peth6_continuous", {false, [](const auto&, const auto& d) { return d.peth6_continuous; }}},
      {"vl_suppressed_12m", {true, [](const auto&, const auto& d) { return as_double(d.vl_suppressed_12m); }}},
      {"vl_suppressed_6m", {true, [](const auto&, const auto& d) { return as_double(d.vl_suppressed_6m); }}},
      {"hepatotox_discontinuation", {true, [](const auto&, const auto& d) { return std::optional<double>(d.hepatotox_discontinuation); }}},
      {"active_tb", {true, [](const auto&, const auto& d) { return std::optional<double>(d.active_tb); }}},
      {"drink_days_30", {false, [](const auto&, const auto& d) { return as_double(d.drink_days_30); }}},
      {"heavy_days_14", {false, [](const auto&, const auto& d) { return as_double(d.heavy_days_14); }}},
      {"peth3_continuous", {false, [](const auto& r, const auto&) { return r.peth_at(3); }}},
      {"peth12_continuous", {false, [](const auto& r, const auto&) { return r.peth_at(12); }}},
  };
  return table;
}

const std::pair<bool, OutcomeGetter>* find_outcome(const std::string& name) {
  for (const auto& [n, entry] : outcome_table()) {
    if (n == name) return &entry;
  }
  return nullptr;
}

const std::unordered_map<std::string, OutcomeGetter>& numeric_table() {
  static const std::unordered_map<std::string, OutcomeGetter> table{
      {"gender_male", [](const auto& r, const auto&) { return std::optional<double>(r.gender == Gender::male ? 1.0 : 0.0); }},
      {"arm", [](const auto& r, const auto&) { return std::optional<double>(r.arm); }},
      {"alcohol_int", [](const auto& r, const auto&) { return std::optional<double>(derive_factor_indicators(r.arm).alcohol_int); }},
      {"adherence_int", [](const auto& r, const auto&) { return std::optional<double>(derive_factor_indicators(r.arm).adherence_int); }},
      {"peth_0", [](const auto& r, const auto&) { return r.peth_at(0); }},
      {"peth_3", [](const auto& r, const auto&) { return r.peth_at(3); }},
      {"peth_6", [](const auto& r, const auto&) { return r.peth_at(6); }},
      {"peth_12", [](const auto& r, const auto&) { return r.peth_at(12); }},
      {"auditc_0", [](const auto& r, const auto&) { return as_double(r.auditc_at(0)); }},
      {"auditc_3", [](const auto& r, const auto&) { return as_double(r.auditc_at(3)); }},
      {"auditc_6", [](const auto& r, const auto&) { return as_double(r.auditc_at(6)); }},
      {"drink_days_30", [](const auto& r, const auto&) { return as_double(r.drink_days_30); }},
      {"heavy_days_14", [](const auto& r, const auto&) { return as_double(r.heavy_days_14); }},
      {"timepref_score", [](const auto& r, const auto&) { return r.timepref_score; }},
      {"riskpref_score", [](const auto& r, const auto&) { return r.riskpref_score; }},
      {"readiness_score", [](const auto& r, const auto&) { return r.readiness_score; }},
      {"prescribed_doses", [](const auto& r, const auto&) { return std::optional<double>(r.prescribed_doses); }},
      {"covid_post_lockdown", [](const auto&, const auto& d) { return std::optional<double>(d.covid_cohort == CovidCohort::post_lockdown ? 1.0 : 0.0); }},
  };
  return table;
}

}  // namespace

std::optional<double> outcome_value(const ParticipantRecord& record, const DerivedOutcomes& derived,
                                    const std::string& name) {
  const auto* entry = find_outcome(name);
  if (entry == nullptr) throw ConfigError("unknown outcome '" + name + "'");
  return entry->second(record, derived);
}

bool is_known_outcome(const std::string& name) { return find_outcome(name) != nullptr; }

bool is_binary_outcome(const std::string& name) {
  const auto* entry = find_outcome(name);
  if (entry == nullptr) throw ConfigError("unknown outcome '" + name + "'");
  return entry->first;
}

std::optional<double> numeric_variable(const ParticipantRecord& record,
                                       const DerivedOutcomes& derived, const std::string& name) {
  const auto& table = numeric_table();
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown numeric variable '" + name + "'");
  return it->second(record, derived);
}

bool is_numeric_variable(const std::string& name) { return numeric_table().count(name) > 0; }

std::optional<std::string> categorical_variable(const ParticipantRecord& record,
                                                const DerivedOutcomes& derived,
                                                const std::string& name) {
  if (name == "gender") return to_string(record.gender);
  if (name == "site") return record.site;
  if (name == "arm") return std::to_string(record.arm);
  if (name == "covid_cohort") return to_string(derived.covid_cohort);
  if (is_numeric_variable(name)) return std::nullopt;
  throw ConfigError("unknown variable '" + name + "'");
}

bool is_categorical_variable(const std::string& name) {
  return name == "gender" || name == "site" || name == "arm" || name == "covid_cohort";
}

}  // namespace dipt
