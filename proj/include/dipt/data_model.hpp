#pragma once

// Trial dataset: participant records, MEMS cap openings and the optional
// screening file for people who declined enrollment.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dipt/config.hpp"
#include "dipt/date.hpp"

namespace dipt {

enum class Gender { female, male };
enum class DiscontinuationReason { hepatotoxicity_grade3, hepatotoxicity_grade4, other };

std::string to_string(Gender g);
std::string to_string(DiscontinuationReason r);

struct ParticipantRecord {
  std::string participant_id;
  std::string site;
  Gender gender = Gender::female;
  int arm = 1;
  Date enrollment_date{};
  Date scheduled_inh_completion_date{};
  bool discontinued_inh = false;
  std::optional<Date> discontinuation_date;
  std::optional<DiscontinuationReason> discontinuation_reason;
  int prescribed_doses = 180;
  std::array<bool, 3> visit_attended{};                 // months 3, 6, 12
  std::array<std::optional<double>, 4> peth{};          // months 0, 3, 6, 12
  std::array<std::optional<int>, 3> auditc{};           // months 0, 3, 6
  std::array<std::optional<bool>, 2> vl_detectable{};   // months 6, 12
  bool active_tb = false;
  std::optional<int> drink_days_30;
  std::optional<int> heavy_days_14;
  std::optional<double> timepref_score;
  std::optional<double> riskpref_score;
  std::optional<double> readiness_score;
  // Explicit MEMS availability; unset means "available iff any opening".
  std::optional<bool> mems_available;

  // Month-keyed accessors; throw std::out_of_range for unmeasured months.
  bool visit_attended_at(int month) const;
  std::optional<double> peth_at(int month) const;
  std::optional<int> auditc_at(int month) const;
  std::optional<bool> vl_detectable_at(int month) const;

  friend bool operator==(const ParticipantRecord&, const ParticipantRecord&) = default;
};

struct MemsEvent {
  std::string participant_id;
  DateTime opening_timestamp{};

  friend bool operator==(const MemsEvent&, const MemsEvent&) = default;
};

// One non-enrollee from the screening log; values keyed by column name,
// empty string = missing.
struct ScreenedRecord {
  std::string screening_id;
  std::map<std::string, std::string> values;

  friend bool operator==(const ScreenedRecord&, const ScreenedRecord&) = default;
};

struct FactorIndicators {
  int alcohol_int = 0;
  int adherence_int = 0;

  friend bool operator==(const FactorIndicators&, const FactorIndicators&) = default;
};

// arm 1 -> (0,0), 2 -> (1,0), 3 -> (0,1), 4 -> (1,1); throws std::invalid_argument.
FactorIndicators derive_factor_indicators(int arm);
int arm_from_indicators(FactorIndicators f);

struct TrialDataset {
  std::vector<ParticipantRecord> participants;
  std::vector<MemsEvent> mems_events;
  std::optional<std::vector<ScreenedRecord>> screened_declined;
  std::vector<std::string> screened_columns;  // variable columns, file order

  // Openings grouped by participant, each list sorted by time.
  std::unordered_map<std::string, std::vector<DateTime>> events_by_participant() const;
  const ParticipantRecord* find(const std::string& participant_id) const;
};

extern const std::vector<std::string> kParticipantColumns;

// Throws LoadError listing every row-level problem.
TrialDataset load_trial_data(const std::filesystem::path& participants_path,
                             const std::filesystem::path& mems_path,
                             const AnalysisConfig& config,
                             const std::optional<std::filesystem::path>& screened_path = std::nullopt);

// Stream variants; `name` labels diagnostics.
std::vector<ParticipantRecord> read_participants(std::istream& in, const AnalysisConfig& config,
                                                 const std::string& name = "participants.csv");
std::vector<MemsEvent> read_mems(std::istream& in, const std::string& name = "mems.csv");
std::vector<ScreenedRecord> read_screened(std::istream& in, std::vector<std::string>& columns,
                                          const std::string& name = "screened.csv");
// Joins and duplicate checks; throws LoadError.
TrialDataset assemble_dataset(std::vector<ParticipantRecord> participants,
                              std::vector<MemsEvent> events);

void write_participants(std::ostream& out, const std::vector<ParticipantRecord>& participants);
void write_mems(std::ostream& out, const std::vector<MemsEvent>& events);

struct ValidationIssue {
  std::string participant_id;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;    // block analysis
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
};

ValidationReport validate(const TrialDataset& dataset, const AnalysisConfig& config);

// Site levels in reference-coding order: configured sites, else order of
// first appearance.
std::vector<std::string> resolve_sites(const TrialDataset& dataset, const AnalysisConfig& config);

}  // namespace dipt
