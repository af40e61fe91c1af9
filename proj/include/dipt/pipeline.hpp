#pragma once

// Orchestration of the prespecified analyses and report serialization.

#include <string>
#include <utility>
#include <vector>

#include "dipt/config.hpp"
#include "dipt/data_model.hpp"
#include "json.hpp"

namespace dipt {

extern const char* const kSoftwareVersion;

using ojson = nlohmann::ordered_json;

enum class AnalysisStatus { ok, failed, skipped };
std::string to_string(AnalysisStatus s);

struct AnalysisRecord {
  std::string name;
  std::string section;  // descriptive, primary, secondary, exploratory, missing_data
  std::string outcome;
  std::string factor;
  std::string population;
  AnalysisStatus status = AnalysisStatus::ok;
  std::string error;
  ojson estimates = ojson::object();
  ojson tests = ojson::object();
  ojson metadata = ojson::object();
};

struct AnalysisReport {
  std::vector<AnalysisRecord> analyses;
  ojson config_echo;
  std::string software_version;
  std::string dataset_fingerprint;
  std::vector<std::string> notes;

  std::size_t failures() const;
  const AnalysisRecord* find(const std::string& name) const;
};

enum class Section { descriptive, primary, secondary, exploratory, missing_data };
std::string to_string(Section s);

// Analysis names the config prespecifies for one section, in report order.
std::vector<std::string> prespecified_analyses(const AnalysisConfig& config, Section section);

// FNV-1a 64 over the canonical CSV serialization of the dataset.
std::string dataset_fingerprint(const TrialDataset& dataset);

// Runs the named sections. Failed analyses are recorded, never thrown.
// Up to config.threads analyses run concurrently; order is fixed.
AnalysisReport run_analyses(const TrialDataset& dataset, const AnalysisConfig& config,
                            const std::vector<Section>& sections);

AnalysisReport run_primary(const TrialDataset& dataset, const AnalysisConfig& config);
AnalysisReport run_secondary(const TrialDataset& dataset, const AnalysisConfig& config);
AnalysisReport run_exploratory(const TrialDataset& dataset, const AnalysisConfig& config);

ojson report_to_json(const AnalysisReport& report);

// (relative path, contents). json -> report.json, markdown -> report.md,
// csv -> tables/*.csv. Throws ConfigError for any other format.
std::vector<std::pair<std::string, std::string>> emit_report(const AnalysisReport& report,
                                                              const std::string& format);

}  // namespace dipt
