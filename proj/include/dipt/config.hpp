#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dipt/date.hpp"
#include "json.hpp"

namespace dipt {

// Thresholds used by outcome derivation.
struct OutcomeCutoffs {
  double peth_threshold = 35.0;  // ng/mL, outcome requires PEth strictly below
  int auditc_female = 3;         // heavy drinking at or above
  int auditc_male = 4;
  int mems_window_days = 270;
  double mems_threshold = 0.90;  // adherent iff proportion strictly above
  int default_prescribed_doses = 180;
  Date covid_cutoff_date = Date{std::chrono::year{2020} / 3 / 19};
};

struct Moderator {
  std::string name;    // label used in analysis names
  std::string column;  // numeric variable, see outcomes.hpp
  // Strata boundaries for stratified reporting; empty means binary
  // moderators split on their two levels and others at the median.
  std::vector<double> cutpoints;
};

enum class HepatotoxicityMethod { joint_model, separate_models };

struct AnalysisConfig {
  // Study sites in reference-coding order; the first is the reference level.
  // Empty means "sites in order of first appearance in the data".
  std::vector<std::string> sites;
  OutcomeCutoffs cutoffs;
  // Copies/mL at or above which a numeric viral load counts as detectable.
  double vl_detection_limit = 40.0;

  double significance_level = 0.05;
  double ci_level = 0.95;
  double missing_threshold = 0.10;
  double weight_floor = 0.02;
  std::vector<std::string> ipw_covariates;
  std::vector<Moderator> moderators;
  std::vector<std::string> ancova_covariates{"peth_0", "auditc_0"};
  std::vector<std::string> descriptive_variables{
      "gender", "site", "peth_0", "auditc_0", "timepref_score", "riskpref_score",
      "readiness_score"};
  std::vector<std::string> comparison_covariates{"gender", "site", "peth_0", "auditc_0"};
  HepatotoxicityMethod hepatotoxicity_method = HepatotoxicityMethod::joint_model;
  bool stratified_adjust_strata = true;

  // Run settings; each mirrors a CLI flag.
  std::string participants_path;
  std::string mems_path;
  std::string screened_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::size_t n = 400;
  std::size_t reps = 1000;
  std::size_t bootstrap_reps = 2000;
};

AnalysisConfig default_config();
// Unknown keys and ill-typed values raise ConfigError.
AnalysisConfig config_from_json(const nlohmann::json& j);
AnalysisConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const AnalysisConfig& cfg);

std::string to_string(HepatotoxicityMethod m);

}  // namespace dipt
