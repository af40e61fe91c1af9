#include "dipt/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>

#include "dipt/errors.hpp"

namespace dipt {
namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

Date get_date(const json& j, const std::string& key) {
  const auto text = get_as<std::string>(j, key);
  const auto d = parse_date(text);
  if (!d) throw ConfigError("config key '" + key + "': expected YYYY-MM-DD, got '" + text + "'");
  return *d;
}

Moderator get_moderator(const json& j) {
  if (j.is_string()) {
    const auto col = j.get<std::string>();
    return Moderator{col, col, {}};
  }
  if (!j.is_object()) throw ConfigError("config key 'moderators': entries must be strings or objects");
  Moderator m;
  for (const auto& [k, v] : j.items()) {
    if (k == "name") {
      m.name = get_as<std::string>(v, "moderators.name");
    } else if (k == "column") {
      m.column = get_as<std::string>(v, "moderators.column");
    } else if (k == "cutpoints") {
      m.cutpoints = get_as<std::vector<double>>(v, "moderators.cutpoints");
    } else {
      throw ConfigError("config key 'moderators': unknown field '" + k + "'");
    }
  }
  if (m.column.empty()) throw ConfigError("config key 'moderators': 'column' is required");
  if (m.name.empty()) m.name = m.column;
  if (!std::is_sorted(m.cutpoints.begin(), m.cutpoints.end())) {
    throw ConfigError("moderator '" + m.name + "': cutpoints must be ascending");
  }
  return m;
}

void check_probability(double v, const std::string& key, bool open_upper = true) {
  if (!(v > 0.0) || (open_upper ? !(v < 1.0) : !(v <= 1.0))) {
    throw ConfigError("config key '" + key + "' out of range");
  }
}

}  // namespace

AnalysisConfig default_config() {
  AnalysisConfig cfg;
  cfg.moderators = {
      Moderator{"sex", "gender_male", {}},
      Moderator{"time_preference", "timepref_score", {}},
      Moderator{"risk_preference", "riskpref_score", {}},
      Moderator{"readiness_to_change", "readiness_score", {}},
  };
  return cfg;
}

AnalysisConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  AnalysisConfig cfg = default_config();
  auto& c = cfg.cutoffs;

  const std::map<std::string, std::function<void(const json&, const std::string&)>> setters{
      {"sites", [&](const json& v, const std::string& k) { cfg.sites = get_as<std::vector<std::string>>(v, k); }},
      {"peth_threshold", [&](const json& v, const std::string& k) { c.peth_threshold = get_as<double>(v, k); }},
      {"auditc_female", [&](const json& v, const std::string& k) { c.auditc_female = get_as<int>(v, k); }},
      {"auditc_male", [&](const json& v, const std::string& k) { c.auditc_male = get_as<int>(v, k); }},
      {"mems_window_days", [&](const json& v, const std::string& k) { c.mems_window_days = get_as<int>(v, k); }},
      {"mems_threshold", [&](const json& v, const std::string& k) { c.mems_threshold = get_as<double>(v, k); }},
      {"default_prescribed_doses", [&](const json& v, const std::string& k) { c.default_prescribed_doses = get_as<int>(v, k); }},
      {"covid_cutoff_date", [&](const json& v, const std::string& k) { c.covid_cutoff_date = get_date(v, k); }},
      {"vl_detection_limit", [&](const json& v, const std::string& k) { cfg.vl_detection_limit = get_as<double>(v, k); }},
      {"significance_level", [&](const json& v, const std::string& k) { cfg.significance_level = get_as<double>(v, k); }},
      {"ci_level", [&](const json& v, const std::string& k) { cfg.ci_level = get_as<double>(v, k); }},
      {"missing_threshold", [&](const json& v, const std::string& k) { cfg.missing_threshold = get_as<double>(v, k); }},
      {"weight_floor", [&](const json& v, const std::string& k) { cfg.weight_floor = get_as<double>(v, k); }},
      {"ipw_covariates", [&](const json& v, const std::string& k) { cfg.ipw_covariates = get_as<std::vector<std::string>>(v, k); }},
      {"moderators", [&](const json& v, const std::string&) {
         if (!v.is_array()) throw ConfigError("config key 'moderators' must be an array");
         cfg.moderators.clear();
         for (const auto& m : v) cfg.moderators.push_back(get_moderator(m));
       }},
      {"ancova_covariates", [&](const json& v, const std::string& k) { cfg.ancova_covariates = get_as<std::vector<std::string>>(v, k); }},
      {"descriptive_variables", [&](const json& v, const std::string& k) { cfg.descriptive_variables = get_as<std::vector<std::string>>(v, k); }},
      {"comparison_covariates", [&](const json& v, const std::string& k) { cfg.comparison_covariates = get_as<std::vector<std::string>>(v, k); }},
      {"hepatotoxicity_method", [&](const json& v, const std::string& k) {
         const auto s = get_as<std::string>(v, k);
         if (s == "joint_model") cfg.hepatotoxicity_method = HepatotoxicityMethod::joint_model;
         else if (s == "separate_models") cfg.hepatotoxicity_method = HepatotoxicityMethod::separate_models;
         else throw ConfigError("config key 'hepatotoxicity_method': expected joint_model or separate_models");
       }},
      {"stratified_adjust_strata", [&](const json& v, const std::string& k) { cfg.stratified_adjust_strata = get_as<bool>(v, k); }},
      {"participants", [&](const json& v, const std::string& k) { cfg.participants_path = get_as<std::string>(v, k); }},
      {"mems", [&](const json& v, const std::string& k) { cfg.mems_path = get_as<std::string>(v, k); }},
      {"screened", [&](const json& v, const std::string& k) { cfg.screened_path = get_as<std::string>(v, k); }},
      {"out", [&](const json& v, const std::string& k) { cfg.out_path = get_as<std::string>(v, k); }},
      {"format", [&](const json& v, const std::string& k) { cfg.format = get_as<std::string>(v, k); }},
      {"seed", [&](const json& v, const std::string& k) { cfg.seed = get_as<std::uint64_t>(v, k); }},
      {"threads", [&](const json& v, const std::string& k) { cfg.threads = get_as<unsigned>(v, k); }},
      {"n", [&](const json& v, const std::string& k) { cfg.n = get_as<std::size_t>(v, k); }},
      {"reps", [&](const json& v, const std::string& k) { cfg.reps = get_as<std::size_t>(v, k); }},
      {"bootstrap_reps", [&](const json& v, const std::string& k) { cfg.bootstrap_reps = get_as<std::size_t>(v, k); }},
  };

  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(value, key);
  }

  check_probability(cfg.significance_level, "significance_level");
  check_probability(cfg.ci_level, "ci_level");
  check_probability(cfg.missing_threshold, "missing_threshold");
  check_probability(cfg.weight_floor, "weight_floor");
  check_probability(c.mems_threshold, "mems_threshold");
  if (c.mems_window_days <= 0) throw ConfigError("config key 'mems_window_days' must be positive");
  if (c.default_prescribed_doses <= 0) throw ConfigError("config key 'default_prescribed_doses' must be positive");
  if (c.auditc_female < 0 || c.auditc_male < 0) throw ConfigError("AUDIT-C cutoffs must be non-negative");
  if (!(c.peth_threshold > 0.0)) throw ConfigError("config key 'peth_threshold' must be positive");
  for (std::size_t i = 0; i < cfg.sites.size(); ++i) {
    for (std::size_t k = i + 1; k < cfg.sites.size(); ++k) {
      if (cfg.sites[i] == cfg.sites[k]) throw ConfigError("duplicate site '" + cfg.sites[i] + "'");
    }
  }
  if (cfg.format != "json" && cfg.format != "markdown" && cfg.format != "csv") {
    throw ConfigError("config key 'format': expected json, markdown or csv");
  }
  return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

std::string to_string(HepatotoxicityMethod m) {
  return m == HepatotoxicityMethod::joint_model ? "joint_model" : "separate_models";
}

nlohmann::json to_json(const AnalysisConfig& cfg) {
  json mods = json::array();
  for (const auto& m : cfg.moderators) {
    mods.push_back({{"name", m.name}, {"column", m.column}, {"cutpoints", m.cutpoints}});
  }
  const auto& c = cfg.cutoffs;
  // Paths are left out so the echo depends on content, not on where files live.
  return json{
      {"sites", cfg.sites},
      {"peth_threshold", c.peth_threshold},
      {"auditc_female", c.auditc_female},
      {"auditc_male", c.auditc_male},
      {"mems_window_days", c.mems_window_days},
      {"mems_threshold", c.mems_threshold},
      {"default_prescribed_doses", c.default_prescribed_doses},
      {"covid_cutoff_date", format_date(c.covid_cutoff_date)},
      {"vl_detection_limit", cfg.vl_detection_limit},
      {"significance_level", cfg.significance_level},
      {"ci_level", cfg.ci_level},
      {"missing_threshold", cfg.missing_threshold},
      {"weight_floor", cfg.weight_floor},
      {"ipw_covariates", cfg.ipw_covariates},
      {"moderators", mods},
      {"ancova_covariates", cfg.ancova_covariates},
      {"descriptive_variables", cfg.descriptive_variables},
      {"comparison_covariates", cfg.comparison_covariates},
      {"hepatotoxicity_method", to_string(cfg.hepatotoxicity_method)},
      {"stratified_adjust_strata", cfg.stratified_adjust_strata},
      {"format", cfg.format},
      {"seed", cfg.seed},
      {"n", cfg.n},
      {"reps", cfg.reps},
      {"bootstrap_reps", cfg.bootstrap_reps},
  };
}

}  // namespace dipt
