#pragma once

// Analysis-ready view of a trial: one row per participant with the factor
// indicators, strata, one response and any named numeric covariates.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dipt/data_model.hpp"
#include "dipt/inference.hpp"
#include "dipt/outcomes.hpp"

namespace dipt {

enum class Factor { alcohol_int, adherence_int };

std::string to_string(Factor f);
Factor other_factor(Factor f);

struct AnalysisFrame {
  std::vector<std::string> ids;
  std::vector<int> arm;
  std::vector<int> alcohol;
  std::vector<int> adherence;
  std::vector<int> male;
  std::vector<std::size_t> site;  // index into `sites`
  std::vector<std::string> sites;
  std::string outcome_name;
  std::vector<std::optional<double>> outcome;
  std::map<std::string, std::vector<std::optional<double>>> covariates;
  std::vector<double> weights;  // 1 unless reweighted

  std::size_t size() const { return ids.size(); }
  int factor_value(Factor f, std::size_t row) const {
    return f == Factor::alcohol_int ? alcohol[row] : adherence[row];
  }
  AnalysisFrame subset(std::span<const std::size_t> rows) const;
  std::vector<std::size_t> all_rows() const;
};

// `sites` fixes the reference coding; participants at unlisted sites raise
// ConfigError.
AnalysisFrame build_frame(const TrialDataset& dataset, const std::vector<DerivedOutcomes>& derived,
                          const std::string& outcome, const std::vector<std::string>& covariates,
                          const std::vector<std::string>& sites);

// Rows with a non-missing response and every listed covariate present.
std::vector<std::size_t> complete_rows(const AnalysisFrame& frame,
                                       const std::vector<std::string>& covariates = {});
std::vector<std::size_t> rows_in_arms(const AnalysisFrame& frame, std::span<const std::size_t> rows,
                                      std::initializer_list<int> arms);

struct DesignSpec {
  bool alcohol = true;
  bool adherence = true;
  bool interaction = false;   // alcohol_int:adherence_int product
  bool arm_dummies = false;   // arm2..arm4 instead of the two factors
  bool strata = true;         // gender_male + site dummies
  std::vector<std::string> covariates;
  // (factor column, covariate) pairs entered as products.
  std::vector<std::pair<std::string, std::string>> products;
};

// Column order: (intercept), factors or arm dummies, interaction, strata,
// covariates, products. Strata columns constant over `rows` are dropped and
// reported in `dropped`.
DesignMatrix build_design(const AnalysisFrame& frame, std::span<const std::size_t> rows,
                          const DesignSpec& spec, std::vector<std::string>* dropped = nullptr);

std::vector<double> response(const AnalysisFrame& frame, std::span<const std::size_t> rows);
std::vector<double> row_weights(const AnalysisFrame& frame, std::span<const std::size_t> rows);

}  // namespace dipt
