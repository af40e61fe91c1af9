#pragma once

// Missing-outcome handling: complete-case filtering, worst-case imputation
// of the alcohol outcome, and inverse-probability-of-observation weighting.

#include <optional>
#include <string>
#include <vector>

#include "dipt/frame.hpp"
#include "dipt/outcomes.hpp"
#include "dipt/standardization.hpp"

namespace dipt {

struct CompleteCaseSubset {
  std::vector<std::size_t> rows;
  std::size_t retained = 0;
  std::size_t dropped = 0;
  std::optional<std::string> warning;  // set when nothing is retained
};

CompleteCaseSubset complete_case_filter(const AnalysisFrame& frame);

struct ImputationResult {
  std::vector<DerivedOutcomes> derived;
  std::size_t imputed = 0;
};

// Missing no_heavy_drinking becomes 0 (heavy drinking); observed values are
// left untouched.
ImputationResult worst_case_impute_alcohol(std::vector<DerivedOutcomes> derived);

struct IpwOptions {
  std::vector<std::string> covariates;
  double weight_floor = 0.02;
  double missing_threshold = 0.10;
};

IpwOptions ipw_options(const AnalysisConfig& config);

struct IpwResult {
  MarginalEstimate estimate;
  FittedGlm outcome_model;
  std::optional<FittedGlm> missingness_model;
  double missing_fraction = 0.0;
  bool triggered = false;  // missing_fraction > threshold
  std::size_t n_total = 0;
  std::size_t n_observed = 0;
  std::size_t n_dropped_missing_covariates = 0;
  double min_weight = 1.0;  // of 1/p before stabilization
  double max_weight = 1.0;
  std::size_t truncated = 0;
  double stabilization = 1.0;  // marginal observed fraction multiplying 1/p
  std::vector<double> weights;  // stabilized, aligned with frame rows; 0 if unused
};

// Observed rows are weighted by P(observed) / p_i with p_i from a logistic
// model of observation on the configured covariates, floored at
// weight_floor. With no missing outcomes this is exactly the complete-case
// analysis. Throws ConfigError when covariates are needed but not listed.
IpwResult ipw_analysis(const AnalysisFrame& frame, Factor factor, const AnalysisOptions& options,
                       const IpwOptions& ipw);

}  // namespace dipt
