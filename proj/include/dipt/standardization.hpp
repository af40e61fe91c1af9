#pragma once

// Marginal standardization of a fitted logistic model: counterfactual
// predictions, adjusted risks, risk difference / ratio, and delta-method
// inference.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dipt/config.hpp"
#include "dipt/frame.hpp"
#include "dipt/inference.hpp"

namespace dipt {

struct MarginalEstimate {
  std::string factor;
  double risk1 = 0.0;
  double risk0 = 0.0;
  double rd = 0.0;
  std::optional<double> rr;  // undefined when risk0 == 0
  double se_rd = 0.0;
  std::optional<double> se_log_rr;
  std::pair<double, double> ci_rd{};
  std::optional<std::pair<double, double>> ci_rr;
  double p_rd = 1.0;
  std::optional<double> p_rr;
  std::size_t n = 0;
  double ci_level = 0.95;
  std::vector<std::string> model_columns;
};

// Column assignments defining one counterfactual scenario.
using Scenario = std::vector<std::pair<std::string, double>>;

// expit(x_i(level) beta) with the factor column of every row set to `level`.
// Throws std::invalid_argument if the column is absent.
std::vector<double> predict_counterfactual(const FittedGlm& model, const DesignMatrix& x,
                                           const std::string& factor_column, double level);
std::vector<double> predict_scenario(const FittedGlm& model, const DesignMatrix& x,
                                     const Scenario& scenario);

// Weighted means; unit weights when `weights` is empty.
std::pair<double, double> adjusted_risks(std::span<const double> pi1, std::span<const double> pi0,
                                         std::span<const double> weights = {});

struct RiskContrast {
  double rd = 0.0;
  std::optional<double> rr;
};
RiskContrast risk_difference_and_ratio(double risk1, double risk0);

// Delta-method contrast of `treated` against `control`, standardized over
// `rows` of x (all rows when empty). Throws std::invalid_argument for a
// non-converged model.
MarginalEstimate contrast_inference(const FittedGlm& model, const DesignMatrix& x,
                                    const Scenario& treated, const Scenario& control,
                                    double ci_level, std::span<const double> weights = {},
                                    std::span<const std::size_t> rows = {});

MarginalEstimate delta_method_inference(const FittedGlm& model, const DesignMatrix& x,
                                        const std::string& factor_column, double ci_level,
                                        std::span<const double> weights = {});

struct AnalysisOptions {
  double ci_level = 0.95;
  double significance_level = 0.05;
  bool adjust_strata = true;
  bool stratified_adjust_strata = true;
  std::vector<std::string> covariates;
};

AnalysisOptions analysis_options(const AnalysisConfig& config);

struct FactorialResult {
  MarginalEstimate estimate;
  FittedGlm model;
  std::vector<std::string> dropped_columns;
  std::size_t n_total = 0;  // frame rows before complete-case filtering
};

// Logistic model [intercept, factor, other factor, strata, covariates] over
// complete rows, standardized over the same rows with the frame weights.
FactorialResult factorial_analysis(const AnalysisFrame& frame, Factor factor,
                                   const AnalysisOptions& options,
                                   std::optional<std::span<const std::size_t>> rows = std::nullopt);

struct StratifiedEstimate {
  std::string label;  // e.g. arm2_vs_arm1
  std::vector<int> arms;
  std::optional<MarginalEstimate> estimate;
  std::string error;
};

struct InteractionReport {
  Factor factor = Factor::alcohol_int;
  TestResult lrt;
  double interaction_coefficient = 0.0;
  double interaction_se = 0.0;
  bool significant = false;
  std::string action;
  std::vector<StratifiedEstimate> stratified;
  std::size_t n = 0;
};

// Likelihood-ratio test of the alcohol x adherence product. When significant,
// reports the factor's effect in each two-arm subset at fixed levels of the
// other factor.
InteractionReport interaction_analysis(const AnalysisFrame& frame, Factor factor,
                                       const AnalysisOptions& options);

// Two-arm subsets for stratified reporting, e.g. {arm2_vs_arm1, {1,2}}.
std::vector<std::pair<std::string, std::vector<int>>> stratified_subsets(Factor factor);

}  // namespace dipt
