#include "dipt/missingness.hpp"

#include <algorithm>
#include <limits>
#include <span>

#include "dipt/errors.hpp"

namespace dipt {

CompleteCaseSubset complete_case_filter(const AnalysisFrame& frame) {
  CompleteCaseSubset out;
  out.rows = complete_rows(frame);
  out.retained = out.rows.size();
  out.dropped = frame.size() - out.retained;
  if (out.retained == 0) {
    out.warning = "all " + std::to_string(frame.size()) + " participants have missing '" +
                  frame.outcome_name + "'";
  }
  return out;
}

ImputationResult worst_case_impute_alcohol(std::vector<DerivedOutcomes> derived) {
  ImputationResult res;
  for (auto& d : derived) {
    if (!d.no_heavy_drinking) {
      d.no_heavy_drinking = 0;
      ++res.imputed;
    }
  }
  res.derived = std::move(derived);
  return res;
}

IpwOptions ipw_options(const AnalysisConfig& config) {
  IpwOptions o;
  o.covariates = config.ipw_covariates;
  o.weight_floor = config.weight_floor;
  o.missing_threshold = config.missing_threshold;
  return o;
}

IpwResult ipw_analysis(const AnalysisFrame& frame, Factor factor, const AnalysisOptions& options,
                       const IpwOptions& ipw) {
  IpwResult res;
  res.n_total = frame.size();
  std::size_t missing = 0;
  for (const auto& y : frame.outcome) missing += y ? 0 : 1;
  res.n_observed = frame.size() - missing;
  res.missing_fraction = frame.size() ? static_cast<double>(missing) / frame.size() : 0.0;
  res.triggered = res.missing_fraction > ipw.missing_threshold;

  if (missing == 0) {
    auto fr = factorial_analysis(frame, factor, options);
    res.estimate = std::move(fr.estimate);
    res.outcome_model = std::move(fr.model);
    res.weights.assign(frame.size(), 1.0);
    return res;
  }
  if (ipw.covariates.empty()) {
    throw ConfigError("inverse probability weighting needs ipw_covariates in the configuration");
  }

  // Frame already holds the IPW covariates; rows lacking any are excluded.
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    bool ok = true;
    for (const auto& c : ipw.covariates) {
      const auto it = frame.covariates.find(c);
      if (it == frame.covariates.end()) throw AnalysisError("IPW covariate '" + c + "' is not in the frame");
      if (!it->second[i]) ok = false;
    }
    if (ok) usable.push_back(i);
  }
  res.n_dropped_missing_covariates = frame.size() - usable.size();

  AnalysisFrame obs_frame = frame;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    obs_frame.outcome[i] = frame.outcome[i] ? 1.0 : 0.0;
  }
  DesignSpec spec;
  spec.alcohol = false;
  spec.adherence = false;
  spec.strata = false;
  spec.covariates = ipw.covariates;
  const DesignMatrix xm = build_design(obs_frame, usable, spec);
  const auto observed = response(obs_frame, usable);
  res.missingness_model = fit_logistic(xm, observed);

  std::vector<double> eta(usable.size());
  const auto& beta = res.missingness_model->coefficients;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < xm.cols(); ++j) s += xm(k, j) * beta[j];
    eta[k] = s;
  }
  double n_obs_usable = 0.0;
  for (double o : observed) n_obs_usable += o;
  res.stabilization = n_obs_usable / static_cast<double>(usable.size());

  AnalysisFrame weighted = frame;
  std::fill(weighted.weights.begin(), weighted.weights.end(), 0.0);
  std::vector<std::size_t> analysis_rows;
  res.min_weight = std::numeric_limits<double>::infinity();
  res.max_weight = 0.0;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    const std::size_t r = usable[k];
    if (!frame.outcome[r]) continue;
    double p = expit(eta[k]);
    if (p < ipw.weight_floor) {
      p = ipw.weight_floor;
      ++res.truncated;
    }
    const double inv = 1.0 / p;
    res.min_weight = std::min(res.min_weight, inv);
    res.max_weight = std::max(res.max_weight, inv);
    weighted.weights[r] = res.stabilization * inv;
    analysis_rows.push_back(r);
  }
  if (analysis_rows.empty()) throw AnalysisError("no observed outcomes among usable rows");
  auto fr = factorial_analysis(weighted, factor, options, std::span<const std::size_t>(analysis_rows));
  res.estimate = std::move(fr.estimate);
  res.outcome_model = std::move(fr.model);
  res.weights = std::move(weighted.weights);
  return res;
}

}  // namespace dipt
