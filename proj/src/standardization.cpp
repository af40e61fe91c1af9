#include "dipt/standardization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dipt/errors.hpp"
#include "dipt/kernels.hpp"

namespace dipt {
namespace {

using Eigen::VectorXd;

DesignMatrix apply_scenario(const DesignMatrix& x, const Scenario& scenario) {
  DesignMatrix cf = x;
  for (const auto& [name, value] : scenario) {
    const auto j = x.index_of(name);
    if (!j) throw std::invalid_argument("column '" + name + "' is not in the design matrix");
    auto col = cf.column(*j);
    std::fill(col.begin(), col.end(), value);
  }
  cf.refresh_products();
  return cf;
}

std::vector<double> predict(const FittedGlm& model, const DesignMatrix& x) {
  if (model.coefficients.size() != x.cols()) {
    throw std::invalid_argument("model and design matrix disagree on the number of columns");
  }
  std::vector<double> eta(x.rows());
  kernels::gemv_colmajor(x.data(), x.rows(), x.cols(), model.coefficients, eta);
  for (double& v : eta) v = expit(v);
  return eta;
}

// (1/sum w) sum_i w_i pi_i (1 - pi_i) x_i over the selected rows.
VectorXd risk_gradient(const DesignMatrix& cf, std::span<const double> pi,
                       std::span<const double> w, double wsum) {
  std::vector<double> dw(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) dw[i] = w[i] * pi[i] * (1.0 - pi[i]);
  const std::vector<double> ones(pi.size(), 1.0);
  std::vector<double> g(cf.cols());
  kernels::weighted_xt_vec(cf.data(), cf.rows(), cf.cols(), dw, ones, g);
  VectorXd out(static_cast<Eigen::Index>(g.size()));
  for (std::size_t j = 0; j < g.size(); ++j) out(static_cast<Eigen::Index>(j)) = g[j] / wsum;
  return out;
}

double wald_p(double estimate, double se) {
  if (se > 0.0) return normal_two_sided_p(estimate / se);
  return estimate == 0.0 ? 1.0 : 0.0;
}

}  // namespace

std::vector<double> predict_scenario(const FittedGlm& model, const DesignMatrix& x,
                                     const Scenario& scenario) {
  return predict(model, apply_scenario(x, scenario));
}

std::vector<double> predict_counterfactual(const FittedGlm& model, const DesignMatrix& x,
                                           const std::string& factor_column, double level) {
  return predict_scenario(model, x, {{factor_column, level}});
}

std::pair<double, double> adjusted_risks(std::span<const double> pi1, std::span<const double> pi0,
                                         std::span<const double> weights) {
  if (pi1.size() != pi0.size()) throw std::invalid_argument("prediction vectors differ in length");
  if (pi1.empty()) throw std::invalid_argument("no rows to standardize over");
  if (!weights.empty() && weights.size() != pi1.size()) {
    throw std::invalid_argument("weights length mismatch");
  }
  double s1 = 0.0, s0 = 0.0, sw = 0.0;
  for (std::size_t i = 0; i < pi1.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    s1 += w * pi1[i];
    s0 += w * pi0[i];
    sw += w;
  }
  return {s1 / sw, s0 / sw};
}

RiskContrast risk_difference_and_ratio(double risk1, double risk0) {
  RiskContrast c;
  c.rd = risk1 - risk0;
  if (risk0 > 0.0) c.rr = risk1 / risk0;
  return c;
}

MarginalEstimate contrast_inference(const FittedGlm& model, const DesignMatrix& x,
                                    const Scenario& treated, const Scenario& control,
                                    double ci_level, std::span<const double> weights,
                                    std::span<const std::size_t> rows) {
  if (!model.converged) throw std::invalid_argument("delta method needs a converged model");
  if (model.family != GlmFamily::binomial_logit) {
    throw std::invalid_argument("standardization requires a logistic model");
  }
  DesignMatrix sub;
  std::vector<double> w;
  if (rows.empty()) {
    sub = x;
    w = weights.empty() ? std::vector<double>(x.rows(), 1.0)
                        : std::vector<double>(weights.begin(), weights.end());
  } else {
    sub = x.select_rows(rows);
    for (std::size_t r : rows) w.push_back(weights.empty() ? 1.0 : weights[r]);
  }
  if (sub.rows() == 0) throw std::invalid_argument("no rows to standardize over");

  const DesignMatrix cf1 = apply_scenario(sub, treated);
  const DesignMatrix cf0 = apply_scenario(sub, control);
  const auto pi1 = predict(model, cf1);
  const auto pi0 = predict(model, cf0);
  const auto [risk1, risk0] = adjusted_risks(pi1, pi0, w);

  double wsum = 0.0;
  for (double v : w) wsum += v;
  const VectorXd g1 = risk_gradient(cf1, pi1, w, wsum);
  const VectorXd g0 = risk_gradient(cf0, pi0, w, wsum);
  const auto& v = model.covariance;

  MarginalEstimate est;
  est.risk1 = risk1;
  est.risk0 = risk0;
  const auto contrast = risk_difference_and_ratio(risk1, risk0);
  est.rd = contrast.rd;
  est.rr = contrast.rr;
  est.n = sub.rows();
  est.ci_level = ci_level;
  est.model_columns = model.column_names;

  const double z = normal_quantile(0.5 + 0.5 * ci_level);
  const VectorXd grd = g1 - g0;
  const double var_rd = grd.dot(v * grd);
  est.se_rd = std::sqrt(std::max(0.0, var_rd));
  est.ci_rd = {est.rd - z * est.se_rd, est.rd + z * est.se_rd};
  est.p_rd = wald_p(est.rd, est.se_rd);

  if (risk1 > 0.0 && risk0 > 0.0) {
    const VectorXd h = g1 / risk1 - g0 / risk0;
    const double se = std::sqrt(std::max(0.0, h.dot(v * h)));
    const double log_rr = std::log(risk1) - std::log(risk0);
    est.se_log_rr = se;
    est.ci_rr = std::pair{std::exp(log_rr - z * se), std::exp(log_rr + z * se)};
    est.p_rr = wald_p(log_rr, se);
  }
  return est;
}

MarginalEstimate delta_method_inference(const FittedGlm& model, const DesignMatrix& x,
                                        const std::string& factor_column, double ci_level,
                                        std::span<const double> weights) {
  auto est = contrast_inference(model, x, {{factor_column, 1.0}}, {{factor_column, 0.0}},
                                ci_level, weights);
  est.factor = factor_column;
  return est;
}

AnalysisOptions analysis_options(const AnalysisConfig& config) {
  AnalysisOptions o;
  o.ci_level = config.ci_level;
  o.significance_level = config.significance_level;
  o.stratified_adjust_strata = config.stratified_adjust_strata;
  return o;
}

FactorialResult factorial_analysis(const AnalysisFrame& frame, Factor factor,
                                   const AnalysisOptions& options,
                                   std::optional<std::span<const std::size_t>> rows) {
  const auto all = complete_rows(frame, options.covariates);
  std::vector<std::size_t> use;
  if (rows) {
    for (std::size_t r : *rows) {
      if (std::binary_search(all.begin(), all.end(), r)) use.push_back(r);
    }
  } else {
    use = all;
  }
  if (use.empty()) throw AnalysisError("no complete cases for outcome '" + frame.outcome_name + "'");

  DesignSpec spec;
  spec.strata = options.adjust_strata;
  spec.covariates = options.covariates;
  FactorialResult res;
  res.n_total = rows ? rows->size() : frame.size();
  const DesignMatrix x = build_design(frame, use, spec, &res.dropped_columns);
  const auto y = response(frame, use);
  const auto w = row_weights(frame, use);
  res.model = fit_logistic(x, y, w);
  res.estimate = delta_method_inference(res.model, x, to_string(factor), options.ci_level, w);
  return res;
}

std::vector<std::pair<std::string, std::vector<int>>> stratified_subsets(Factor factor) {
  if (factor == Factor::alcohol_int) {
    return {{"arm2_vs_arm1", {1, 2}}, {"arm4_vs_arm3", {3, 4}}};
  }
  return {{"arm3_vs_arm1", {1, 3}}, {"arm4_vs_arm2", {2, 4}}};
}

InteractionReport interaction_analysis(const AnalysisFrame& frame, Factor factor,
                                       const AnalysisOptions& options) {
  const auto rows = complete_rows(frame, options.covariates);
  if (rows.empty()) throw AnalysisError("no complete cases for outcome '" + frame.outcome_name + "'");
  const auto y = response(frame, rows);
  const auto w = row_weights(frame, rows);

  DesignSpec reduced_spec;
  reduced_spec.strata = options.adjust_strata;
  reduced_spec.covariates = options.covariates;
  DesignSpec full_spec = reduced_spec;
  full_spec.interaction = true;

  const auto x_full = build_design(frame, rows, full_spec);
  const auto x_reduced = build_design(frame, rows, reduced_spec);
  const auto full = fit_logistic(x_full, y, w);
  const auto reduced = fit_logistic(x_reduced, y, w);

  InteractionReport rep;
  rep.factor = factor;
  rep.n = rows.size();
  rep.lrt = likelihood_ratio_test(full, reduced);
  const auto j = *full.index_of("alcohol_int:adherence_int");
  rep.interaction_coefficient = full.coefficients[j];
  rep.interaction_se = full.se(j);
  rep.significant = rep.lrt.p_value < options.significance_level;
  if (!rep.significant) {
    rep.action = "no further action required";
    return rep;
  }
  rep.action = "stratified estimates by level of " + to_string(other_factor(factor));
  for (const auto& [label, arms] : stratified_subsets(factor)) {
    StratifiedEstimate s;
    s.label = label;
    s.arms = arms;
    try {
      std::vector<std::size_t> sub;
      for (std::size_t r : rows) {
        if (frame.arm[r] == arms[0] || frame.arm[r] == arms[1]) sub.push_back(r);
      }
      DesignSpec spec;
      spec.alcohol = factor == Factor::alcohol_int;
      spec.adherence = factor == Factor::adherence_int;
      spec.strata = options.stratified_adjust_strata;
      spec.covariates = options.covariates;
      const auto xs = build_design(frame, sub, spec);
      const auto ys = response(frame, sub);
      const auto ws = row_weights(frame, sub);
      const auto m = fit_logistic(xs, ys, ws);
      s.estimate = delta_method_inference(m, xs, to_string(factor), options.ci_level, ws);
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    rep.stratified.push_back(std::move(s));
  }
  return rep;
}

}  // namespace dipt
