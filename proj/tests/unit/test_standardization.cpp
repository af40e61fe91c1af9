#include <cmath>

#include "doctest.h"
#include "dipt/errors.hpp"
#include "dipt/standardization.hpp"
#include "frame_fixtures.hpp"

using namespace dipt;

namespace {

struct Counts {
  double n1 = 0, s1 = 0, n0 = 0, s0 = 0;
};

Counts by_factor(const AnalysisFrame& f, Factor factor) {
  Counts c;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.outcome[i]) continue;
    if (f.factor_value(factor, i)) {
      c.n1 += 1;
      c.s1 += *f.outcome[i];
    } else {
      c.n0 += 1;
      c.s0 += *f.outcome[i];
    }
  }
  return c;
}

// Intercept + one factor column.
std::pair<DesignMatrix, std::vector<double>> one_factor(const AnalysisFrame& f) {
  DesignMatrix x(f.size(), {"(intercept)", "alcohol_int"});
  std::vector<double> y;
  for (std::size_t i = 0; i < f.size(); ++i) {
    x(i, 0) = 1;
    x(i, 1) = f.alcohol[i];
    y.push_back(*f.outcome[i]);
  }
  return {x, y};
}

}  // namespace

TEST_CASE("unadjusted model: adjusted risks are the raw proportions") {
  const auto f = fixtures::logistic_frame({});
  auto [x, y] = one_factor(f);
  const auto m = fit_logistic(x, y);
  const auto est = delta_method_inference(m, x, "alcohol_int", 0.95);
  const auto c = by_factor(f, Factor::alcohol_int);
  CHECK(std::abs(est.risk1 - c.s1 / c.n1) <= 1e-12);
  CHECK(std::abs(est.risk0 - c.s0 / c.n0) <= 1e-12);
  CHECK(est.rd == doctest::Approx(c.s1 / c.n1 - c.s0 / c.n0).epsilon(1e-12));
  CHECK(*est.rr == doctest::Approx((c.s1 / c.n1) / (c.s0 / c.n0)).epsilon(1e-12));
}

TEST_CASE("unadjusted delta-method SEs equal the binomial formulas") {
  const auto f = fixtures::logistic_frame({.n = 600, .seed = 4});
  auto [x, y] = one_factor(f);
  const auto m = fit_logistic(x, y);
  const auto est = delta_method_inference(m, x, "alcohol_int", 0.95);
  const auto c = by_factor(f, Factor::alcohol_int);
  const double p1 = c.s1 / c.n1, p0 = c.s0 / c.n0;
  const double se_rd = std::sqrt(p1 * (1 - p1) / c.n1 + p0 * (1 - p0) / c.n0);
  CHECK(est.se_rd == doctest::Approx(se_rd).epsilon(1e-8));
  const double se_lrr = std::sqrt((1 - p1) / (c.n1 * p1) + (1 - p0) / (c.n0 * p0));
  CHECK(*est.se_log_rr == doctest::Approx(se_lrr).epsilon(1e-8));
  const double z = normal_quantile(0.975);
  CHECK(est.ci_rd.first == doctest::Approx(est.rd - z * se_rd).epsilon(1e-8));
  CHECK(est.ci_rr->second == doctest::Approx(*est.rr * std::exp(z * se_lrr)).epsilon(1e-8));
}

TEST_CASE("counterfactual predictions set the factor for every row") {
  const auto f = fixtures::logistic_frame({});
  DesignSpec spec;
  const auto x = build_design(f, f.all_rows(), spec);
  const auto m = fit_logistic(x, response(f, f.all_rows()));
  const auto p1 = predict_counterfactual(m, x, "alcohol_int", 1.0);
  const auto p0 = predict_counterfactual(m, x, "alcohol_int", 0.0);
  const std::size_t ja = *x.index_of("alcohol_int");
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double e1 = 0, e0 = 0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double v = j == ja ? 1.0 : x(i, j);
      e1 += v * m.coefficients[j];
      e0 += (j == ja ? 0.0 : x(i, j)) * m.coefficients[j];
    }
    CHECK(p1[i] == doctest::Approx(expit(e1)).epsilon(1e-13));
    CHECK(p0[i] == doctest::Approx(expit(e0)).epsilon(1e-13));
    CHECK(p1[i] > p0[i]);  // positive coefficient
  }
  CHECK_THROWS_AS(predict_counterfactual(m, x, "nope", 1.0), std::invalid_argument);
}

TEST_CASE("risk contrasts") {
  const auto c = risk_difference_and_ratio(0.3, 0.2);
  CHECK(c.rd == doctest::Approx(0.1));
  CHECK(*c.rr == doctest::Approx(1.5));
  CHECK_FALSE(risk_difference_and_ratio(0.3, 0.0).rr.has_value());
  const std::vector<double> a{0.2, 0.4}, b{0.1, 0.1}, w{3.0, 1.0};
  const auto [r1, r0] = adjusted_risks(a, b, w);
  CHECK(r1 == doctest::Approx(0.25));
  CHECK(r0 == doctest::Approx(0.1));
}

TEST_CASE("non-converged models are refused") {
  const auto f = fixtures::logistic_frame({});
  auto [x, y] = one_factor(f);
  auto m = fit_logistic(x, y);
  m.converged = false;
  CHECK_THROWS_AS(delta_method_inference(m, x, "alcohol_int", 0.95), std::invalid_argument);
}

TEST_CASE("factorial analysis uses both factors and the strata") {
  const auto f = fixtures::logistic_frame({});
  const auto r = factorial_analysis(f, Factor::adherence_int, {});
  CHECK(r.model.column_names ==
        std::vector<std::string>{"(intercept)", "alcohol_int", "adherence_int", "gender_male", "site_site_b"});
  CHECK(r.estimate.factor == "adherence_int");
  CHECK(r.estimate.n == 400);
  CHECK(r.dropped_columns.empty());
}

TEST_CASE("constant strata columns are dropped and reported") {
  auto f = fixtures::logistic_frame({});
  std::fill(f.site.begin(), f.site.end(), 0);
  const auto r = factorial_analysis(f, Factor::alcohol_int, {});
  CHECK(r.dropped_columns == std::vector<std::string>{"site_site_b"});
}

TEST_CASE("stratified subsets fix the other factor") {
  const auto a = stratified_subsets(Factor::alcohol_int);
  REQUIRE(a.size() == 2);
  CHECK(a[0].first == "arm2_vs_arm1");
  CHECK(a[0].second == std::vector<int>{1, 2});
  CHECK(a[1].second == std::vector<int>{3, 4});
  const auto h = stratified_subsets(Factor::adherence_int);
  CHECK(h[0].second == std::vector<int>{1, 3});
  CHECK(h[1].second == std::vector<int>{2, 4});
}

TEST_CASE("no interaction: no further action") {
  const auto f = fixtures::logistic_frame({.n = 800, .bi = 0.0, .seed = 2});
  const auto r = interaction_analysis(f, Factor::alcohol_int, {});
  if (!r.significant) {
    CHECK(r.action == "no further action required");
    CHECK(r.stratified.empty());
  }
  CHECK(r.lrt.df == 1.0);
}

TEST_CASE("strong interaction triggers stratified estimates") {
  const auto f = fixtures::logistic_frame({.n = 2000, .ba = 1.5, .bi = -3.0, .seed = 3});
  const auto r = interaction_analysis(f, Factor::alcohol_int, {});
  REQUIRE(r.significant);
  REQUIRE(r.stratified.size() == 2);
  REQUIRE(r.stratified[0].estimate.has_value());
  REQUIRE(r.stratified[1].estimate.has_value());
  CHECK(r.stratified[0].estimate->rd > 0.0);  // arm2 vs arm1
  CHECK(r.stratified[1].estimate->rd < 0.0);  // arm4 vs arm3
  CHECK(r.interaction_coefficient < 0.0);
}

TEST_CASE("weights change the standardization population") {
  auto f = fixtures::logistic_frame({.bm = 2.0});
  const auto base = factorial_analysis(f, Factor::alcohol_int, {});
  for (std::size_t i = 0; i < f.size(); ++i) f.weights[i] = f.male[i] ? 3.0 : 1.0;
  const auto weighted = factorial_analysis(f, Factor::alcohol_int, {});
  CHECK(weighted.estimate.risk0 != doctest::Approx(base.estimate.risk0));
}
