#include <random>

#include "doctest.h"
#include "dipt/errors.hpp"
#include "dipt/missingness.hpp"
#include "frame_fixtures.hpp"

using namespace dipt;

namespace {

AnalysisFrame with_covariate(AnalysisFrame f, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  auto& c = f.covariates["z"];
  for (std::size_t i = 0; i < f.size(); ++i) c.push_back(z(g));
  return f;
}

}  // namespace

TEST_CASE("complete-case filter counts and warns") {
  auto f = fixtures::logistic_frame({.n = 12});
  f.outcome[3] = std::nullopt;
  f.outcome[7] = std::nullopt;
  const auto cc = complete_case_filter(f);
  CHECK(cc.retained == 10);
  CHECK(cc.dropped == 2);
  CHECK(std::find(cc.rows.begin(), cc.rows.end(), 3) == cc.rows.end());
  CHECK_FALSE(cc.warning.has_value());
  for (auto& y : f.outcome) y = std::nullopt;
  const auto none = complete_case_filter(f);
  CHECK(none.retained == 0);
  REQUIRE(none.warning.has_value());
  CHECK(none.warning->find("12") != std::string::npos);
}

TEST_CASE("worst-case imputation only fills missing values, with zero") {
  std::mt19937_64 g(11);
  std::uniform_int_distribution<int> state(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DerivedOutcomes> d(1 + trial % 37);
    for (auto& r : d) {
      const int s = state(g);
      if (s < 2) r.no_heavy_drinking = s;
      if (state(g) == 0) r.inh_adherent = 1;
    }
    const auto before = d;
    const auto res = worst_case_impute_alcohol(d);
    REQUIRE(res.derived.size() == before.size());
    std::size_t filled = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (before[i].no_heavy_drinking) {
        CHECK(res.derived[i].no_heavy_drinking == before[i].no_heavy_drinking);
      } else {
        CHECK(res.derived[i].no_heavy_drinking == 0);
        ++filled;
      }
      CHECK(res.derived[i].inh_adherent == before[i].inh_adherent);
    }
    CHECK(res.imputed == filled);
  }
}

TEST_CASE("IPW with nothing missing is the complete-case analysis") {
  const auto f = with_covariate(fixtures::logistic_frame({}), 5);
  const IpwOptions ipw{.covariates = {"z"}};
  const auto r = ipw_analysis(f, Factor::alcohol_int, {}, ipw);
  const auto cc = factorial_analysis(f, Factor::alcohol_int, {});
  CHECK(r.estimate.rd == cc.estimate.rd);
  CHECK(r.estimate.se_rd == cc.estimate.se_rd);
  CHECK(r.outcome_model.coefficients == cc.model.coefficients);
  CHECK_FALSE(r.missingness_model.has_value());
  CHECK(r.missing_fraction == 0.0);
  CHECK_FALSE(r.triggered);
}

TEST_CASE("IPW needs covariates once outcomes are missing") {
  auto f = fixtures::logistic_frame({});
  f.outcome[0] = std::nullopt;
  CHECK_THROWS_AS(ipw_analysis(f, Factor::alcohol_int, {}, IpwOptions{}), ConfigError);
  const IpwOptions absent{.covariates = {"not_there"}};
  CHECK_THROWS_AS(ipw_analysis(f, Factor::alcohol_int, {}, absent), AnalysisError);
}

TEST_CASE("IPW weights are stabilized inverse probabilities") {
  auto f = with_covariate(fixtures::logistic_frame({.n = 800, .seed = 8}), 9);
  std::mt19937_64 g(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (u(g) > expit(1.0 + 1.2 * *f.covariates["z"][i])) f.outcome[i] = std::nullopt;
  }
  const IpwOptions ipw{.covariates = {"z"}, .weight_floor = 0.02};
  const auto r = ipw_analysis(f, Factor::alcohol_int, {}, ipw);
  REQUIRE(r.missingness_model.has_value());
  CHECK(r.missingness_model->coefficients[1] > 0.5);
  CHECK(r.stabilization == doctest::Approx(static_cast<double>(r.n_observed) / r.n_total));
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.outcome[i]) {
      CHECK(r.weights[i] == 0.0);
      continue;
    }
    const double p = expit(r.missingness_model->coefficients[0] +
                           r.missingness_model->coefficients[1] * *f.covariates["z"][i]);
    CHECK(r.weights[i] == doctest::Approx(r.stabilization / std::max(p, 0.02)).epsilon(1e-12));
    sum += r.weights[i];
  }
  // sum of 1/p estimates n, so stabilized weights sum to about n_observed
  CHECK(sum == doctest::Approx(static_cast<double>(r.n_observed)).epsilon(0.1));
  CHECK(r.estimate.n == r.n_observed);
}

TEST_CASE("floor hits are counted") {
  auto f = with_covariate(fixtures::logistic_frame({.n = 400, .seed = 12}), 13);
  for (std::size_t i = 0; i < f.size(); ++i) {
    // observation nearly impossible for large z; keep a few to be counted
    if (*f.covariates["z"][i] > 1.0 && i % 10 != 0) f.outcome[i] = std::nullopt;
  }
  const IpwOptions loose{.covariates = {"z"}, .weight_floor = 0.0};
  const IpwOptions tight{.covariates = {"z"}, .weight_floor = 0.5};
  const auto a = ipw_analysis(f, Factor::alcohol_int, {}, loose);
  const auto b = ipw_analysis(f, Factor::alcohol_int, {}, tight);
  CHECK(a.truncated == 0);
  CHECK(b.truncated > 0);
  CHECK(b.max_weight == doctest::Approx(2.0));
  CHECK(a.max_weight > b.max_weight);
}

TEST_CASE("rows missing an IPW covariate are excluded") {
  auto f = with_covariate(fixtures::logistic_frame({}), 14);
  f.outcome[1] = std::nullopt;
  f.outcome[2] = std::nullopt;
  f.covariates["z"][5] = std::nullopt;
  f.covariates["z"][6] = std::nullopt;
  const IpwOptions ipw{.covariates = {"z"}};
  const auto r = ipw_analysis(f, Factor::alcohol_int, {}, ipw);
  CHECK(r.n_dropped_missing_covariates == 2);
  CHECK(r.weights[5] == 0.0);
  CHECK(r.estimate.n == 396);
}

TEST_CASE("threshold flag") {
  auto f = with_covariate(fixtures::logistic_frame({.n = 100}), 15);
  for (std::size_t i = 0; i < 10; ++i) f.outcome[i * 10] = std::nullopt;
  const IpwOptions ipw{.covariates = {"z"}, .missing_threshold = 0.10};
  const auto r = ipw_analysis(f, Factor::alcohol_int, {}, ipw);
  CHECK(r.missing_fraction == doctest::Approx(0.10));
  CHECK_FALSE(r.triggered);  // strictly greater
}
