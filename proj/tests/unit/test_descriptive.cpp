#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "doctest.h"
#include "dipt/descriptive.hpp"
#include "dipt/errors.hpp"
#include "fixtures.hpp"

using namespace dipt;

namespace {

std::vector<std::optional<double>> opt(std::initializer_list<double> v) {
  return {v.begin(), v.end()};
}

TrialDataset with_readiness(std::vector<double> enrolled_readiness, std::vector<double> declined) {
  TrialDataset ds;
  for (std::size_t i = 0; i < enrolled_readiness.size(); ++i) {
    auto p = fixtures::participant("P" + std::to_string(i), static_cast<int>(i % 4) + 1);
    p.readiness_score = enrolled_readiness[i];
    ds.participants.push_back(p);
  }
  std::vector<ScreenedRecord> s;
  for (std::size_t i = 0; i < declined.size(); ++i) {
    std::ostringstream v;
    v << declined[i];
    s.push_back({"S" + std::to_string(i), {{"readiness_score", v.str()}, {"shoe_size", "9"}}});
  }
  ds.screened_declined = s;
  ds.screened_columns = {"readiness_score", "shoe_size"};
  return ds;
}

}  // namespace

TEST_CASE("percentiles interpolate between order statistics") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(percentile_linear(v, 0.0) == 1.0);
  CHECK(percentile_linear(v, 0.5) == 2.5);
  CHECK(percentile_linear(v, 1.0) == 4.0);
  CHECK(percentile_linear(v, 0.25) == doctest::Approx(1.75));
  const std::vector<double> one{7};
  CHECK(percentile_linear(one, 0.3) == 7.0);
}

TEST_CASE("continuous summary") {
  const auto v = opt({4, 1, 3, 2});
  auto with_missing = v;
  with_missing.push_back(std::nullopt);
  const auto s = summarize_continuous(with_missing);
  CHECK(s.n == 4);
  CHECK(s.n_missing == 1);
  CHECK(*s.mean == 2.5);
  CHECK(*s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(*s.p0 == 1.0);
  CHECK(*s.p50 == 2.5);
  CHECK(*s.p100 == 4.0);
  const auto single = summarize_continuous(opt({3.0}));
  CHECK(*single.mean == 3.0);
  CHECK_FALSE(single.sd.has_value());
  const std::vector<std::optional<double>> none{std::nullopt};
  CHECK_FALSE(summarize_continuous(none).mean.has_value());
}

TEST_CASE("categorical summary proportions and level order") {
  std::vector<std::optional<std::string>> v(30, std::string("a"));
  v.resize(100, std::string("b"));
  v.push_back(std::nullopt);
  const auto s = summarize_categorical(v, {"b", "a"});
  CHECK(s.levels == std::vector<std::string>{"b", "a"});
  CHECK(s.counts == std::vector<std::size_t>{70, 30});
  CHECK(s.proportions[0] == doctest::Approx(0.7));
  CHECK(s.proportions[1] == doctest::Approx(0.3));
  CHECK(s.n_missing == 1);
  v.push_back(std::string("c"));
  CHECK(summarize_categorical(v, {"b"}).levels == std::vector<std::string>{"b", "a", "c"});
}

TEST_CASE("descriptive table groups by arm") {
  const auto ds = fixtures::balanced(12);
  const auto d = derive_rows(ds, default_config());
  const auto t = descriptive_table(ds, d, {"peth_0", "gender"});
  CHECK(t.groups == std::vector<std::string>{"overall", "arm1", "arm2", "arm3", "arm4"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].continuous_by_group[0].n == 12);
  CHECK(t.rows[0].continuous_by_group[1].n == 3);
  CHECK_FALSE(t.rows[1].continuous);
  CHECK_THROWS_AS(descriptive_table(ds, d, {"no_such_variable"}), ConfigError);
}

TEST_CASE("enrollment comparison") {
  SUBCASE("no screening file") {
    const auto ds = fixtures::balanced(8);
    CHECK_FALSE(enrollment_comparison(ds, derive_rows(ds, default_config())).has_value());
  }
  SUBCASE("identical groups") {
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    const auto ds = with_readiness(a, a);
    const auto c = enrollment_comparison(ds, derive_rows(ds, default_config()));
    REQUIRE(c.has_value());
    REQUIRE(c->tests.size() == 1);
    CHECK(c->tests[0].test->p_value == doctest::Approx(1.0));
    REQUIRE(c->notes.size() == 1);
    CHECK(c->notes[0].find("shoe_size") != std::string::npos);
  }
  SUBCASE("separated groups match the pooled t oracle") {
    const std::vector<double> a{1, 2, 3, 4, 5, 6}, b{7, 8, 9, 10, 11};
    const auto ds = with_readiness(a, b);
    const auto c = enrollment_comparison(ds, derive_rows(ds, default_config()));
    REQUIRE(c.has_value());
    // means 3.5 and 9, both sample variances 3.5 and 2.5
    const double sp2 = (5 * 3.5 + 4 * 2.5) / 9.0;
    const double t = (3.5 - 9.0) / std::sqrt(sp2 * (1.0 / 6 + 1.0 / 5));
    const boost::math::students_t dist(9.0);
    const double p = 2 * boost::math::cdf(dist, -std::abs(t));
    CHECK(c->tests[0].test->statistic == doctest::Approx(t).epsilon(1e-12));
    CHECK(c->tests[0].test->p_value == doctest::Approx(p).epsilon(1e-10));
    CHECK(p < 1e-3);
  }
}

TEST_CASE("categorical comparison runs a Fisher test per level") {
  VariableData v;
  v.name = "gender";
  v.continuous = false;
  v.levels = {"female", "male"};
  std::vector<std::optional<std::string>> group;
  for (int i = 0; i < 10; ++i) {
    v.categorical.push_back(std::string(i < 8 ? "female" : "male"));
    group.push_back(std::string("x"));
  }
  for (int i = 0; i < 10; ++i) {
    v.categorical.push_back(std::string(i < 2 ? "female" : "male"));
    group.push_back(std::string("y"));
  }
  const auto c = compare_groups({v}, group, "x", "y");
  REQUIRE(c.tests.size() == 2);
  const auto oracle = fisher_exact_2x2({{{8, 2}, {2, 8}}});
  CHECK(c.tests[0].level == "female");
  CHECK(c.tests[0].test->p_value == doctest::Approx(oracle.p_value).epsilon(1e-12));
}

TEST_CASE("missingness comparison splits on the outcome") {
  auto ds = fixtures::balanced(8);
  ds.participants[0].peth[2] = std::nullopt;
  ds.participants[0].auditc[2] = std::nullopt;
  const auto d = derive_rows(ds, default_config());
  const auto c = missingness_comparison(ds, d, "no_heavy_drinking", {"peth_0"});
  CHECK(c.group_a == "complete");
  CHECK(c.group_b == "missing");
  CHECK(c.table.rows[0].continuous_by_group[1].n == 7);
  CHECK(c.table.rows[0].continuous_by_group[2].n == 1);
}

TEST_CASE("single-visit drinking proportions") {
  auto ds = fixtures::balanced(8);
  ds.participants[0].peth[1] = 50.0;      // arm1, fails month 3
  ds.participants[1].auditc[1] = std::nullopt;  // arm2, unknown at month 3
  ds.participants[1].peth[1] = std::nullopt;
  const auto t = timepoint_proportions(ds, OutcomeCutoffs{});
  REQUIRE(t.size() == 10);
  CHECK(t[0].month == 3);
  CHECK(t[0].group == "overall");
  CHECK(t[0].n == 7);
  CHECK(t[0].successes == 6);
  CHECK(t[1].group == "arm1");
  CHECK(*t[1].proportion == 0.5);
  CHECK(t[2].n == 1);
  CHECK(t[5].month == 6);
  CHECK(*t[5].proportion == 1.0);
}
