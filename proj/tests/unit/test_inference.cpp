#include <cmath>
#include <random>

#include "doctest.h"
#include "dipt/errors.hpp"
#include "dipt/inference.hpp"

using namespace dipt;

namespace {

// Two binary factors, cell (a,h) has n[a][h] rows of which s[a][h] are 1.
struct Cells {
  int n[2][2];
  int s[2][2];
};

void expand(const Cells& c, bool interaction, DesignMatrix& x, std::vector<double>& y) {
  std::size_t rows = 0;
  for (int a = 0; a < 2; ++a)
    for (int h = 0; h < 2; ++h) rows += static_cast<std::size_t>(c.n[a][h]);
  std::vector<std::string> names{"(intercept)", "alcohol_int", "adherence_int"};
  if (interaction) names.push_back("alcohol_int:adherence_int");
  x = DesignMatrix(rows, names);
  y.assign(rows, 0.0);
  std::size_t i = 0;
  for (int a = 0; a < 2; ++a) {
    for (int h = 0; h < 2; ++h) {
      for (int k = 0; k < c.n[a][h]; ++k, ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = a;
        x(i, 2) = h;
        if (interaction) x(i, 3) = a * h;
        y[i] = k < c.s[a][h] ? 1.0 : 0.0;
      }
    }
  }
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double fisher_by_enumeration(long long a, long long b, long long c, long long d) {
  const long long r1 = a + b, c1 = a + c, n = a + b + c + d;
  auto prob = [&](long long x) {
    return std::exp(std::lgamma(r1 + 1.0) + std::lgamma(n - r1 + 1.0) + std::lgamma(c1 + 1.0) +
                    std::lgamma(n - c1 + 1.0) - std::lgamma(n + 1.0) - std::lgamma(x + 1.0) -
                    std::lgamma(r1 - x + 1.0) - std::lgamma(c1 - x + 1.0) - std::lgamma(n - r1 - c1 + x + 1.0));
  };
  const double p0 = prob(a);
  double p = 0.0;
  for (long long x = std::max(0LL, r1 + c1 - n); x <= std::min(r1, c1); ++x) {
    const double px = prob(x);
    if (px <= p0 * (1 + 1e-7)) p += px;
  }
  return std::min(1.0, p);
}

}  // namespace

TEST_CASE("saturated 2x2 logistic fit reproduces cell logits") {
  const Cells c{{{40, 35}, {38, 42}}, {{12, 20}, {25, 30}}};
  DesignMatrix x;
  std::vector<double> y;
  expand(c, true, x, y);
  const auto m = fit_logistic(x, y);
  REQUIRE(m.converged);
  const double l00 = logit(12.0 / 40), l01 = logit(20.0 / 35), l10 = logit(25.0 / 38), l11 = logit(30.0 / 42);
  CHECK(std::abs(m.coefficients[0] - l00) < 1e-8);
  CHECK(std::abs(m.coefficients[1] - (l10 - l00)) < 1e-8);
  CHECK(std::abs(m.coefficients[2] - (l01 - l00)) < 1e-8);
  CHECK(std::abs(m.coefficients[3] - (l11 - l10 - l01 + l00)) < 1e-8);

  // Saturated log-likelihood from cell proportions.
  double ll = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int h = 0; h < 2; ++h) {
      const double p = static_cast<double>(c.s[a][h]) / c.n[a][h];
      ll += c.s[a][h] * std::log(p) + (c.n[a][h] - c.s[a][h]) * std::log(1 - p);
    }
  }
  CHECK(m.log_likelihood == doctest::Approx(ll).epsilon(1e-12));

  // Variance of a cell logit is 1/(n p (1-p)).
  const double p00 = 12.0 / 40;
  CHECK(m.covariance(0, 0) == doctest::Approx(1.0 / (40 * p00 * (1 - p00))).epsilon(1e-8));
}

TEST_CASE("log-likelihood never decreases across accepted iterates") {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t n = 500;
  DesignMatrix x(n, {"(intercept)", "z", "w"});
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1;
    x(i, 1) = u(g) * 4 - 2;
    x(i, 2) = i % 3 == 0;
    y[i] = u(g) < expit(1.5 * x(i, 1) - x(i, 2)) ? 1 : 0;
  }
  const auto m = fit_logistic(x, y);
  REQUIRE(m.log_likelihood_trace.size() >= 2);
  for (std::size_t k = 1; k < m.log_likelihood_trace.size(); ++k) {
    CHECK(m.log_likelihood_trace[k] >= m.log_likelihood_trace[k - 1] - 1e-9);
  }
}

TEST_CASE("unit weights are bit identical to no weights") {
  const Cells c{{{30, 31}, {29, 33}}, {{10, 14}, {13, 20}}};
  DesignMatrix x;
  std::vector<double> y;
  expand(c, false, x, y);
  const std::vector<double> ones(y.size(), 1.0);
  const auto a = fit_logistic(x, y);
  const auto b = fit_logistic(x, y, std::span<const double>(ones));
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK((a.covariance.array() == b.covariance.array()).all());
}

TEST_CASE("complete separation is a named error") {
  DesignMatrix x(20, {"(intercept)", "a"});
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = 1;
    x(i, 1) = i < 10;
    y[i] = i < 10;
  }
  try {
    fit_logistic(x, y);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.kind() == FitFailure::separation);
  }
}

TEST_CASE("collinear columns are rank deficient") {
  DesignMatrix x(12, {"(intercept)", "a", "b"});
  std::vector<double> y(12);
  for (std::size_t i = 0; i < 12; ++i) {
    x(i, 0) = 1;
    x(i, 1) = i % 2;
    x(i, 2) = 2.0 * (i % 2);
    y[i] = i % 3 == 0;
  }
  try {
    fit_logistic(x, y);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.kind() == FitFailure::rank_deficient);
  }
}

TEST_CASE("invalid responses are refused") {
  DesignMatrix x(3, {"(intercept)"});
  for (std::size_t i = 0; i < 3; ++i) x(i, 0) = 1;
  std::vector<double> y{0, 1, 0.5};
  CHECK_THROWS_AS(fit_logistic(x, y), FitError);
}

TEST_CASE("likelihood ratio test for the interaction term") {
  const Cells c{{{50, 50}, {50, 50}}, {{10, 20}, {20, 40}}};
  DesignMatrix xf, xr;
  std::vector<double> y;
  expand(c, true, xf, y);
  expand(c, false, xr, y);
  const auto full = fit_logistic(xf, y);
  const auto reduced = fit_logistic(xr, y);
  const auto t = likelihood_ratio_test(full, reduced);
  CHECK(t.df == 1.0);
  CHECK(t.statistic == doctest::Approx(2 * (full.log_likelihood - reduced.log_likelihood)));
  // chi-square(1) tail via the normal
  CHECK(t.p_value == doctest::Approx(std::erfc(std::sqrt(t.statistic / 2))).epsilon(1e-10));
  CHECK_THROWS_AS(likelihood_ratio_test(reduced, full), std::invalid_argument);
}

TEST_CASE("Fisher exact test") {
  // Tea tasting: p = 34/70
  const auto t = fisher_exact_2x2({{{3, 1}, {1, 3}}});
  CHECK(t.p_value == doctest::Approx(34.0 / 70.0).epsilon(1e-12));
  CHECK(fisher_exact_2x2({{{5, 0}, {0, 5}}}).p_value == doctest::Approx(2.0 / 252.0).epsilon(1e-12));
  for (long long a = 0; a <= 6; ++a)
    for (long long b = 0; b <= 6; ++b)
      for (long long c = 0; c <= 6; ++c)
        for (long long d = 0; d <= 6; ++d) {
          if (a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0) continue;
          CHECK(fisher_exact_2x2({{{a, b}, {c, d}}}).p_value ==
                doctest::Approx(fisher_by_enumeration(a, b, c, d)).epsilon(1e-10));
        }
  const auto deg = fisher_exact_2x2({{{0, 4}, {0, 6}}});
  CHECK(deg.degenerate);
  CHECK(deg.p_value == 1.0);
  CHECK_THROWS(fisher_exact_2x2({{{-1, 4}, {0, 6}}}));
}

TEST_CASE("two-sample t-test matches the textbook formulas") {
  const std::vector<double> x{5.1, 4.9, 6.2, 5.8, 6.0, 5.5};
  const std::vector<double> y{4.1, 4.5, 3.9, 5.0, 4.4};
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double a : v) s += a;
    return s / v.size();
  };
  auto var = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0;
    for (double a : v) s += (a - m) * (a - m);
    return s / (v.size() - 1);
  };
  const double nx = 6, ny = 5;
  const double sp = ((nx - 1) * var(x) + (ny - 1) * var(y)) / (nx + ny - 2);
  const double t = (mean(x) - mean(y)) / std::sqrt(sp * (1 / nx + 1 / ny));
  const auto pooled = two_sample_t_test(x, y);
  CHECK(pooled.statistic == doctest::Approx(t).epsilon(1e-12));
  CHECK(pooled.df == 9.0);
  CHECK(pooled.p_value == doctest::Approx(student_t_two_sided_p(t, 9)).epsilon(1e-12));

  const double se2 = var(x) / nx + var(y) / ny;
  const double df = se2 * se2 / (std::pow(var(x) / nx, 2) / (nx - 1) + std::pow(var(y) / ny, 2) / (ny - 1));
  const auto welch = two_sample_t_test(x, y, TTestVariant::welch);
  CHECK(welch.statistic == doctest::Approx((mean(x) - mean(y)) / std::sqrt(se2)).epsilon(1e-12));
  CHECK(*welch.df == doctest::Approx(df).epsilon(1e-12));

  const auto same = two_sample_t_test(x, x);
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK_THROWS(two_sample_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}));
}

TEST_CASE("Student t tail at known points") {
  // t(1) is Cauchy: P(|T| > 1) = 1/2
  CHECK(student_t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(chi_square_upper_tail(2.0, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("Jarque-Bera statistic") {
  const std::vector<double> r{-1.2, 0.3, 0.8, -0.4, 2.5, -0.9, 0.1, 0.0, -0.6, 1.1};
  const double n = r.size();
  double m = 0;
  for (double v : r) m += v;
  m /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : r) {
    m2 += std::pow(v - m, 2);
    m3 += std::pow(v - m, 3);
    m4 += std::pow(v - m, 4);
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double s = m3 / std::pow(m2, 1.5), k = m4 / (m2 * m2);
  const double jb = n / 6 * (s * s + (k - 3) * (k - 3) / 4);
  const auto t = jarque_bera(r);
  CHECK(t.statistic == doctest::Approx(jb).epsilon(1e-12));
  CHECK(t.p_value == doctest::Approx(std::exp(-jb / 2)).epsilon(1e-12));
}

TEST_CASE("least squares matches the closed form slope") {
  const std::vector<double> xs{1, 2, 3, 4, 5, 6};
  const std::vector<double> ys{2.1, 3.9, 6.2, 7.8, 10.1, 12.2};
  DesignMatrix x(6, {"(intercept)", "x"});
  for (std::size_t i = 0; i < 6; ++i) {
    x(i, 0) = 1;
    x(i, 1) = xs[i];
  }
  const auto m = fit_linear(x, ys);
  double mx = 3.5, my = 0;
  for (double v : ys) my += v;
  my /= 6;
  double sxy = 0, sxx = 0, rss = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double b = sxy / sxx, a = my - b * mx;
  for (std::size_t i = 0; i < 6; ++i) rss += std::pow(ys[i] - a - b * xs[i], 2);
  CHECK(m.coefficients[1] == doctest::Approx(b).epsilon(1e-12));
  CHECK(m.coefficients[0] == doctest::Approx(a).epsilon(1e-12));
  CHECK(m.sigma2 == doctest::Approx(rss / 4).epsilon(1e-10));
  CHECK(m.se(1) == doctest::Approx(std::sqrt(rss / 4 / sxx)).epsilon(1e-10));
}

TEST_CASE("design matrix products follow their factors") {
  DesignMatrix x(3, {"(intercept)", "a", "m", "a:m"});
  for (std::size_t i = 0; i < 3; ++i) {
    x(i, 0) = 1;
    x(i, 1) = static_cast<double>(i % 2);
    x(i, 2) = 2.0 + i;
  }
  x.add_product(3, 1, 2);
  x.refresh_products();
  CHECK(x(1, 3) == 3.0);
  x(1, 1) = 0.0;
  x.refresh_products();
  CHECK(x(1, 3) == 0.0);
  const std::vector<std::size_t> rows{2, 0};
  const auto s = x.select_rows(rows);
  CHECK(s.rows() == 2);
  CHECK(s(0, 2) == 4.0);
  CHECK(x.index_of("a:m") == 3u);
  CHECK_FALSE(x.index_of("zzz").has_value());
}
