#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dipt/inference.hpp"

namespace dipt {

double chi_square_upper_tail(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal(0.0, 1.0), p);
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double student_t_quantile(double p, double df) {
  return boost::math::quantile(boost::math::students_t(df), p);
}

TestResult likelihood_ratio_test(const FittedGlm& full, const FittedGlm& reduced) {
  if (full.family != reduced.family) {
    throw std::invalid_argument("likelihood ratio test: models from different families");
  }
  if (full.n_obs != reduced.n_obs) {
    throw std::invalid_argument("likelihood ratio test: models fitted to different observations");
  }
  for (const auto& name : reduced.column_names) {
    if (std::find(full.column_names.begin(), full.column_names.end(), name) ==
        full.column_names.end()) {
      throw std::invalid_argument("likelihood ratio test: reduced column '" + name +
                                  "' is not in the full model");
    }
  }
  if (full.column_names.size() <= reduced.column_names.size()) {
    throw std::invalid_argument("likelihood ratio test: full model must have more columns");
  }
  double stat = 2.0 * (full.log_likelihood - reduced.log_likelihood);
  if (stat < 0.0) {
    if (stat < -1e-8) {
      throw std::invalid_argument("likelihood ratio test: negative statistic " + std::to_string(stat));
    }
    stat = 0.0;
  }
  TestResult r;
  r.statistic = stat;
  r.df = static_cast<double>(full.column_names.size() - reduced.column_names.size());
  r.p_value = chi_square_upper_tail(stat, *r.df);
  r.method = "likelihood_ratio";
  return r;
}

TestResult two_sample_t_test(std::span<const double> x, std::span<const double> y,
                             TTestVariant variant) {
  if (x.size() < 2 || y.size() < 2) {
    throw std::invalid_argument("t-test needs at least 2 observations per group");
  }
  auto mean_var = [](std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : v) ss += (a - m) * (a - m);
    return std::pair{m, ss / (n - 1.0)};
  };
  const auto [mx, vx] = mean_var(x);
  const auto [my, vy] = mean_var(y);
  if (vx == 0.0 && vy == 0.0) {
    throw std::invalid_argument("t-test undefined: zero variance in both groups");
  }
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  TestResult r;
  double se = 0.0;
  if (variant == TTestVariant::pooled) {
    const double df = nx + ny - 2.0;
    const double sp2 = ((nx - 1.0) * vx + (ny - 1.0) * vy) / df;
    se = std::sqrt(sp2 * (1.0 / nx + 1.0 / ny));
    r.df = df;
    r.method = "t_test_pooled";
  } else {
    const double ax = vx / nx;
    const double ay = vy / ny;
    se = std::sqrt(ax + ay);
    r.df = (ax + ay) * (ax + ay) / (ax * ax / (nx - 1.0) + ay * ay / (ny - 1.0));
    r.method = "t_test_welch";
  }
  r.statistic = (mx - my) / se;
  r.p_value = student_t_two_sided_p(r.statistic, *r.df);
  return r;
}

namespace {
double log_choose(long long n, long long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}
}  // namespace

TestResult fisher_exact_2x2(const Table2x2& t) {
  for (const auto& row : t) {
    for (long long v : row) {
      if (v < 0) throw std::invalid_argument("Fisher exact test: negative count");
    }
  }
  TestResult r;
  r.method = "fisher_exact";
  const long long r1 = t[0][0] + t[0][1];
  const long long r2 = t[1][0] + t[1][1];
  const long long c1 = t[0][0] + t[1][0];
  const long long c2 = t[0][1] + t[1][1];
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) {
    r.p_value = 1.0;
    r.statistic = 1.0;
    r.degenerate = true;
    return r;
  }
  const long long n = r1 + r2;
  const long long lo = std::max(0LL, c1 - r2);
  const long long hi = std::min(r1, c1);
  const double log_denom = log_choose(n, c1);
  std::vector<double> prob;
  prob.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (long long k = lo; k <= hi; ++k) {
    prob.push_back(std::exp(log_choose(r1, k) + log_choose(r2, c1 - k) - log_denom));
  }
  const double observed = prob[static_cast<std::size_t>(t[0][0] - lo)];
  // Relative slack absorbs rounding between tables of equal probability.
  const double bound = observed * (1.0 + 1e-7);
  double p = 0.0;
  for (double pk : prob) {
    if (pk <= bound) p += pk;
  }
  r.statistic = observed;
  r.p_value = std::min(1.0, p);
  return r;
}

TestResult jarque_bera(std::span<const double> residuals) {
  TestResult r;
  r.method = "jarque_bera";
  r.df = 2.0;
  const double n = static_cast<double>(residuals.size());
  if (residuals.size() < 3) {
    r.degenerate = true;
    return r;
  }
  const double m = std::accumulate(residuals.begin(), residuals.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double e : residuals) {
    const double d = e - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) {
    r.degenerate = true;
    return r;
  }
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  r.statistic = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  r.p_value = chi_square_upper_tail(r.statistic, 2.0);
  return r;
}

}  // namespace dipt
