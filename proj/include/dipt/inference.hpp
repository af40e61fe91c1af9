#pragma once

// Maximum-likelihood fitting (binomial-logit by IRLS, Gaussian-identity by
// least squares) and the hypothesis tests used by the analyses.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dipt {

// Dense column-major n x p design matrix. Column 0 is the intercept.
class DesignMatrix {
 public:
  // Column j = left * right, refreshed by refresh_products().
  struct Product {
    std::size_t column;
    std::size_t left;
    std::size_t right;
  };

  DesignMatrix() = default;
  DesignMatrix(std::size_t rows, std::vector<std::string> column_names);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }

  std::span<const double> column(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }
  std::span<double> column(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> data() const { return data_; }

  const std::vector<std::string>& column_names() const { return names_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  std::vector<std::string> row_ids;

  const std::vector<Product>& products() const { return products_; }
  void add_product(std::size_t column, std::size_t left, std::size_t right);
  void refresh_products();

  DesignMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<double> data_;
  std::vector<Product> products_;
};

enum class GlmFamily { binomial_logit, gaussian_identity };

struct FittedGlm {
  GlmFamily family = GlmFamily::binomial_logit;
  std::vector<std::string> column_names;
  std::vector<double> coefficients;
  Eigen::MatrixXd covariance;
  double log_likelihood = 0.0;
  std::size_t n_obs = 0;
  bool converged = false;
  int iterations = 0;
  std::optional<std::vector<double>> weights_used;
  std::vector<double> log_likelihood_trace;  // after each accepted iterate
  // Gaussian only.
  double sigma2 = 0.0;
  std::vector<double> residuals;

  double se(std::size_t j) const;
  std::optional<std::size_t> index_of(const std::string& name) const;
};

struct FitOptions {
  int max_iterations = 50;
  double deviance_tolerance = 1e-10;
  double coefficient_tolerance = 1e-8;
  double separation_bound = 15.0;  // |beta_j| on the logit scale
  int max_step_halvings = 30;
};

// Throws FitError (rank_deficient, separation, non_convergence,
// invalid_input). Without weights every observation has weight 1.
FittedGlm fit_logistic(const DesignMatrix& x, std::span<const double> y,
                       std::optional<std::span<const double>> weights = std::nullopt,
                       const FitOptions& options = {});

// Ordinary least squares with covariance sigma2 (X'X)^-1, sigma2 = RSS/(n-p).
FittedGlm fit_linear(const DesignMatrix& x, std::span<const double> y);

// Weighted binomial log-likelihood at `beta`.
double logistic_log_likelihood(const DesignMatrix& x, std::span<const double> y,
                               std::span<const double> weights, std::span<const double> beta);

inline double expit(double eta) {
  if (eta >= 0.0) {
    const double e = std::exp(-eta);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

struct TestResult {
  double statistic = 0.0;
  std::optional<double> df;
  double p_value = 1.0;
  std::string method;
  bool degenerate = false;
};

// statistic = 2 (ll_full - ll_reduced); small negative values (> -1e-8) are
// clamped to zero. Throws std::invalid_argument on non-nested inputs.
TestResult likelihood_ratio_test(const FittedGlm& full, const FittedGlm& reduced);

enum class TTestVariant { pooled, welch };

// statistic = t for mean(x) - mean(y); two-sided p.
TestResult two_sample_t_test(std::span<const double> x, std::span<const double> y,
                             TTestVariant variant = TTestVariant::pooled);

using Table2x2 = std::array<std::array<long long, 2>, 2>;

// Two-sided conditional test; p sums the probabilities of all tables with
// the same margins that are no more likely than the observed one.
// statistic = probability of the observed table.
TestResult fisher_exact_2x2(const Table2x2& table);

// Jarque-Bera normality test on residuals.
TestResult jarque_bera(std::span<const double> residuals);

// Distribution helpers.
double chi_square_upper_tail(double statistic, double df);
double normal_two_sided_p(double z);
double normal_quantile(double p);
double student_t_two_sided_p(double t, double df);
double student_t_quantile(double p, double df);

}  // namespace dipt
