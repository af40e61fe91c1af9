#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dipt/errors.hpp"
#include "dipt/inference.hpp"
#include "dipt/kernels.hpp"

namespace dipt {

DesignMatrix::DesignMatrix(std::size_t rows, std::vector<std::string> column_names)
    : rows_(rows), names_(std::move(column_names)), data_(rows_ * names_.size(), 0.0) {}

std::optional<std::size_t> DesignMatrix::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

void DesignMatrix::add_product(std::size_t column, std::size_t left, std::size_t right) {
  products_.push_back({column, left, right});
}

void DesignMatrix::refresh_products() {
  for (const auto& p : products_) {
    for (std::size_t i = 0; i < rows_; ++i) {
      (*this)(i, p.column) = (*this)(i, p.left) * (*this)(i, p.right);
    }
  }
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> rows) const {
  DesignMatrix out(rows.size(), names_);
  out.products_ = products_;
  for (std::size_t j = 0; j < cols(); ++j) {
    for (std::size_t k = 0; k < rows.size(); ++k) out(k, j) = (*this)(rows[k], j);
  }
  if (!row_ids.empty()) {
    out.row_ids.reserve(rows.size());
    for (std::size_t r : rows) out.row_ids.push_back(row_ids[r]);
  }
  return out;
}

double FittedGlm::se(std::size_t j) const { return std::sqrt(covariance(j, j)); }

std::optional<std::size_t> FittedGlm::index_of(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names.begin());
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

void check_rank(const DesignMatrix& x) {
  const Eigen::Map<const MatrixXd> m(x.data().data(), static_cast<Eigen::Index>(x.rows()),
                                     static_cast<Eigen::Index>(x.cols()));
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank < x.cols()) {
    std::string dropped;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t k = rank; k < x.cols(); ++k) {
      if (!dropped.empty()) dropped += ", ";
      dropped += x.column_names()[static_cast<std::size_t>(perm(static_cast<Eigen::Index>(k)))];
    }
    throw FitError(FitFailure::rank_deficient,
                   "design matrix has rank " + std::to_string(rank) + " < " +
                       std::to_string(x.cols()) + " columns; dependent column(s): " + dropped);
  }
}

void check_shapes(const DesignMatrix& x, std::span<const double> y) {
  if (x.cols() == 0) throw FitError(FitFailure::invalid_input, "design matrix has no columns");
  if (y.size() != x.rows()) {
    throw FitError(FitFailure::invalid_input, "response length does not match design rows");
  }
  if (x.rows() <= x.cols()) {
    throw FitError(FitFailure::invalid_input, "need more observations (" + std::to_string(x.rows()) +
                                                  ") than columns (" + std::to_string(x.cols()) + ")");
  }
}

MatrixXd to_matrix(const std::vector<double>& colmajor, std::size_t p) {
  MatrixXd m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  std::copy(colmajor.begin(), colmajor.end(), m.data());
  return m;
}

// Roundoff scale of a weighted log-likelihood sum.
double loglik_noise(const DesignMatrix& x, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, total) *
         std::max<double>(1.0, static_cast<double>(x.cols()));
}

}  // namespace

double logistic_log_likelihood(const DesignMatrix& x, std::span<const double> y,
                               std::span<const double> weights, std::span<const double> beta) {
  std::vector<double> eta(x.rows());
  kernels::gemv_colmajor(x.data(), x.rows(), x.cols(), beta, eta);
  double ll = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    ll += weights[i] * (y[i] * eta[i] - softplus(eta[i]));
  }
  return ll;
}

FittedGlm fit_logistic(const DesignMatrix& x, std::span<const double> y,
                       std::optional<std::span<const double>> weights, const FitOptions& options) {
  check_shapes(x, y);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw FitError(FitFailure::invalid_input, "response must be 0/1");
  }
  std::vector<double> w(n, 1.0);
  if (weights) {
    if (weights->size() != n) throw FitError(FitFailure::invalid_input, "weights length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = (*weights)[i];
      if (!(wi > 0.0) || !std::isfinite(wi)) {
        throw FitError(FitFailure::invalid_input, "weights must be positive and finite");
      }
      w[i] = wi;
    }
  }
  check_rank(x);

  const double noise = loglik_noise(x, w);
  std::vector<double> beta(p, 0.0);
  std::vector<double> eta(n), mu(n), var_w(n), resid(n), gram(p * p), score(p);
  std::vector<double> trial(p);

  auto eval_ll = [&](std::span<const double> b) {
    kernels::gemv_colmajor(x.data(), n, p, b, eta);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) ll += w[i] * (y[i] * eta[i] - softplus(eta[i]));
    return ll;
  };

  FittedGlm fit;
  fit.family = GlmFamily::binomial_logit;
  fit.column_names = x.column_names();
  fit.n_obs = n;
  double ll = eval_ll(beta);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    // eta currently holds X * beta.
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = expit(eta[i]);
      var_w[i] = w[i] * mu[i] * (1.0 - mu[i]);
      resid[i] = y[i] - mu[i];
    }
    kernels::weighted_gram(x.data(), n, p, var_w, gram);
    kernels::weighted_xt_vec(x.data(), n, p, w, resid, score);
    const MatrixXd info = to_matrix(gram, p);
    const Eigen::LDLT<MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw FitError(FitFailure::separation,
                     "information matrix is not positive definite at iteration " +
                         std::to_string(iter));
    }
    const VectorXd step = ldlt.solve(Eigen::Map<const VectorXd>(score.data(), static_cast<Eigen::Index>(p)));

    double scale = 1.0;
    double ll_new = 0.0;
    for (int h = 0;; ++h) {
      for (std::size_t j = 0; j < p; ++j) trial[j] = beta[j] + scale * step(static_cast<Eigen::Index>(j));
      ll_new = eval_ll(trial);
      if (ll_new >= ll - noise || h >= options.max_step_halvings) break;
      scale *= 0.5;
    }
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) max_change = std::max(max_change, std::abs(trial[j] - beta[j]));
    const double dev_change = 2.0 * std::abs(ll_new - ll);
    beta = trial;
    ll = ll_new;
    fit.iterations = iter;
    fit.log_likelihood_trace.push_back(ll);

    for (std::size_t j = 0; j < p; ++j) {
      if (std::abs(beta[j]) > options.separation_bound) {
        throw FitError(FitFailure::separation,
                       "coefficient '" + x.column_names()[j] + "' exceeded |beta| > " +
                           std::to_string(options.separation_bound) + " (fitted probabilities at 0 or 1)");
      }
    }
    const bool dev_ok = dev_change < options.deviance_tolerance || dev_change < 2.0 * noise;
    if (dev_ok && max_change < options.coefficient_tolerance) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) {
    throw FitError(FitFailure::non_convergence,
                   "IRLS did not converge in " + std::to_string(options.max_iterations) + " iterations");
  }

  // Information at the final iterate; eta holds X * beta.
  for (std::size_t i = 0; i < n; ++i) {
    mu[i] = expit(eta[i]);
    var_w[i] = w[i] * mu[i] * (1.0 - mu[i]);
  }
  kernels::weighted_gram(x.data(), n, p, var_w, gram);
  const MatrixXd info = to_matrix(gram, p);
  const Eigen::LDLT<MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw FitError(FitFailure::separation, "information matrix is singular at the estimate");
  }
  fit.covariance = ldlt.solve(MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  fit.coefficients = beta;
  fit.log_likelihood = ll;
  if (weights) fit.weights_used = w;
  return fit;
}

FittedGlm fit_linear(const DesignMatrix& x, std::span<const double> y) {
  check_shapes(x, y);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  for (double v : y) {
    if (!std::isfinite(v)) throw FitError(FitFailure::invalid_input, "response must be finite");
  }
  check_rank(x);
  const std::vector<double> ones(n, 1.0);
  std::vector<double> gram(p * p), xty(p);
  kernels::weighted_gram(x.data(), n, p, ones, gram);
  kernels::weighted_xt_vec(x.data(), n, p, ones, y, xty);
  const MatrixXd xtx = to_matrix(gram, p);
  const Eigen::LLT<MatrixXd> llt(xtx);
  if (llt.info() != Eigen::Success) {
    throw FitError(FitFailure::rank_deficient, "X'X is not positive definite");
  }
  const VectorXd beta = llt.solve(Eigen::Map<const VectorXd>(xty.data(), static_cast<Eigen::Index>(p)));

  FittedGlm fit;
  fit.family = GlmFamily::gaussian_identity;
  fit.column_names = x.column_names();
  fit.n_obs = n;
  fit.coefficients.assign(beta.data(), beta.data() + p);
  std::vector<double> fitted(n);
  kernels::gemv_colmajor(x.data(), n, p, fit.coefficients, fitted);
  fit.residuals.resize(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - fitted[i];
    rss += fit.residuals[i] * fit.residuals[i];
  }
  fit.sigma2 = rss / static_cast<double>(n - p);
  const MatrixXd xtx_inv =
      llt.solve(MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  fit.covariance = fit.sigma2 * xtx_inv;
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  const double nn = static_cast<double>(n);
  fit.log_likelihood = rss > 0.0 ? -0.5 * nn * (std::log(2.0 * M_PI * rss / nn) + 1.0)
                                 : std::numeric_limits<double>::infinity();
  fit.converged = true;
  fit.iterations = 1;
  fit.log_likelihood_trace = {fit.log_likelihood};
  return fit;
}

}  // namespace dipt
