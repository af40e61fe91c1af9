#include <cmath>
#include <random>

#include "doctest.h"
#include "dipt/inference.hpp"
#include "dipt/kernels.hpp"

using namespace dipt;
namespace k = dipt::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

struct BackendGuard {
  k::Backend saved = k::active_backend();
  ~BackendGuard() { k::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(k::backend_available(k::Backend::scalar));
  CHECK(k::table_for(k::Backend::scalar) == &k::scalar_table());
  const auto all = k::available_backends();
  CHECK(std::find(all.begin(), all.end(), k::Backend::scalar) != all.end());
}

TEST_CASE("unavailable backend is refused") {
  BackendGuard guard;
  for (auto b : {k::Backend::avx2, k::Backend::neon}) {
    if (!k::backend_available(b)) {
      const auto before = k::active_backend();
      CHECK_FALSE(k::set_backend(b));
      CHECK(k::active_backend() == before);
    }
  }
}

TEST_CASE("every backend matches the scalar reference") {
  const auto& ref = k::scalar_table();
  for (auto b : k::available_backends()) {
    const auto* t = k::table_for(b);
    REQUIRE(t != nullptr);
    CAPTURE(t->name);
    for (std::size_t n = 0; n < 70; ++n) {
      const auto a = noise(n, 11 + n);
      const auto w = noise(n, 101 + n);
      const auto c = noise(n, 1001 + n);
      double mag = 0.0, wmag = 0.0, smag = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        mag += std::abs(a[i] * c[i]);
        wmag += std::abs(a[i] * w[i] * c[i]);
        smag += std::abs(a[i]);
      }
      CHECK(std::abs(t->dot(a.data(), c.data(), n) - ref.dot(a.data(), c.data(), n)) <= 1e-13 * (mag + 1));
      CHECK(std::abs(t->weighted_dot(a.data(), w.data(), c.data(), n) -
                     ref.weighted_dot(a.data(), w.data(), c.data(), n)) <= 1e-13 * (wmag + 1));
      CHECK(std::abs(t->sum(a.data(), n) - ref.sum(a.data(), n)) <= 1e-13 * (smag + 1));
      auto y1 = c, y2 = c;
      t->axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("matrix helpers agree with naive loops on every backend") {
  BackendGuard guard;
  const std::size_t rows = 37, cols = 5;
  const auto x = noise(rows * cols, 5);
  const auto w = noise(rows, 6);
  const auto r = noise(rows, 7);
  const auto beta = noise(cols, 8);
  for (auto b : k::available_backends()) {
    REQUIRE(k::set_backend(b));
    CAPTURE(k::backend_name(b));
    std::vector<double> out(rows);
    k::gemv_colmajor(x, rows, cols, beta, out);
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += x[j * rows + i] * beta[j];
      CHECK(out[i] == doctest::Approx(s).epsilon(1e-12));
    }
    std::vector<double> gram(cols * cols);
    k::weighted_gram(x, rows, cols, w, gram);
    for (std::size_t a = 0; a < cols; ++a) {
      for (std::size_t c = 0; c < cols; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += x[a * rows + i] * w[i] * x[c * rows + i];
        CHECK(gram[c * cols + a] == doctest::Approx(s).epsilon(1e-12));
      }
    }
    std::vector<double> xv(cols);
    k::weighted_xt_vec(x, rows, cols, w, r, xv);
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) s += x[j * rows + i] * w[i] * r[i];
      CHECK(xv[j] == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("logistic fit is backend independent to rounding") {
  BackendGuard guard;
  const std::size_t n = 300;
  DesignMatrix x(n, {"(intercept)", "a", "b"});
  std::vector<double> y(n);
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = static_cast<double>(i % 2);
    x(i, 2) = u(g) * 2.0 - 1.0;
    y[i] = u(g) < expit(-0.2 + 0.8 * x(i, 1) + 0.5 * x(i, 2)) ? 1.0 : 0.0;
  }
  REQUIRE(k::set_backend(k::Backend::scalar));
  const auto ref = fit_logistic(x, y);
  for (auto b : k::available_backends()) {
    REQUIRE(k::set_backend(b));
    const auto m = fit_logistic(x, y);
    for (std::size_t j = 0; j < 3; ++j) CHECK(m.coefficients[j] == doctest::Approx(ref.coefficients[j]).epsilon(1e-10));
    CHECK(m.log_likelihood == doctest::Approx(ref.log_likelihood).epsilon(1e-12));
  }
}
