#pragma once

// Synthetic factorial trials with known generating coefficients, Monte Carlo
// calibration of the estimators and a nonparametric bootstrap.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dipt/config.hpp"
#include "dipt/data_model.hpp"
#include "dipt/frame.hpp"
#include "dipt/standardization.hpp"

namespace dipt {

// Splittable seeding: stream k of a master seed is an independent engine.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int integer(int lo, int hi);           // inclusive
  bool bernoulli(double p);
  double normal();
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Logit-scale coefficients. The linear predictor is
//   intercept + alcohol*A + adherence*H + interaction*A*H + male*M
//   + site_effects[s] + baseline*(auditc_0 - 8)/4 + factor_by_male*F*M
// where F is the factor the outcome belongs to (A for the alcohol outcome,
// H for adherence).
struct OutcomeModel {
  double intercept = -0.3;
  double alcohol = 0.0;
  double adherence = 0.0;
  double interaction = 0.0;
  double male = 0.0;
  std::vector<double> site_effects;  // per site; missing entries are 0
  double baseline = 0.0;
  double factor_by_male = 0.0;
};

enum class MissingMechanism { none, mcar, mar };

// MAR: P(missing) = expit(logit(rate) + slope*(auditc_0 - 8)/4 + factor_shift*A).
struct MissingnessModel {
  MissingMechanism mechanism = MissingMechanism::none;
  double rate = 0.0;
  double slope = 0.0;
  double factor_shift = 0.0;
};

struct SimulationConfig {
  std::size_t n = 400;
  std::vector<std::string> sites{"site_a", "site_b"};
  double male_fraction = 0.5;
  std::vector<double> site_fractions;  // empty = equal
  int block_size = 8;                  // permuted blocks within gender x site
  OutcomeModel alcohol_outcome{-0.4, 0.5, 0.1, 0.0, 0.2, {}, 0.0, 0.0};
  OutcomeModel adherence_outcome{0.2, 0.1, 0.6, 0.0, 0.0, {}, 0.0, 0.0};
  MissingnessModel alcohol_missing;
  bool generate_mems = true;
  double hepatotox_rate = 0.08;
  double active_tb_rate = 0.08;
  double vl_suppressed_rate = 0.85;
  int prescribed_doses = 180;
  Date first_enrollment = Date{std::chrono::year{2018} / 4 / 16};
  int enrollment_span_days = 720;
  OutcomeCutoffs cutoffs;
  std::uint64_t seed = 1;
};

SimulationConfig default_simulation(std::uint64_t seed = 1, std::size_t n = 400);

struct SimulatedTrial {
  TrialDataset dataset;
  // Generated outcomes before missingness, aligned with participants.
  std::vector<int> alcohol_truth;
  std::vector<int> adherence_truth;
};

// Deterministic in config.seed.
SimulatedTrial simulate_trial(const SimulationConfig& config);

// Population standardized risk difference for `factor` implied by the
// generating model: exact sum over gender, site, the other factor and the
// baseline covariate distribution.
double true_standardized_rd(const SimulationConfig& config, Factor factor);

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Results must be written to per-index slots.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

struct CalibrationReport {
  Factor factor = Factor::alcohol_int;
  std::size_t replications = 0;
  std::size_t failures = 0;
  std::size_t n = 0;
  double true_rd = 0.0;
  double mean_rd = 0.0;
  double mean_bias = 0.0;
  double empirical_sd = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;
  std::size_t lrt_tests = 0;
  double lrt_rejection_rate = 0.0;
  double ci_level = 0.95;
  double alpha = 0.05;
};

// Replicate r uses stream_seed(config.seed, r + 1). Output is independent of
// the thread count.
CalibrationReport monte_carlo_calibration(const SimulationConfig& config, std::size_t reps,
                                          Factor factor, unsigned threads = 0,
                                          double ci_level = 0.95, double alpha = 0.05);

struct BootstrapResult {
  std::size_t reps = 0;
  std::size_t failures = 0;
  double se_rd = 0.0;
  double se_log_rr = 0.0;
};

// Participant-level resampling of the complete rows of `frame`, refitting
// factorial_analysis each time. Throws std::invalid_argument for reps < 2 and
// AnalysisError when more than 2% of resamples fail.
BootstrapResult bootstrap_se(const AnalysisFrame& frame, Factor factor,
                             const AnalysisOptions& options, std::size_t reps,
                             std::uint64_t seed, unsigned threads = 0);

}  // namespace dipt
