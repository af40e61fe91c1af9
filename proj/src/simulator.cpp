#include "dipt/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "dipt/errors.hpp"
#include "dipt/outcomes.hpp"

namespace dipt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

double Rng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::integer(int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("empty integer range");
  const double span = static_cast<double>(hi) - static_cast<double>(lo) + 1.0;
  return lo + static_cast<int>(std::floor(uniform() * span));
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

SimulationConfig default_simulation(std::uint64_t seed, std::size_t n) {
  SimulationConfig c;
  c.seed = seed;
  c.n = n;
  return c;
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

double site_effect(const OutcomeModel& m, std::size_t s) {
  return s < m.site_effects.size() ? m.site_effects[s] : 0.0;
}

double linear_predictor(const OutcomeModel& m, int a, int h, int male, std::size_t site, double z,
                        int factor_value) {
  return m.intercept + m.alcohol * a + m.adherence * h + m.interaction * a * h + m.male * male +
         site_effect(m, site) + m.baseline * z + m.factor_by_male * factor_value * male;
}

std::vector<double> site_weights(const SimulationConfig& c) {
  if (c.sites.empty()) throw std::invalid_argument("simulation needs at least one site");
  std::vector<double> w = c.site_fractions;
  if (w.empty()) w.assign(c.sites.size(), 1.0);
  if (w.size() != c.sites.size()) throw std::invalid_argument("site_fractions length mismatch");
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  return w;
}

std::size_t draw_index(Rng& rng, const std::vector<double>& w) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<int>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

std::string participant_id(std::size_t i) {
  std::string s = std::to_string(i + 1);
  return "P" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

SimulatedTrial simulate_trial(const SimulationConfig& c) {
  if (c.block_size <= 0 || c.block_size % 4 != 0) {
    throw std::invalid_argument("block_size must be a positive multiple of 4");
  }
  const auto sw = site_weights(c);
  Rng rng(stream_seed(c.seed, 0));
  SimulatedTrial out;
  auto& ps = out.dataset.participants;
  ps.reserve(c.n);

  std::vector<std::vector<int>> blocks(2 * c.sites.size());
  const auto& cut = c.cutoffs;

  for (std::size_t i = 0; i < c.n; ++i) {
    ParticipantRecord p;
    p.participant_id = participant_id(i);
    const int male = rng.bernoulli(c.male_fraction) ? 1 : 0;
    const std::size_t site = draw_index(rng, sw);
    p.gender = male ? Gender::male : Gender::female;
    p.site = c.sites[site];

    auto& queue = blocks[static_cast<std::size_t>(male) * c.sites.size() + site];
    if (queue.empty()) {
      for (int k = 0; k < c.block_size; ++k) queue.push_back(1 + k % 4);
      shuffle(queue, rng);
    }
    p.arm = queue.back();
    queue.pop_back();
    const auto ind = derive_factor_indicators(p.arm);
    const int a = ind.alcohol_int;
    const int h = ind.adherence_int;

    const long offset = c.n > 1 ? static_cast<long>(i) * c.enrollment_span_days / static_cast<long>(c.n) : 0;
    p.enrollment_date = add_days(c.first_enrollment, offset);
    p.scheduled_inh_completion_date = add_days(p.enrollment_date, c.prescribed_doses);
    p.prescribed_doses = c.prescribed_doses;

    const int auditc0 = rng.integer(4, 12);
    const double z = (auditc0 - 8) / 4.0;
    p.auditc[0] = auditc0;
    p.peth[0] = std::round(std::exp(3.0 + 0.2 * auditc0 + 0.5 * rng.normal()) * 10.0) / 10.0;
    p.timepref_score = std::round(rng.normal() * 100.0) / 100.0;
    p.riskpref_score = std::round(rng.normal() * 100.0) / 100.0;
    p.readiness_score = rng.integer(1, 10);

    const int y_alc =
        rng.bernoulli(expit(linear_predictor(c.alcohol_outcome, a, h, male, site, z, a))) ? 1 : 0;
    const int y_adh =
        rng.bernoulli(expit(linear_predictor(c.adherence_outcome, a, h, male, site, z, h))) ? 1 : 0;
    out.alcohol_truth.push_back(y_alc);
    out.adherence_truth.push_back(y_adh);

    bool missing = false;
    const auto& mm = c.alcohol_missing;
    if (mm.mechanism == MissingMechanism::mcar) {
      missing = rng.bernoulli(mm.rate);
    } else if (mm.mechanism == MissingMechanism::mar) {
      missing = rng.bernoulli(expit(logit(mm.rate) + mm.slope * z + mm.factor_shift * a));
    }

    // Follow-up drinking consistent with the drawn outcome.
    const int heavy_at = male ? cut.auditc_male : cut.auditc_female;
    auto peth_pass = [&] { return std::round(rng.uniform(1.0, cut.peth_threshold - 0.1) * 10.0) / 10.0; };
    auto peth_fail = [&] { return std::round((cut.peth_threshold + *p.peth[0] * rng.uniform(0.2, 1.2)) * 10.0) / 10.0; };
    auto audit_pass = [&] { return rng.integer(0, heavy_at - 1); };
    auto audit_fail = [&] { return rng.integer(heavy_at, 12); };

    p.visit_attended = {true, true, rng.bernoulli(0.9)};
    if (missing) {
      p.peth[1] = peth_pass();
      p.auditc[1] = audit_pass();
      p.visit_attended[1] = false;
    } else if (y_alc == 1) {
      p.peth[1] = peth_pass();
      p.auditc[1] = audit_pass();
      p.peth[2] = peth_pass();
      p.auditc[2] = audit_pass();
    } else {
      std::array<bool, 4> fail{};
      const int forced = rng.integer(0, 3);
      for (int k = 0; k < 4; ++k) fail[k] = k == forced || rng.bernoulli(0.3);
      p.peth[1] = fail[0] ? peth_fail() : peth_pass();
      p.auditc[1] = fail[1] ? audit_fail() : audit_pass();
      p.peth[2] = fail[2] ? peth_fail() : peth_pass();
      p.auditc[2] = fail[3] ? audit_fail() : audit_pass();
    }
    if (p.visit_attended[2]) p.peth[3] = y_alc ? peth_pass() : peth_fail();
    if (p.visit_attended[1]) {
      p.drink_days_30 = y_alc ? rng.integer(0, 8) : rng.integer(4, 30);
      p.heavy_days_14 = y_alc ? rng.integer(0, 2) : rng.integer(1, 14);
      p.vl_detectable[0] = !rng.bernoulli(c.vl_suppressed_rate);
    }
    if (p.visit_attended[2]) p.vl_detectable[1] = !rng.bernoulli(c.vl_suppressed_rate);
    p.active_tb = rng.bernoulli(c.active_tb_rate);

    if (rng.bernoulli(c.hepatotox_rate)) {
      p.discontinued_inh = true;
      p.discontinuation_date = add_days(p.enrollment_date, rng.integer(20, 150));
      p.discontinuation_reason = rng.bernoulli(0.5) ? DiscontinuationReason::hepatotoxicity_grade3
                                                    : DiscontinuationReason::hepatotoxicity_grade4;
    }

    if (c.generate_mems) {
      p.mems_available = true;
      const int denom = mems_denominator(p);
      const int cap = (9 * denom) / 10;  // k/denom > 0.9 iff k > cap
      const int k = y_adh ? rng.integer(std::min(cap + 1, denom), denom) : rng.integer(0, cap);
      std::vector<int> days(static_cast<std::size_t>(cut.mems_window_days));
      for (std::size_t d = 0; d < days.size(); ++d) days[d] = static_cast<int>(d);
      for (int j = 0; j < k; ++j) {
        const int pick = rng.integer(j, static_cast<int>(days.size()) - 1);
        std::swap(days[static_cast<std::size_t>(j)], days[static_cast<std::size_t>(pick)]);
      }
      std::vector<int> chosen(days.begin(), days.begin() + k);
      std::sort(chosen.begin(), chosen.end());
      for (int d : chosen) {
        const DateTime t = DateTime{add_days(p.enrollment_date, d)} +
                           std::chrono::hours(rng.integer(6, 21)) + std::chrono::minutes(rng.integer(0, 59));
        out.dataset.mems_events.push_back({p.participant_id, t});
        if (rng.bernoulli(0.05)) {
          out.dataset.mems_events.push_back({p.participant_id, t + std::chrono::minutes(rng.integer(1, 120))});
        }
      }
    } else {
      p.mems_available = false;
    }
    ps.push_back(std::move(p));
  }
  return out;
}

double true_standardized_rd(const SimulationConfig& c, Factor factor) {
  const auto sw = site_weights(c);
  const OutcomeModel& m = factor == Factor::alcohol_int ? c.alcohol_outcome : c.adherence_outcome;
  double rd = 0.0;
  for (int male = 0; male <= 1; ++male) {
    const double pm = male ? c.male_fraction : 1.0 - c.male_fraction;
    for (std::size_t s = 0; s < sw.size(); ++s) {
      for (int other = 0; other <= 1; ++other) {
        for (int auditc0 = 4; auditc0 <= 12; ++auditc0) {
          const double z = (auditc0 - 8) / 4.0;
          const double w = pm * sw[s] * 0.5 / 9.0;
          double r1, r0;
          if (factor == Factor::alcohol_int) {
            r1 = expit(linear_predictor(m, 1, other, male, s, z, 1));
            r0 = expit(linear_predictor(m, 0, other, male, s, z, 0));
          } else {
            r1 = expit(linear_predictor(m, other, 1, male, s, z, 1));
            r0 = expit(linear_predictor(m, other, 0, male, s, z, 0));
          }
          rd += w * (r1 - r0);
        }
      }
    }
  }
  return rd;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

CalibrationReport monte_carlo_calibration(const SimulationConfig& config, std::size_t reps,
                                          Factor factor, unsigned threads, double ci_level,
                                          double alpha) {
  if (reps == 0) throw std::invalid_argument("calibration needs at least one replication");
  struct Rep {
    bool ok = false;
    double rd = 0.0, se = 0.0;
    bool covered = false;
    bool lrt_ok = false;
    bool rejected = false;
  };
  const double truth = true_standardized_rd(config, factor);
  const std::string outcome = factor == Factor::alcohol_int ? "no_heavy_drinking" : "inh_adherent";
  AnalysisConfig acfg = default_config();
  acfg.cutoffs = config.cutoffs;
  acfg.sites = config.sites;
  AnalysisOptions opts;
  opts.ci_level = ci_level;
  opts.significance_level = alpha;

  std::vector<Rep> results(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    SimulationConfig sc = config;
    sc.seed = stream_seed(config.seed, r + 1);
    sc.generate_mems = factor == Factor::adherence_int;
    Rep rep;
    try {
      const auto trial = simulate_trial(sc);
      const auto derived = derive_rows(trial.dataset, acfg);
      const auto frame = build_frame(trial.dataset, derived, outcome, {}, config.sites);
      const auto fr = factorial_analysis(frame, factor, opts);
      rep.ok = true;
      rep.rd = fr.estimate.rd;
      rep.se = fr.estimate.se_rd;
      rep.covered = fr.estimate.ci_rd.first <= truth && truth <= fr.estimate.ci_rd.second;
      try {
        const auto ia = interaction_analysis(frame, factor, opts);
        rep.lrt_ok = true;
        rep.rejected = ia.lrt.p_value < alpha;
      } catch (const std::exception&) {
      }
    } catch (const std::exception&) {
    }
    results[r] = rep;
  });

  CalibrationReport rep;
  rep.factor = factor;
  rep.replications = reps;
  rep.n = config.n;
  rep.true_rd = truth;
  rep.ci_level = ci_level;
  rep.alpha = alpha;
  std::size_t ok = 0, covered = 0, rejected = 0;
  double sum = 0.0, sum_se = 0.0;
  for (const auto& r : results) {
    if (r.lrt_ok) {
      ++rep.lrt_tests;
      rejected += r.rejected ? 1 : 0;
    }
    if (!r.ok) continue;
    ++ok;
    covered += r.covered ? 1 : 0;
    sum += r.rd;
    sum_se += r.se;
  }
  rep.failures = reps - ok;
  if (ok == 0) throw AnalysisError("every calibration replication failed");
  rep.mean_rd = sum / static_cast<double>(ok);
  rep.mean_bias = rep.mean_rd - truth;
  rep.mean_se = sum_se / static_cast<double>(ok);
  rep.coverage = static_cast<double>(covered) / static_cast<double>(ok);
  double ss = 0.0;
  for (const auto& r : results) {
    if (r.ok) ss += (r.rd - rep.mean_rd) * (r.rd - rep.mean_rd);
  }
  rep.empirical_sd = ok > 1 ? std::sqrt(ss / static_cast<double>(ok - 1)) : 0.0;
  rep.lrt_rejection_rate =
      rep.lrt_tests ? static_cast<double>(rejected) / static_cast<double>(rep.lrt_tests) : 0.0;
  return rep;
}

BootstrapResult bootstrap_se(const AnalysisFrame& frame, Factor factor,
                             const AnalysisOptions& options, std::size_t reps,
                             std::uint64_t seed, unsigned threads) {
  if (reps < 2) throw std::invalid_argument("bootstrap needs at least 2 resamples");
  const auto rows = complete_rows(frame, options.covariates);
  if (rows.empty()) throw AnalysisError("no complete cases to resample");
  const AnalysisFrame base = frame.subset(rows);
  struct Draw {
    bool ok = false;
    double rd = 0.0;
    std::optional<double> log_rr;
  };
  std::vector<Draw> draws(reps);
  parallel_for(reps, threads, [&](std::size_t b) {
    Rng rng(stream_seed(seed, b));
    std::vector<std::size_t> pick(base.size());
    const int hi = static_cast<int>(base.size()) - 1;
    for (auto& r : pick) r = static_cast<std::size_t>(rng.integer(0, hi));
    Draw d;
    try {
      const auto fr = factorial_analysis(base.subset(pick), factor, options);
      d.ok = true;
      d.rd = fr.estimate.rd;
      if (fr.estimate.rr) d.log_rr = std::log(*fr.estimate.rr);
    } catch (const std::exception&) {
    }
    draws[b] = d;
  });

  BootstrapResult res;
  res.reps = reps;
  std::vector<double> rd, lrr;
  for (const auto& d : draws) {
    if (!d.ok) {
      ++res.failures;
      continue;
    }
    rd.push_back(d.rd);
    if (d.log_rr) lrr.push_back(*d.log_rr);
  }
  if (static_cast<double>(res.failures) > 0.02 * static_cast<double>(reps)) {
    throw AnalysisError("bootstrap unreliable: " + std::to_string(res.failures) + " of " +
                        std::to_string(reps) + " resamples failed");
  }
  auto sd = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  res.se_rd = sd(rd);
  res.se_log_rr = sd(lrr);
  return res;
}

}  // namespace dipt
