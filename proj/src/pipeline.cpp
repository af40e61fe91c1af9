#include "dipt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "dipt/descriptive.hpp"
#include "dipt/errors.hpp"
#include "dipt/frame.hpp"
#include "dipt/missingness.hpp"
#include "dipt/outcomes.hpp"
#include "dipt/simulator.hpp"
#include "dipt/standardization.hpp"
#include "report_json.hpp"

namespace dipt {

const char* const kSoftwareVersion = "dipt 0.1.0";

std::string to_string(AnalysisStatus s) {
  switch (s) {
    case AnalysisStatus::ok: return "ok";
    case AnalysisStatus::failed: return "failed";
    case AnalysisStatus::skipped: return "skipped";
  }
  return "?";
}

std::string to_string(Section s) {
  switch (s) {
    case Section::descriptive: return "descriptive";
    case Section::primary: return "primary";
    case Section::secondary: return "secondary";
    case Section::exploratory: return "exploratory";
    case Section::missing_data: return "missing_data";
  }
  return "?";
}

std::size_t AnalysisReport::failures() const {
  return static_cast<std::size_t>(std::count_if(analyses.begin(), analyses.end(), [](const auto& a) {
    return a.status == AnalysisStatus::failed;
  }));
}

const AnalysisRecord* AnalysisReport::find(const std::string& name) const {
  for (const auto& a : analyses) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::string dataset_fingerprint(const TrialDataset& dataset) {
  std::ostringstream s;
  write_participants(s, dataset.participants);
  write_mems(s, dataset.mems_events);
  if (dataset.screened_declined) {
    s << "#screened";
    for (const auto& c : dataset.screened_columns) s << ',' << c;
    s << '\n';
    for (const auto& r : *dataset.screened_declined) {
      s << r.screening_id;
      for (const auto& c : dataset.screened_columns) {
        const auto it = r.values.find(c);
        s << ',' << (it == r.values.end() ? "" : it->second);
      }
      s << '\n';
    }
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Context {
  const TrialDataset& dataset;
  const AnalysisConfig& config;
  std::vector<DerivedOutcomes> derived;
  std::vector<std::string> sites;
  AnalysisOptions options;
};

using Runner = std::function<void(const Context&, AnalysisRecord&)>;

struct Planned {
  AnalysisRecord header;
  Runner run;
};

AnalysisRecord header(Section section, std::string name, std::string outcome, std::string factor,
                      std::string population) {
  AnalysisRecord r;
  r.section = to_string(section);
  r.name = to_string(section) + "." + std::move(name);
  r.outcome = std::move(outcome);
  r.factor = std::move(factor);
  r.population = std::move(population);
  return r;
}

AnalysisFrame frame_for(const Context& ctx, const std::string& outcome,
                        const std::vector<std::string>& covariates = {}) {
  return build_frame(ctx.dataset, ctx.derived, outcome, covariates, ctx.sites);
}

void missing_counts(const AnalysisFrame& frame, std::size_t analyzed, AnalysisRecord& rec) {
  std::size_t missing = 0;
  for (const auto& y : frame.outcome) missing += y ? 0 : 1;
  rec.metadata["n_total"] = frame.size();
  rec.metadata["n_missing_outcome"] = missing;
  rec.metadata["n_analyzed"] = analyzed;
}

void add_decision(AnalysisRecord& rec, const std::string& text) {
  if (!rec.metadata.contains("decisions")) rec.metadata["decisions"] = ojson::array();
  rec.metadata["decisions"].push_back(text);
}

// Binary outcome, one factor, factorial model.
void run_factorial(const Context& ctx, AnalysisRecord& rec, const std::string& outcome, Factor factor) {
  const auto frame = frame_for(ctx, outcome);
  const auto fr = factorial_analysis(frame, factor, ctx.options);
  rec.estimates = json_of(fr.estimate);
  rec.metadata["model"] = json_of(fr.model);
  rec.metadata["model_columns"] = fr.model.column_names;
  rec.metadata["dropped_columns"] = fr.dropped_columns;
  missing_counts(frame, fr.estimate.n, rec);
  rec.metadata["significance_level"] = ctx.options.significance_level;
  rec.metadata["significant"] = fr.estimate.p_rd < ctx.options.significance_level;
  add_decision(rec, "complete-case analysis");
}

void run_interaction(const Context& ctx, AnalysisRecord& rec, const std::string& outcome,
                     const std::vector<Factor>& factors) {
  const auto frame = frame_for(ctx, outcome);
  const auto ia = interaction_analysis(frame, factors.front(), ctx.options);
  rec.tests["lrt"] = json_of(ia.lrt);
  rec.estimates["interaction_coefficient"] = ia.interaction_coefficient;
  rec.estimates["interaction_se"] = ia.interaction_se;
  rec.metadata["significance_level"] = ctx.options.significance_level;
  rec.metadata["significant"] = ia.significant;
  rec.metadata["action"] = ia.action;
  missing_counts(frame, ia.n, rec);
  ojson strat = ojson::array();
  if (ia.significant) {
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const auto rep = k == 0 ? ia : interaction_analysis(frame, factors[k], ctx.options);
      for (const auto& s : rep.stratified) strat.push_back(json_of(s, factors[k]));
    }
  }
  rec.estimates["stratified"] = std::move(strat);
}

void run_hepatotoxicity(const Context& ctx, AnalysisRecord& rec, int arm) {
  const auto frame = frame_for(ctx, "hepatotox_discontinuation");
  const auto rows = complete_rows(frame);
  const auto pair = rows_in_arms(frame, rows, {1, arm});
  std::vector<std::string> dropped;
  if (ctx.config.hepatotoxicity_method == HepatotoxicityMethod::joint_model) {
    DesignSpec spec;
    spec.arm_dummies = true;
    const auto x = build_design(frame, rows, spec, &dropped);
    const auto y = response(frame, rows);
    const auto m = fit_logistic(x, y);
    Scenario treated{{"arm2", 0.0}, {"arm3", 0.0}, {"arm4", 0.0}};
    Scenario control = treated;
    for (auto& [name, v] : treated) {
      if (name == "arm" + std::to_string(arm)) v = 1.0;
    }
    std::vector<std::size_t> local;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const int a = frame.arm[rows[k]];
      if (a == 1 || a == arm) local.push_back(k);
    }
    auto est = contrast_inference(m, x, treated, control, ctx.options.ci_level, {}, local);
    est.factor = "arm" + std::to_string(arm);
    rec.estimates = json_of(est);
    rec.metadata["model"] = json_of(m);
    rec.metadata["model_columns"] = m.column_names;
    add_decision(rec, "single 4-arm logistic model; standardized over the two arms compared");
    missing_counts(frame, rows.size(), rec);
    rec.metadata["significant"] = est.p_rd < ctx.options.significance_level;
  } else {
    // Within arms {1,k} one indicator separates the pair.
    DesignSpec spec;
    spec.alcohol = arm != 3;
    spec.adherence = arm == 3;
    const auto x = build_design(frame, pair, spec, &dropped);
    const auto y = response(frame, pair);
    const auto m = fit_logistic(x, y);
    const std::string col = arm == 3 ? "adherence_int" : "alcohol_int";
    auto est = delta_method_inference(m, x, col, ctx.options.ci_level);
    est.factor = "arm" + std::to_string(arm);
    rec.estimates = json_of(est);
    rec.metadata["model"] = json_of(m);
    rec.metadata["model_columns"] = m.column_names;
    add_decision(rec, "separate 2-arm logistic model");
    missing_counts(frame, pair.size(), rec);
    rec.metadata["significant"] = est.p_rd < ctx.options.significance_level;
  }
  rec.metadata["dropped_columns"] = dropped;
  rec.metadata["significance_level"] = ctx.options.significance_level;
}

ojson linear_coefficient(const FittedGlm& m, const std::string& name, double ci_level) {
  const auto j = m.index_of(name);
  if (!j) return nullptr;
  const double b = m.coefficients[*j];
  const double se = m.se(*j);
  const double df = static_cast<double>(m.n_obs) - static_cast<double>(m.coefficients.size());
  const double q = student_t_quantile(0.5 + 0.5 * ci_level, df);
  ojson o;
  o["estimate"] = b;
  o["se"] = se;
  o["ci"] = {b - q * se, b + q * se};
  o["df"] = df;
  o["p_value"] = se > 0.0 ? student_t_two_sided_p(b / se, df) : (b == 0.0 ? 1.0 : 0.0);
  return o;
}

void run_linear(const Context& ctx, AnalysisRecord& rec, const std::string& outcome,
                const std::vector<std::string>& covariates) {
  const auto frame = frame_for(ctx, outcome, covariates);
  const auto rows = complete_rows(frame, covariates);
  if (rows.empty()) throw AnalysisError("no complete cases for outcome '" + outcome + "'");
  DesignSpec spec;
  spec.covariates = covariates;
  std::vector<std::string> dropped;
  const auto x = build_design(frame, rows, spec, &dropped);
  const auto y = response(frame, rows);
  const auto m = fit_linear(x, y);
  for (const char* f : {"alcohol_int", "adherence_int"}) {
    rec.estimates[f] = linear_coefficient(m, f, ctx.options.ci_level);
  }
  rec.estimates["sigma2"] = m.sigma2;
  if (!covariates.empty()) {
    DesignSpec plain;
    const auto m0 = fit_linear(build_design(frame, rows, plain), y);
    rec.estimates["sigma2_unadjusted"] = m0.sigma2;
  }
  try {
    const auto jb = jarque_bera(m.residuals);
    rec.tests["jarque_bera"] = json_of(jb);
    rec.metadata["residual_normality_rejected"] = jb.p_value < ctx.options.significance_level;
  } catch (const std::exception& e) {
    rec.tests["jarque_bera"] = nullptr;
    rec.metadata["residual_normality_note"] = e.what();
  }
  rec.metadata["model"] = json_of(m);
  rec.metadata["model_columns"] = m.column_names;
  rec.metadata["dropped_columns"] = dropped;
  rec.metadata["covariates"] = covariates;
  rec.metadata["significance_level"] = ctx.options.significance_level;
  missing_counts(frame, rows.size(), rec);
  add_decision(rec, covariates.empty() ? "linear model, complete-case"
                                       : "analysis of covariance with baseline drinking, complete-case");
}

struct Stratum {
  std::string label;
  std::function<bool(double)> contains;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::vector<Stratum> moderator_strata(const std::vector<double>& values,
                                      const std::vector<double>& cutpoints) {
  std::set<double> distinct(values.begin(), values.end());
  std::vector<Stratum> out;
  if (!cutpoints.empty()) {
    std::vector<double> c = cutpoints;
    std::sort(c.begin(), c.end());
    out.push_back({"< " + fmt(c.front()), [v = c.front()](double x) { return x < v; }});
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
      out.push_back({"[" + fmt(c[k]) + ", " + fmt(c[k + 1]) + ")",
                     [lo = c[k], hi = c[k + 1]](double x) { return x >= lo && x < hi; }});
    }
    out.push_back({">= " + fmt(c.back()), [v = c.back()](double x) { return x >= v; }});
    return out;
  }
  if (distinct.size() == 2) {
    for (double v : distinct) out.push_back({"= " + fmt(v), [v](double x) { return x == v; }});
    return out;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double med = percentile_linear(sorted, 0.5);
  out.push_back({"< median " + fmt(med), [med](double x) { return x < med; }});
  out.push_back({">= median " + fmt(med), [med](double x) { return x >= med; }});
  return out;
}

// Factor x moderator product, LRT against the main-effects model and, when
// significant, the factor's standardized effect within moderator strata.
void run_effect_modification(const Context& ctx, AnalysisRecord& rec, const std::string& outcome,
                             Factor factor, const std::string& label, const std::string& column,
                             const std::vector<double>& cutpoints,
                             const std::vector<std::pair<std::string, double>>& named_levels = {}) {
  const auto frame = frame_for(ctx, outcome, {column});
  const auto rows = complete_rows(frame, {column});
  if (rows.empty()) throw AnalysisError("no complete cases for outcome '" + outcome + "'");
  const auto& mod = frame.covariates.at(column);
  std::vector<double> values;
  for (std::size_t r : rows) values.push_back(*mod[r]);
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    throw FitError(FitFailure::degenerate_moderator,
                   "moderator '" + label + "' (" + column + ") is constant in the analysis population");
  }
  const bool in_strata = column == "gender_male";
  DesignSpec reduced;
  if (!in_strata) reduced.covariates = {column};
  DesignSpec full = reduced;
  full.products = {{to_string(factor), column}};
  const auto y = response(frame, rows);
  const auto xr = build_design(frame, rows, reduced);
  const auto xf = build_design(frame, rows, full);
  FittedGlm mf, mr;
  try {
    mr = fit_logistic(xr, y);
    mf = fit_logistic(xf, y);
  } catch (const FitError& e) {
    if (e.kind() != FitFailure::rank_deficient) throw;
    throw FitError(FitFailure::degenerate_moderator,
                   "moderator '" + label + "' makes the interaction column collinear: " + e.what());
  }
  const auto lrt = likelihood_ratio_test(mf, mr);
  const std::string product = to_string(factor) + ":" + column;
  const auto j = *mf.index_of(product);
  rec.tests["lrt"] = json_of(lrt);
  rec.estimates["interaction_coefficient"] = mf.coefficients[j];
  rec.estimates["interaction_se"] = mf.se(j);
  const bool significant = lrt.p_value < ctx.options.significance_level;
  rec.metadata["significance_level"] = ctx.options.significance_level;
  rec.metadata["significant"] = significant;
  rec.metadata["moderator_column"] = column;
  rec.metadata["model"] = json_of(mf);
  rec.metadata["model_columns"] = mf.column_names;
  missing_counts(frame, rows.size(), rec);
  ojson strat = ojson::array();
  if (significant) {
    rec.metadata["action"] = "stratified estimates by moderator level";
    std::vector<Stratum> strata;
    if (!named_levels.empty()) {
      for (const auto& [name, v] : named_levels) strata.push_back({name, [v](double x) { return x == v; }});
    } else {
      strata = moderator_strata(values, cutpoints);
    }
    for (const auto& s : strata) {
      std::vector<std::size_t> local;
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (s.contains(values[k])) local.push_back(k);
      }
      ojson o;
      o["stratum"] = s.label;
      o["n"] = local.size();
      try {
        if (local.empty()) throw AnalysisError("empty stratum");
        const std::string fcol = to_string(factor);
        auto est = contrast_inference(mf, xf, {{fcol, 1.0}}, {{fcol, 0.0}}, ctx.options.ci_level, {}, local);
        est.factor = fcol;
        o["estimate"] = json_of(est);
      } catch (const std::exception& e) {
        o["estimate"] = nullptr;
        o["error"] = e.what();
      }
      strat.push_back(std::move(o));
    }
  } else {
    rec.metadata["action"] = "no further action required";
  }
  rec.estimates["stratified"] = std::move(strat);
}

std::vector<Planned> plan(const AnalysisConfig& cfg, Section section) {
  std::vector<Planned> out;
  auto add = [&](AnalysisRecord h, Runner r) { out.push_back({std::move(h), std::move(r)}); };
  const std::pair<std::string, Factor> aims[] = {{"no_heavy_drinking", Factor::alcohol_int},
                                                 {"inh_adherent", Factor::adherence_int}};
  switch (section) {
    case Section::descriptive: {
      add(header(section, "baseline_by_arm", "", "", "all randomized"),
          [](const Context& ctx, AnalysisRecord& rec) {
            rec.estimates = json_of(descriptive_table(ctx.dataset, ctx.derived, ctx.config.descriptive_variables));
            add_decision(rec, "linear-interpolation percentiles; no tests across arms");
          });
      add(header(section, "enrollment_comparison", "", "", "enrolled vs declined"),
          [](const Context& ctx, AnalysisRecord& rec) {
            const auto cmp = enrollment_comparison(ctx.dataset, ctx.derived);
            if (!cmp) {
              rec.status = AnalysisStatus::skipped;
              rec.metadata["notice"] = "no screening file supplied";
              return;
            }
            rec.estimates = json_of(*cmp);
            rec.tests = json_of_tests(*cmp);
          });
      add(header(section, "no_heavy_drinking_by_visit", "no_heavy_drinking", "", "all randomized"),
          [](const Context& ctx, AnalysisRecord& rec) {
            ojson rows = ojson::array();
            for (const auto& t : timepoint_proportions(ctx.dataset, ctx.config.cutoffs)) {
              ojson o;
              o["month"] = t.month;
              o["group"] = t.group;
              o["n"] = t.n;
              o["successes"] = t.successes;
              o["proportion"] = t.proportion ? ojson(*t.proportion) : ojson(nullptr);
              rows.push_back(std::move(o));
            }
            rec.estimates["proportions"] = std::move(rows);
            add_decision(rec, "per-visit proportions only; no longitudinal model");
          });
      break;
    }
    case Section::primary:
      for (const auto& [outcome, factor] : aims) {
        const std::string o = outcome;
        const Factor f = factor;
        add(header(section, o + "." + to_string(f), o, to_string(f), "complete cases"),
            [o, f](const Context& ctx, AnalysisRecord& rec) { run_factorial(ctx, rec, o, f); });
        add(header(section, o + ".interaction", o, to_string(f), "complete cases"),
            [o, f](const Context& ctx, AnalysisRecord& rec) { run_interaction(ctx, rec, o, {f}); });
      }
      break;
    case Section::secondary:
      for (int arm : {2, 3, 4}) {
        add(header(section, "hepatotox_discontinuation.arm" + std::to_string(arm) + "_vs_arm1",
                   "hepatotox_discontinuation", "arm" + std::to_string(arm), "arms 1 and " + std::to_string(arm)),
            [arm](const Context& ctx, AnalysisRecord& rec) { run_hepatotoxicity(ctx, rec, arm); });
      }
      for (const std::string o : {"vl_suppressed_12m", "vl_suppressed_6m"}) {
        for (Factor f : {Factor::alcohol_int, Factor::adherence_int}) {
          add(header(section, o + "." + to_string(f), o, to_string(f), "complete cases"),
              [o, f](const Context& ctx, AnalysisRecord& rec) { run_factorial(ctx, rec, o, f); });
        }
        add(header(section, o + ".interaction", o, "alcohol_int,adherence_int", "complete cases"),
            [o](const Context& ctx, AnalysisRecord& rec) {
              run_interaction(ctx, rec, o, {Factor::alcohol_int, Factor::adherence_int});
            });
      }
      for (Factor f : {Factor::alcohol_int, Factor::adherence_int}) {
        add(header(section, "active_tb." + to_string(f), "active_tb", to_string(f), "complete cases"),
            [f](const Context& ctx, AnalysisRecord& rec) { run_factorial(ctx, rec, "active_tb", f); });
      }
      add(header(section, "peth6_continuous.ancova", "peth6_continuous", "alcohol_int,adherence_int", "complete cases"),
          [](const Context& ctx, AnalysisRecord& rec) {
            run_linear(ctx, rec, "peth6_continuous", ctx.config.ancova_covariates);
          });
      add(header(section, "mems_proportion.linear", "mems_proportion", "alcohol_int,adherence_int", "complete cases"),
          [](const Context& ctx, AnalysisRecord& rec) { run_linear(ctx, rec, "mems_proportion", {}); });
      break;
    case Section::exploratory: {
      for (const std::string o : {"drink_days_30", "heavy_days_14", "peth3_continuous", "peth12_continuous"}) {
        add(header(section, o + ".ancova", o, "alcohol_int,adherence_int", "complete cases"),
            [o](const Context& ctx, AnalysisRecord& rec) { run_linear(ctx, rec, o, ctx.config.ancova_covariates); });
      }
      add(header(section, "covid.baseline_comparison", "", "", "pre vs post lockdown"),
          [](const Context& ctx, AnalysisRecord& rec) {
            std::vector<VariableData> vars;
            for (const auto& v : ctx.config.descriptive_variables) {
              vars.push_back(collect_variable(ctx.dataset, ctx.derived, v));
            }
            std::vector<std::optional<std::string>> group_of;
            for (const auto& d : ctx.derived) group_of.push_back(to_string(d.covid_cohort));
            const auto cmp = compare_groups(vars, group_of, "pre_lockdown", "post_lockdown");
            rec.estimates = json_of(cmp);
            rec.tests = json_of_tests(cmp);
            rec.metadata["cutoff_date"] = format_date(ctx.config.cutoffs.covid_cutoff_date);
          });
      for (const auto& [outcome, factor] : aims) {
        const std::string o = outcome;
        const Factor f = factor;
        add(header(section, "covid." + o + "." + to_string(f), o, to_string(f), "complete cases"),
            [o, f](const Context& ctx, AnalysisRecord& rec) {
              run_effect_modification(ctx, rec, o, f, "covid_cohort", "covid_post_lockdown", {},
                                      {{"pre_lockdown", 0.0}, {"post_lockdown", 1.0}});
            });
      }
      for (const auto& m : cfg.moderators) {
        for (const auto& [outcome, factor] : aims) {
          const std::string o = outcome;
          const Factor f = factor;
          add(header(section, "subgroup." + m.name + "." + o + "." + to_string(f), o, to_string(f), "complete cases"),
              [o, f, m](const Context& ctx, AnalysisRecord& rec) {
                run_effect_modification(ctx, rec, o, f, m.name, m.column, m.cutpoints);
              });
        }
      }
      break;
    }
    case Section::missing_data: {
      for (const auto& [outcome, factor] : aims) {
        const std::string o = outcome;
        const Factor f = factor;
        add(header(section, o + ".complete_case", o, to_string(f), "all randomized"),
            [o](const Context& ctx, AnalysisRecord& rec) {
              const auto cc = complete_case_filter(frame_for(ctx, o));
              rec.estimates["retained"] = cc.retained;
              rec.estimates["dropped"] = cc.dropped;
              if (cc.warning) rec.metadata["warning"] = *cc.warning;
            });
        add(header(section, o + ".comparison", o, "", "complete vs missing outcome"),
            [o](const Context& ctx, AnalysisRecord& rec) {
              const auto cmp = missingness_comparison(ctx.dataset, ctx.derived, o, ctx.config.comparison_covariates);
              rec.estimates = json_of(cmp);
              rec.tests = json_of_tests(cmp);
            });
        if (o == "no_heavy_drinking") {
          add(header(section, o + ".worst_case", o, to_string(f), "all randomized"),
              [o, f](const Context& ctx, AnalysisRecord& rec) {
                const auto imp = worst_case_impute_alcohol(ctx.derived);
                const auto frame = build_frame(ctx.dataset, imp.derived, o, {}, ctx.sites);
                const auto fr = factorial_analysis(frame, f, ctx.options);
                rec.estimates = json_of(fr.estimate);
                rec.metadata["imputed"] = imp.imputed;
                rec.metadata["model_columns"] = fr.model.column_names;
                missing_counts(frame, fr.estimate.n, rec);
                add_decision(rec, "missing outcome imputed as heavy drinking");
              });
        }
        add(header(section, o + ".ipw", o, to_string(f), "all randomized"),
            [o, f](const Context& ctx, AnalysisRecord& rec) {
              const auto ipw = ipw_options(ctx.config);
              const auto frame = frame_for(ctx, o, ipw.covariates);
              std::size_t missing = 0;
              for (const auto& y : frame.outcome) missing += y ? 0 : 1;
              const double fraction = frame.size() ? static_cast<double>(missing) / frame.size() : 0.0;
              rec.metadata["missing_fraction"] = fraction;
              rec.metadata["missing_threshold"] = ipw.missing_threshold;
              if (!(fraction > ipw.missing_threshold)) {
                rec.status = AnalysisStatus::skipped;
                rec.metadata["notice"] = "missing fraction does not exceed the threshold";
                return;
              }
              const auto res = ipw_analysis(frame, f, ctx.options, ipw);
              rec.estimates = json_of(res.estimate);
              rec.metadata["weights"] = {{"min", res.min_weight},
                                         {"max", res.max_weight},
                                         {"truncated", res.truncated},
                                         {"floor", ipw.weight_floor},
                                         {"stabilization", res.stabilization}};
              rec.metadata["covariates"] = ipw.covariates;
              rec.metadata["n_dropped_missing_covariates"] = res.n_dropped_missing_covariates;
              if (res.missingness_model) rec.metadata["missingness_model"] = json_of(*res.missingness_model);
              rec.metadata["model_columns"] = res.outcome_model.column_names;
              add_decision(rec, "observed rows weighted by inverse estimated observation probability; no values imputed");
            });
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> prespecified_analyses(const AnalysisConfig& config, Section section) {
  std::vector<std::string> names;
  for (const auto& p : plan(config, section)) names.push_back(p.header.name);
  return names;
}

AnalysisReport run_analyses(const TrialDataset& dataset, const AnalysisConfig& config,
                            const std::vector<Section>& sections) {
  Context ctx{dataset, config, derive_rows(dataset, config), resolve_sites(dataset, config),
              analysis_options(config)};
  std::vector<Planned> tasks;
  for (Section s : sections) {
    auto p = plan(config, s);
    for (auto& t : p) tasks.push_back(std::move(t));
  }
  std::vector<AnalysisRecord> records(tasks.size());
  parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
    AnalysisRecord rec = tasks[i].header;
    try {
      tasks[i].run(ctx, rec);
    } catch (const FitError& e) {
      rec.status = AnalysisStatus::failed;
      rec.error = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      rec.status = AnalysisStatus::failed;
      rec.error = e.what();
    }
    records[i] = std::move(rec);
  });

  AnalysisReport report;
  report.analyses = std::move(records);
  report.config_echo = ojson::parse(to_json(config).dump());
  report.software_version = kSoftwareVersion;
  report.dataset_fingerprint = dataset_fingerprint(dataset);
  for (std::size_t i = 0; i < ctx.derived.size(); ++i) {
    for (const auto& n : ctx.derived[i].notes) {
      report.notes.push_back(dataset.participants[i].participant_id + ": " + n);
    }
  }
  report.notes.push_back("no multiplicity adjustment; p-values are raw");
  return report;
}

AnalysisReport run_primary(const TrialDataset& dataset, const AnalysisConfig& config) {
  return run_analyses(dataset, config, {Section::primary});
}

AnalysisReport run_secondary(const TrialDataset& dataset, const AnalysisConfig& config) {
  return run_analyses(dataset, config, {Section::secondary});
}

AnalysisReport run_exploratory(const TrialDataset& dataset, const AnalysisConfig& config) {
  return run_analyses(dataset, config, {Section::exploratory});
}

}  // namespace dipt
