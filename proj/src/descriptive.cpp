#include "dipt/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "csv.hpp"
#include "dipt/errors.hpp"

namespace dipt {

double percentile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("percentile outside [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ContinuousSummary summarize_continuous(std::span<const std::optional<double>> values) {
  ContinuousSummary s;
  std::vector<double> v;
  for (const auto& x : values) {
    if (x) v.push_back(*x);
    else ++s.n_missing;
  }
  s.n = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  s.mean = mean;
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  s.p0 = v.front();
  s.p25 = percentile_linear(v, 0.25);
  s.p50 = percentile_linear(v, 0.50);
  s.p75 = percentile_linear(v, 0.75);
  s.p100 = v.back();
  return s;
}

CategoricalSummary summarize_categorical(std::span<const std::optional<std::string>> values,
                                         const std::vector<std::string>& levels) {
  CategoricalSummary s;
  s.levels = levels;
  std::set<std::string> extra;
  for (const auto& x : values) {
    if (x && std::find(levels.begin(), levels.end(), *x) == levels.end()) extra.insert(*x);
  }
  s.levels.insert(s.levels.end(), extra.begin(), extra.end());
  s.counts.assign(s.levels.size(), 0);
  for (const auto& x : values) {
    if (!x) {
      ++s.n_missing;
      continue;
    }
    const auto it = std::find(s.levels.begin(), s.levels.end(), *x);
    ++s.counts[static_cast<std::size_t>(it - s.levels.begin())];
    ++s.n;
  }
  for (std::size_t c : s.counts) {
    s.proportions.push_back(s.n ? static_cast<double>(c) / static_cast<double>(s.n) : 0.0);
  }
  return s;
}

namespace {

std::vector<std::string> sorted_levels(const std::vector<std::optional<std::string>>& values) {
  std::set<std::string> s;
  for (const auto& v : values) {
    if (v) s.insert(*v);
  }
  return {s.begin(), s.end()};
}

std::vector<std::string> default_levels(const std::string& name, const TrialDataset& dataset) {
  if (name == "gender") return {"female", "male"};
  if (name == "arm") return {"1", "2", "3", "4"};
  if (name == "covid_cohort") return {"pre_lockdown", "post_lockdown"};
  if (name == "site") {
    std::vector<std::string> sites;
    for (const auto& p : dataset.participants) {
      if (std::find(sites.begin(), sites.end(), p.site) == sites.end()) sites.push_back(p.site);
    }
    return sites;
  }
  return {};
}

}  // namespace

VariableData collect_variable(const TrialDataset& dataset, const std::vector<DerivedOutcomes>& derived,
                              const std::string& name) {
  if (derived.size() != dataset.participants.size()) {
    throw AnalysisError("derived outcomes are not aligned with participants");
  }
  VariableData v;
  v.name = name;
  if (is_categorical_variable(name)) {
    v.continuous = false;
    for (std::size_t i = 0; i < derived.size(); ++i) {
      v.categorical.push_back(categorical_variable(dataset.participants[i], derived[i], name));
    }
    v.levels = default_levels(name, dataset);
    return v;
  }
  if (!is_numeric_variable(name) && !is_known_outcome(name)) {
    throw ConfigError("unknown variable '" + name + "'");
  }
  for (std::size_t i = 0; i < derived.size(); ++i) {
    const auto& p = dataset.participants[i];
    v.numeric.push_back(is_numeric_variable(name) ? numeric_variable(p, derived[i], name)
                                                  : outcome_value(p, derived[i], name));
  }
  return v;
}

DescriptiveTable grouped_table(const std::vector<VariableData>& variables,
                               const std::vector<std::optional<std::string>>& group_of,
                               const std::vector<std::string>& group_order) {
  DescriptiveTable t;
  t.groups.push_back("overall");
  t.groups.insert(t.groups.end(), group_order.begin(), group_order.end());
  for (const auto& var : variables) {
    if (var.size() != group_of.size()) throw std::invalid_argument("variable length mismatch");
    DescriptiveRow row;
    row.variable = var.name;
    row.continuous = var.continuous;
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < group_of.size(); ++i) {
        if (g == 0 || (group_of[i] && *group_of[i] == t.groups[g])) idx.push_back(i);
      }
      if (var.continuous) {
        std::vector<std::optional<double>> vals;
        for (std::size_t i : idx) vals.push_back(var.numeric[i]);
        row.continuous_by_group.push_back(summarize_continuous(vals));
      } else {
        std::vector<std::optional<std::string>> vals;
        for (std::size_t i : idx) vals.push_back(var.categorical[i]);
        // same level list in every column
        std::vector<std::string> levels = var.levels;
        for (const auto& l : sorted_levels(var.categorical)) {
          if (std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);
        }
        row.categorical_by_group.push_back(summarize_categorical(vals, levels));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

DescriptiveTable descriptive_table(const TrialDataset& dataset,
                                   const std::vector<DerivedOutcomes>& derived,
                                   const std::vector<std::string>& variables) {
  std::vector<VariableData> vars;
  for (const auto& name : variables) vars.push_back(collect_variable(dataset, derived, name));
  std::vector<std::optional<std::string>> group_of;
  for (const auto& p : dataset.participants) group_of.push_back("arm" + std::to_string(p.arm));
  return grouped_table(vars, group_of, {"arm1", "arm2", "arm3", "arm4"});
}

GroupComparison compare_groups(const std::vector<VariableData>& variables,
                               const std::vector<std::optional<std::string>>& group_of,
                               const std::string& group_a, const std::string& group_b) {
  GroupComparison out;
  out.group_a = group_a;
  out.group_b = group_b;
  out.table = grouped_table(variables, group_of, {group_a, group_b});
  for (const auto& var : variables) {
    if (var.continuous) {
      std::vector<double> a, b;
      for (std::size_t i = 0; i < group_of.size(); ++i) {
        if (!group_of[i] || !var.numeric[i]) continue;
        if (*group_of[i] == group_a) a.push_back(*var.numeric[i]);
        else if (*group_of[i] == group_b) b.push_back(*var.numeric[i]);
      }
      ComparisonTest ct;
      ct.variable = var.name;
      try {
        ct.test = two_sample_t_test(a, b);
      } catch (const std::exception& e) {
        ct.error = e.what();
      }
      out.tests.push_back(std::move(ct));
      continue;
    }
    std::vector<std::string> levels = var.levels;
    for (const auto& l : sorted_levels(var.categorical)) {
      if (std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);
    }
    for (const auto& level : levels) {
      Table2x2 t{};
      for (std::size_t i = 0; i < group_of.size(); ++i) {
        if (!group_of[i] || !var.categorical[i]) continue;
        int row;
        if (*group_of[i] == group_a) row = 0;
        else if (*group_of[i] == group_b) row = 1;
        else continue;
        ++t[row][*var.categorical[i] == level ? 0 : 1];
      }
      ComparisonTest ct;
      ct.variable = var.name;
      ct.level = level;
      try {
        ct.test = fisher_exact_2x2(t);
      } catch (const std::exception& e) {
        ct.error = e.what();
      }
      out.tests.push_back(std::move(ct));
    }
  }
  return out;
}

GroupComparison missingness_comparison(const TrialDataset& dataset,
                                       const std::vector<DerivedOutcomes>& derived,
                                       const std::string& outcome_name,
                                       const std::vector<std::string>& covariates) {
  if (!is_known_outcome(outcome_name)) throw ConfigError("unknown outcome '" + outcome_name + "'");
  std::vector<VariableData> vars;
  for (const auto& c : covariates) vars.push_back(collect_variable(dataset, derived, c));
  std::vector<std::optional<std::string>> group_of;
  for (std::size_t i = 0; i < derived.size(); ++i) {
    const bool observed = outcome_value(dataset.participants[i], derived[i], outcome_name).has_value();
    group_of.push_back(observed ? "complete" : "missing");
  }
  return compare_groups(vars, group_of, "complete", "missing");
}

std::optional<GroupComparison> enrollment_comparison(const TrialDataset& dataset,
                                                     const std::vector<DerivedOutcomes>& derived) {
  if (!dataset.screened_declined) return std::nullopt;
  const auto& declined = *dataset.screened_declined;
  const std::size_t n_enrolled = dataset.participants.size();
  std::vector<VariableData> vars;
  std::vector<std::string> notes;
  for (const auto& col : dataset.screened_columns) {
    if (!is_categorical_variable(col) && !is_numeric_variable(col)) {
      notes.push_back("screening column '" + col + "' is not a participant variable; not compared");
      continue;
    }
    VariableData v = collect_variable(dataset, derived, col);
    bool bad = false;
    for (const auto& s : declined) {
      const auto it = s.values.find(col);
      const std::string raw = it == s.values.end() ? std::string{} : it->second;
      if (v.continuous) {
        if (raw.empty()) {
          v.numeric.push_back(std::nullopt);
        } else if (const auto d = csv::parse_double(raw)) {
          v.numeric.push_back(*d);
        } else {
          notes.push_back("screening column '" + col + "' has non-numeric value '" + raw +
                          "' for " + s.screening_id + "; not compared");
          bad = true;
          break;
        }
      } else {
        v.categorical.push_back(raw.empty() ? std::nullopt : std::optional<std::string>(raw));
      }
    }
    if (!bad) vars.push_back(std::move(v));
  }
  std::vector<std::optional<std::string>> group_of(n_enrolled, std::string("enrolled"));
  group_of.resize(n_enrolled + declined.size(), std::string("declined"));
  auto out = compare_groups(vars, group_of, "enrolled", "declined");
  out.notes = std::move(notes);
  return out;
}

std::vector<TimepointProportion> timepoint_proportions(const TrialDataset& dataset,
                                                       const OutcomeCutoffs& cutoffs) {
  std::vector<TimepointProportion> out;
  const std::vector<std::string> groups{"overall", "arm1", "arm2", "arm3", "arm4"};
  for (int month : {3, 6}) {
    std::vector<TimepointProportion> cells;
    for (const auto& g : groups) {
      TimepointProportion t;
      t.month = month;
      t.group = g;
      cells.push_back(t);
    }
    for (const auto& p : dataset.participants) {
      const int heavy_at = p.gender == Gender::female ? cutoffs.auditc_female : cutoffs.auditc_male;
      const auto peth = p.peth_at(month);
      const auto audit = p.auditc_at(month);
      std::optional<int> ok;
      if ((peth && !(*peth < cutoffs.peth_threshold)) || (audit && *audit >= heavy_at)) ok = 0;
      else if (peth && audit) ok = 1;
      if (!ok) continue;
      for (std::size_t g : {std::size_t{0}, static_cast<std::size_t>(p.arm)}) {
        ++cells[g].n;
        cells[g].successes += static_cast<std::size_t>(*ok);
      }
    }
    for (auto& c : cells) {
      if (c.n) c.proportion = static_cast<double>(c.successes) / static_cast<double>(c.n);
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace dipt
