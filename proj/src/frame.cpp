#include "dipt/frame.hpp"

#include <algorithm>

#include "dipt/errors.hpp"

namespace dipt {

std::string to_string(Factor f) {
  return f == Factor::alcohol_int ? "alcohol_int" : "adherence_int";
}

Factor other_factor(Factor f) {
  return f == Factor::alcohol_int ? Factor::adherence_int : Factor::alcohol_int;
}

AnalysisFrame AnalysisFrame::subset(std::span<const std::size_t> rows) const {
  AnalysisFrame out;
  out.sites = sites;
  out.outcome_name = outcome_name;
  auto pick = [&](const auto& src, auto& dst) {
    dst.reserve(rows.size());
    for (std::size_t r : rows) dst.push_back(src[r]);
  };
  pick(ids, out.ids);
  pick(arm, out.arm);
  pick(alcohol, out.alcohol);
  pick(adherence, out.adherence);
  pick(male, out.male);
  pick(site, out.site);
  pick(outcome, out.outcome);
  pick(weights, out.weights);
  for (const auto& [name, col] : covariates) pick(col, out.covariates[name]);
  return out;
}

std::vector<std::size_t> AnalysisFrame::all_rows() const {
  std::vector<std::size_t> rows(size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

AnalysisFrame build_frame(const TrialDataset& dataset, const std::vector<DerivedOutcomes>& derived,
                          const std::string& outcome, const std::vector<std::string>& covariates,
                          const std::vector<std::string>& sites) {
  if (derived.size() != dataset.participants.size()) {
    throw AnalysisError("derived outcomes are not aligned with participants");
  }
  AnalysisFrame f;
  f.sites = sites;
  f.outcome_name = outcome;
  const std::size_t n = dataset.participants.size();
  for (const auto& c : covariates) {
    if (!is_numeric_variable(c)) throw ConfigError("unknown numeric variable '" + c + "'");
    f.covariates[c].reserve(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = dataset.participants[i];
    const auto ind = derive_factor_indicators(p.arm);
    f.ids.push_back(p.participant_id);
    f.arm.push_back(p.arm);
    f.alcohol.push_back(ind.alcohol_int);
    f.adherence.push_back(ind.adherence_int);
    f.male.push_back(p.gender == Gender::male ? 1 : 0);
    const auto it = std::find(sites.begin(), sites.end(), p.site);
    if (it == sites.end()) throw ConfigError("participant " + p.participant_id + " has unknown site '" + p.site + "'");
    f.site.push_back(static_cast<std::size_t>(it - sites.begin()));
    f.outcome.push_back(outcome.empty() ? std::nullopt : outcome_value(p, derived[i], outcome));
    for (const auto& c : covariates) f.covariates[c].push_back(numeric_variable(p, derived[i], c));
  }
  f.weights.assign(n, 1.0);
  return f;
}

std::vector<std::size_t> complete_rows(const AnalysisFrame& frame,
                                       const std::vector<std::string>& covariates) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (!frame.outcome[i]) continue;
    bool ok = true;
    for (const auto& c : covariates) {
      const auto it = frame.covariates.find(c);
      if (it == frame.covariates.end()) throw AnalysisError("covariate '" + c + "' is not in the frame");
      if (!it->second[i]) {
        ok = false;
        break;
      }
    }
    if (ok) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> rows_in_arms(const AnalysisFrame& frame, std::span<const std::size_t> rows,
                                      std::initializer_list<int> arms) {
  std::vector<std::size_t> out;
  for (std::size_t r : rows) {
    if (std::find(arms.begin(), arms.end(), frame.arm[r]) != arms.end()) out.push_back(r);
  }
  return out;
}

DesignMatrix build_design(const AnalysisFrame& frame, std::span<const std::size_t> rows,
                          const DesignSpec& spec, std::vector<std::string>* dropped) {
  struct Col {
    std::string name;
    std::vector<double> values;
    bool droppable;
  };
  std::vector<Col> cols;
  const std::size_t n = rows.size();
  auto add = [&](std::string name, auto&& value_of, bool droppable) {
    Col c{std::move(name), std::vector<double>(n), droppable};
    for (std::size_t k = 0; k < n; ++k) c.values[k] = value_of(rows[k]);
    cols.push_back(std::move(c));
  };

  add("(intercept)", [](std::size_t) { return 1.0; }, false);
  if (spec.arm_dummies) {
    for (int a : {2, 3, 4}) {
      add("arm" + std::to_string(a), [&, a](std::size_t r) { return frame.arm[r] == a ? 1.0 : 0.0; },
          false);
    }
  } else {
    if (spec.alcohol) add("alcohol_int", [&](std::size_t r) { return double(frame.alcohol[r]); }, false);
    if (spec.adherence) add("adherence_int", [&](std::size_t r) { return double(frame.adherence[r]); }, false);
    if (spec.interaction) {
      add("alcohol_int:adherence_int",
          [&](std::size_t r) { return double(frame.alcohol[r] * frame.adherence[r]); }, false);
    }
  }
  if (spec.strata) {
    add("gender_male", [&](std::size_t r) { return double(frame.male[r]); }, true);
    for (std::size_t s = 1; s < frame.sites.size(); ++s) {
      add("site_" + frame.sites[s], [&, s](std::size_t r) { return frame.site[r] == s ? 1.0 : 0.0; },
          true);
    }
  }
  for (const auto& c : spec.covariates) {
    const auto it = frame.covariates.find(c);
    if (it == frame.covariates.end()) throw AnalysisError("covariate '" + c + "' is not in the frame");
    add(c, [&](std::size_t r) {
      if (!it->second[r]) throw AnalysisError("covariate '" + c + "' is missing for an analyzed row");
      return *it->second[r];
    }, false);
  }

  std::vector<Col> kept;
  for (auto& c : cols) {
    const bool constant = n > 0 && std::all_of(c.values.begin(), c.values.end(),
                                               [&](double v) { return v == c.values.front(); });
    if (c.droppable && constant) {
      if (dropped) dropped->push_back(c.name);
      continue;
    }
    kept.push_back(std::move(c));
  }

  std::vector<std::string> names;
  for (const auto& c : kept) names.push_back(c.name);
  for (const auto& [factor, cov] : spec.products) names.push_back(factor + ":" + cov);

  DesignMatrix x(n, names);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    std::copy(kept[j].values.begin(), kept[j].values.end(), x.column(j).begin());
  }
  for (std::size_t k = 0; k < spec.products.size(); ++k) {
    const auto& [factor, cov] = spec.products[k];
    const auto left = x.index_of(factor);
    const auto right = x.index_of(cov);
    if (!left || !right) {
      throw AnalysisError("product term " + factor + ":" + cov + " needs both main effects in the model");
    }
    x.add_product(kept.size() + k, *left, *right);
  }
  x.refresh_products();
  x.row_ids.reserve(n);
  for (std::size_t r : rows) x.row_ids.push_back(frame.ids[r]);
  return x;
}

std::vector<double> response(const AnalysisFrame& frame, std::span<const std::size_t> rows) {
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) {
    if (!frame.outcome[r]) throw AnalysisError("response missing for an analyzed row");
    y.push_back(*frame.outcome[r]);
  }
  return y;
}

std::vector<double> row_weights(const AnalysisFrame& frame, std::span<const std::size_t> rows) {
  std::vector<double> w;
  w.reserve(rows.size());
  for (std::size_t r : rows) w.push_back(frame.weights[r]);
  return w;
}

}  // namespace dipt
