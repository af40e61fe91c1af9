#include <sstream>

#include "csv.hpp"
#include "dipt/errors.hpp"
#include "report_json.hpp"

namespace dipt {
namespace {

template <class T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson summary_json(const ContinuousSummary& s) {
  ojson o;
  o["n"] = s.n;
  o["n_missing"] = s.n_missing;
  o["mean"] = opt(s.mean);
  o["sd"] = opt(s.sd);
  o["p0"] = opt(s.p0);
  o["p25"] = opt(s.p25);
  o["p50"] = opt(s.p50);
  o["p75"] = opt(s.p75);
  o["p100"] = opt(s.p100);
  return o;
}

ojson summary_json(const CategoricalSummary& s) {
  ojson o;
  o["n"] = s.n;
  o["n_missing"] = s.n_missing;
  ojson lv = ojson::array();
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    lv.push_back({{"level", s.levels[k]}, {"count", s.counts[k]}, {"proportion", s.proportions[k]}});
  }
  o["levels"] = std::move(lv);
  return o;
}

}  // namespace

ojson json_of(const MarginalEstimate& e) {
  ojson o;
  o["factor"] = e.factor;
  o["n"] = e.n;
  o["risk1"] = e.risk1;
  o["risk0"] = e.risk0;
  o["rd"] = e.rd;
  o["se_rd"] = e.se_rd;
  o["ci_rd"] = {e.ci_rd.first, e.ci_rd.second};
  o["p_rd"] = e.p_rd;
  o["rr"] = opt(e.rr);
  o["se_log_rr"] = opt(e.se_log_rr);
  o["ci_rr"] = e.ci_rr ? ojson{e.ci_rr->first, e.ci_rr->second} : ojson(nullptr);
  o["p_rr"] = opt(e.p_rr);
  o["ci_level"] = e.ci_level;
  return o;
}

ojson json_of(const FittedGlm& m) {
  ojson o;
  o["family"] = m.family == GlmFamily::binomial_logit ? "binomial_logit" : "gaussian_identity";
  o["n_obs"] = m.n_obs;
  o["converged"] = m.converged;
  o["iterations"] = m.iterations;
  o["log_likelihood"] = m.log_likelihood;
  ojson coef = ojson::array();
  for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
    coef.push_back({{"name", m.column_names[j]}, {"estimate", m.coefficients[j]}, {"se", m.se(j)}});
  }
  o["coefficients"] = std::move(coef);
  if (m.family == GlmFamily::gaussian_identity) o["sigma2"] = m.sigma2;
  return o;
}

ojson json_of(const TestResult& t) {
  ojson o;
  o["method"] = t.method;
  o["statistic"] = t.statistic;
  o["df"] = opt(t.df);
  o["p_value"] = t.p_value;
  o["degenerate"] = t.degenerate;
  return o;
}

ojson json_of(const StratifiedEstimate& s, Factor factor) {
  ojson o;
  o["factor"] = to_string(factor);
  o["subset"] = s.label;
  o["arms"] = s.arms;
  o["estimate"] = s.estimate ? json_of(*s.estimate) : ojson(nullptr);
  if (!s.error.empty()) o["error"] = s.error;
  return o;
}

ojson json_of(const DescriptiveTable& t) {
  ojson o;
  o["groups"] = t.groups;
  ojson vars = ojson::array();
  for (const auto& row : t.rows) {
    ojson v;
    v["variable"] = row.variable;
    v["type"] = row.continuous ? "continuous" : "categorical";
    ojson by = ojson::object();
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      by[t.groups[g]] = row.continuous ? summary_json(row.continuous_by_group[g])
                                       : summary_json(row.categorical_by_group[g]);
    }
    v["by_group"] = std::move(by);
    vars.push_back(std::move(v));
  }
  o["variables"] = std::move(vars);
  return o;
}

ojson json_of(const GroupComparison& c) {
  ojson o;
  o["group_a"] = c.group_a;
  o["group_b"] = c.group_b;
  o["table"] = json_of(c.table);
  o["notes"] = c.notes;
  return o;
}

ojson json_of_tests(const GroupComparison& c) {
  ojson arr = ojson::array();
  for (const auto& t : c.tests) {
    ojson o;
    o["variable"] = t.variable;
    o["level"] = t.level.empty() ? ojson(nullptr) : ojson(t.level);
    o["test"] = t.test ? json_of(*t.test) : ojson(nullptr);
    if (!t.error.empty()) o["error"] = t.error;
    arr.push_back(std::move(o));
  }
  return {{"comparisons", std::move(arr)}};
}

ojson report_to_json(const AnalysisReport& report) {
  ojson o;
  o["software_version"] = report.software_version;
  o["dataset_fingerprint"] = report.dataset_fingerprint;
  o["config"] = report.config_echo;
  ojson arr = ojson::array();
  for (const auto& a : report.analyses) {
    ojson r;
    r["name"] = a.name;
    r["section"] = a.section;
    r["outcome"] = a.outcome;
    r["factor"] = a.factor;
    r["population"] = a.population;
    r["status"] = to_string(a.status);
    r["error"] = a.error.empty() ? ojson(nullptr) : ojson(a.error);
    r["estimates"] = a.estimates;
    r["tests"] = a.tests;
    r["metadata"] = a.metadata;
    arr.push_back(std::move(r));
  }
  o["analyses"] = std::move(arr);
  o["notes"] = report.notes;
  return o;
}

namespace {

std::string scalar_text(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return csv::format_double(v.get<double>());
  return v.dump();
}

void flatten(const ojson& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    for (const auto& [k, x] : v.items()) flatten(x, prefix.empty() ? k : prefix + "." + k, out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(prefix, scalar_text(v));
  }
}

bool is_descriptive_table(const ojson& v) {
  return v.is_object() && v.contains("groups") && v.contains("variables");
}

const ojson* descriptive_of(const AnalysisRecord& a) {
  if (is_descriptive_table(a.estimates)) return &a.estimates;
  if (a.estimates.is_object() && a.estimates.contains("table") && is_descriptive_table(a.estimates["table"])) {
    return &a.estimates["table"];
  }
  return nullptr;
}

std::string num(const ojson& v) {
  if (!v.is_number()) return "NA";
  std::ostringstream s;
  s.precision(4);
  s << v.get<double>();
  return s.str();
}

// One summary line: estimate, CI and p for the main quantity of a record.
std::vector<std::string> headline(const AnalysisRecord& a) {
  const auto& e = a.estimates;
  if (e.is_object() && e.contains("rd")) {
    return {"RD", num(e["rd"]), "[" + num(e["ci_rd"][0]) + ", " + num(e["ci_rd"][1]) + "]", num(e["p_rd"])};
  }
  if (e.is_object() && e.contains("alcohol_int") && e["alcohol_int"].is_object()) {
    const auto& c = e["alcohol_int"];
    return {"alcohol_int coef", num(c["estimate"]), "[" + num(c["ci"][0]) + ", " + num(c["ci"][1]) + "]",
            num(c["p_value"])};
  }
  if (a.tests.is_object() && a.tests.contains("lrt")) {
    return {"LRT chi2", num(a.tests["lrt"]["statistic"]), "", num(a.tests["lrt"]["p_value"])};
  }
  return {"", "", "", ""};
}

void markdown_table(std::ostringstream& s, const ojson& t) {
  const auto& groups = t["groups"];
  s << "| variable | statistic |";
  for (const auto& g : groups) s << ' ' << g.get<std::string>() << " |";
  s << "\n|---|---|";
  for (std::size_t g = 0; g < groups.size(); ++g) s << "---|";
  s << '\n';
  for (const auto& v : t["variables"]) {
    const std::string name = v["variable"].get<std::string>();
    const auto& by = v["by_group"];
    if (v["type"] == "continuous") {
      for (const char* stat : {"n", "mean", "sd", "p0", "p25", "p50", "p75", "p100"}) {
        s << "| " << name << " | " << stat << " |";
        for (const auto& g : groups) s << ' ' << num(by[g.get<std::string>()][stat]) << " |";
        s << '\n';
      }
    } else {
      const auto& first = by[groups[0].get<std::string>()]["levels"];
      for (std::size_t k = 0; k < first.size(); ++k) {
        s << "| " << name << " | " << first[k]["level"].get<std::string>() << " n (%) |";
        for (const auto& g : groups) {
          const auto& lv = by[g.get<std::string>()]["levels"][k];
          s << ' ' << lv["count"].get<std::size_t>() << " (" << num(ojson(100.0 * lv["proportion"].get<double>()))
            << ") |";
        }
        s << '\n';
      }
    }
  }
  s << '\n';
}

std::string to_markdown(const AnalysisReport& report) {
  std::ostringstream s;
  s << "# Analysis report\n\n";
  s << "- software: " << report.software_version << "\n";
  s << "- dataset: " << report.dataset_fingerprint << "\n";
  s << "- failed analyses: " << report.failures() << "\n\n";
  s << "## Summary\n\n| analysis | status | quantity | estimate | CI | p |\n|---|---|---|---|---|---|\n";
  for (const auto& a : report.analyses) {
    const auto h = headline(a);
    s << "| " << a.name << " | " << to_string(a.status) << " | " << h[0] << " | " << h[1] << " | " << h[2]
      << " | " << h[3] << " |\n";
  }
  s << '\n';
  for (const auto& a : report.analyses) {
    s << "## " << a.name << "\n\n";
    s << "status: " << to_string(a.status);
    if (!a.error.empty()) s << " (" << a.error << ")";
    s << "\n\n";
    if (const auto* t = descriptive_of(a)) markdown_table(s, *t);
    if (a.tests.is_object() && a.tests.contains("comparisons")) {
      s << "| variable | level | test | p |\n|---|---|---|---|\n";
      for (const auto& c : a.tests["comparisons"]) {
        s << "| " << c["variable"].get<std::string>() << " | " << scalar_text(c["level"]) << " | "
          << (c["test"].is_null() ? "" : c["test"]["method"].get<std::string>()) << " | "
          << (c["test"].is_null() ? "NA" : num(c["test"]["p_value"])) << " |\n";
      }
      s << '\n';
    }
  }
  if (!report.notes.empty()) {
    s << "## Notes\n\n";
    for (const auto& n : report.notes) s << "- " << n << '\n';
  }
  return s.str();
}

std::string csv_text(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream s;
  for (const auto& r : rows) csv::write_row(s, r);
  return s.str();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> emit_report(const AnalysisReport& report,
                                                              const std::string& format) {
  if (format == "json") return {{"report.json", report_to_json(report).dump(2) + "\n"}};
  if (format == "markdown") return {{"report.md", to_markdown(report)}};
  if (format != "csv") throw ConfigError("unknown report format '" + format + "' (json, markdown, csv)");

  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::vector<std::string>> analyses{{"analysis", "section", "outcome", "factor", "population", "status", "error"}};
  std::vector<std::vector<std::string>> values{{"analysis", "key", "value"}};
  for (const auto& a : report.analyses) {
    analyses.push_back({a.name, a.section, a.outcome, a.factor, a.population, to_string(a.status), a.error});
    std::vector<std::pair<std::string, std::string>> flat;
    flatten(a.estimates, "estimates", flat);
    flatten(a.tests, "tests", flat);
    for (auto& [k, v] : flat) values.push_back({a.name, k, v});
  }
  files.emplace_back("tables/analyses.csv", csv_text(analyses));
  files.emplace_back("tables/estimates.csv", csv_text(values));
  for (const auto& a : report.analyses) {
    const auto* t = descriptive_of(a);
    if (!t) continue;
    std::vector<std::vector<std::string>> rows{{"variable", "group", "statistic", "value"}};
    for (const auto& v : (*t)["variables"]) {
      for (const auto& [g, summary] : v["by_group"].items()) {
        std::vector<std::pair<std::string, std::string>> flat;
        flatten(summary, "", flat);
        for (auto& [k, x] : flat) rows.push_back({v["variable"].get<std::string>(), g, k, x});
      }
    }
    files.emplace_back("tables/" + a.name + ".csv", csv_text(rows));
  }
  return files;
}

}  // namespace dipt
