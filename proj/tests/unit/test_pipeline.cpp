#include <map>
#include <set>

#include "doctest.h"
#include "dipt/errors.hpp"
#include "dipt/pipeline.hpp"
#include "dipt/simulator.hpp"

using namespace dipt;

namespace {

const std::vector<Section> kAll{Section::descriptive, Section::primary, Section::secondary,
                                Section::exploratory, Section::missing_data};

AnalysisConfig one_thread() {
  auto c = default_config();
  c.threads = 1;
  return c;
}

const TrialDataset& seven() {
  static const TrialDataset ds = simulate_trial(default_simulation(7)).dataset;
  return ds;
}

}  // namespace

TEST_CASE("every prespecified analysis appears exactly once, in plan order") {
  auto cfg = one_thread();
  cfg.moderators = {{"readiness", "readiness_score", {}}};
  cfg.ipw_covariates = {"auditc_0"};
  const auto rep = run_analyses(seven(), cfg, kAll);
  std::vector<std::string> expected;
  for (auto s : kAll) {
    const auto names = prespecified_analyses(cfg, s);
    expected.insert(expected.end(), names.begin(), names.end());
  }
  std::vector<std::string> got;
  for (const auto& a : rep.analyses) got.push_back(a.name);
  CHECK(got == expected);
  CHECK(std::set<std::string>(got.begin(), got.end()).size() == got.size());
  for (const char* name : {"primary.no_heavy_drinking.alcohol_int", "primary.no_heavy_drinking.interaction",
                           "primary.inh_adherent.adherence_int", "primary.inh_adherent.interaction",
                           "exploratory.subgroup.readiness.no_heavy_drinking.alcohol_int"}) {
    REQUIRE(rep.find(name) != nullptr);
  }
  CHECK(rep.find("primary.no_heavy_drinking.alcohol_int")->status == AnalysisStatus::ok);
  CHECK(rep.find("descriptive.enrollment_comparison")->status == AnalysisStatus::skipped);
  CHECK(rep.software_version == kSoftwareVersion);
  CHECK(rep.dataset_fingerprint == dataset_fingerprint(seven()));
}

TEST_CASE("section helpers run only their section") {
  const auto rep = run_primary(seven(), one_thread());
  for (const auto& a : rep.analyses) CHECK(a.section == "primary");
  CHECK(rep.analyses.size() == prespecified_analyses(one_thread(), Section::primary).size());
}

TEST_CASE("thread count does not change the report") {
  auto a = one_thread();
  auto b = one_thread();
  b.threads = 3;
  const auto ra = report_to_json(run_analyses(seven(), a, {Section::primary, Section::secondary}));
  const auto rb = report_to_json(run_analyses(seven(), b, {Section::primary, Section::secondary}));
  CHECK(ra.dump() == rb.dump());
}

TEST_CASE("constant moderator fails as degenerate, others still run") {
  auto ds = seven();
  for (auto& p : ds.participants) p.readiness_score = 5.0;
  auto cfg = one_thread();
  cfg.moderators = {{"readiness", "readiness_score", {}}};
  const auto rep = run_exploratory(ds, cfg);
  const auto* r = rep.find("exploratory.subgroup.readiness.no_heavy_drinking.alcohol_int");
  REQUIRE(r != nullptr);
  CHECK(r->status == AnalysisStatus::failed);
  CHECK(r->error.rfind("degenerate_moderator", 0) == 0);
  CHECK(rep.failures() >= 2);
  CHECK(rep.find("exploratory.peth3_continuous.ancova")->status == AnalysisStatus::ok);
}

TEST_CASE("zero events in an arm is a separation failure") {
  auto ds = seven();
  for (auto& p : ds.participants) {
    if (p.arm == 2 && p.discontinued_inh) {
      p.discontinuation_reason = DiscontinuationReason::other;
    }
  }
  const auto rep = run_secondary(ds, one_thread());
  const auto* r = rep.find("secondary.hepatotox_discontinuation.arm2_vs_arm1");
  REQUIRE(r != nullptr);
  CHECK(r->status == AnalysisStatus::failed);
  CHECK(r->error.rfind("separation", 0) == 0);
  CHECK(rep.find("primary.no_heavy_drinking.alcohol_int") == nullptr);
  CHECK(rep.find("secondary.peth6_continuous.ancova")->status == AnalysisStatus::ok);
}

TEST_CASE("planted sex-by-factor effect is found in the planted direction") {
  auto sim = default_simulation(41, 2000);
  sim.alcohol_outcome.alcohol = 0.8;
  sim.alcohol_outcome.factor_by_male = -1.6;
  sim.generate_mems = false;
  const auto ds = simulate_trial(sim).dataset;
  auto cfg = one_thread();
  cfg.moderators = {{"sex", "gender_male", {}}};
  const auto rep = run_exploratory(ds, cfg);
  const auto* r = rep.find("exploratory.subgroup.sex.no_heavy_drinking.alcohol_int");
  REQUIRE(r != nullptr);
  REQUIRE(r->status == AnalysisStatus::ok);
  CHECK(r->metadata["significant"] == true);
  CHECK(r->estimates["interaction_coefficient"].get<double>() < 0.0);
  const auto& st = r->estimates["stratified"];
  REQUIRE(st.size() == 2);
  CHECK(st[0]["stratum"] == "= 0");
  CHECK(st[0]["estimate"]["rd"].get<double>() > 0.0);
  CHECK(st[1]["estimate"]["rd"].get<double>() < 0.0);
}

TEST_CASE("ANCOVA adjustment reduces residual variance") {
  const auto rep = run_secondary(seven(), one_thread());
  const auto* r = rep.find("secondary.peth6_continuous.ancova");
  REQUIRE(r != nullptr);
  REQUIRE(r->status == AnalysisStatus::ok);
  CHECK(r->estimates["sigma2"].get<double>() < r->estimates["sigma2_unadjusted"].get<double>());
}

TEST_CASE("COVID cohort analyses are present and ok") {
  const auto rep = run_exploratory(seven(), one_thread());
  for (const char* n : {"exploratory.covid.baseline_comparison", "exploratory.covid.no_heavy_drinking.alcohol_int",
                        "exploratory.covid.inh_adherent.adherence_int"}) {
    const auto* r = rep.find(n);
    REQUIRE(r != nullptr);
    CHECK(r->status == AnalysisStatus::ok);
  }
  const auto* b = rep.find("exploratory.covid.baseline_comparison");
  CHECK(b->metadata["cutoff_date"] == "2020-03-19");
}

TEST_CASE("IPW is skipped below the missingness threshold") {
  auto cfg = one_thread();
  cfg.ipw_covariates = {"auditc_0"};
  cfg.missing_threshold = 0.99;
  const auto rep = run_analyses(seven(), cfg, {Section::missing_data});
  const auto* r = rep.find("missing_data.no_heavy_drinking.ipw");
  REQUIRE(r != nullptr);
  CHECK(r->status == AnalysisStatus::skipped);
}

TEST_CASE("report emission") {
  const auto rep = run_primary(seven(), one_thread());
  CHECK_THROWS_AS(emit_report(rep, "yaml"), ConfigError);
  const auto files = emit_report(rep, "json");
  REQUIRE(files.size() == 1);
  CHECK(files[0].first == "report.json");
  const auto parsed = ojson::parse(files[0].second);
  CHECK(parsed == report_to_json(rep));
  CHECK(parsed.dump(2) == files[0].second.substr(0, parsed.dump(2).size()));
  const auto md = emit_report(rep, "markdown");
  CHECK(md[0].first == "report.md");
  const auto csv = emit_report(rep, "csv");
  std::set<std::string> paths;
  for (const auto& f : csv) paths.insert(f.first);
  CHECK(paths.count("tables/analyses.csv") == 1);
  CHECK(paths.count("tables/estimates.csv") == 1);
}

TEST_CASE("fingerprint tracks the data") {
  auto ds = seven();
  const auto a = dataset_fingerprint(ds);
  ds.participants[0].peth[0] = *ds.participants[0].peth[0] + 1.0;
  CHECK(dataset_fingerprint(ds) != a);
  CHECK(a.rfind("fnv1a64:", 0) == 0);
  CHECK(a.size() == 24);
}
