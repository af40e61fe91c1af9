// Command-line front end: describe, analyze, sensitivity, simulate,
// calibrate, validate.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dipt/config.hpp"
#include "dipt/data_model.hpp"
#include "dipt/errors.hpp"
#include "dipt/pipeline.hpp"
#include "dipt/simulator.hpp"

namespace fs = std::filesystem;
using namespace dipt;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> participants, mems, screened, out, format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> n, reps;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON configuration file");
  sub->add_option("--participants", f.participants, "participants.csv");
  sub->add_option("--mems", f.mems, "mems.csv");
  sub->add_option("--screened", f.screened, "screened.csv (optional)");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--format", f.format, "json, markdown or csv");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  sub->add_option("--n", f.n, "participants per simulated trial");
  sub->add_option("--reps", f.reps, "Monte Carlo replications");
}

AnalysisConfig resolve(const Flags& f) {
  AnalysisConfig c = f.config.empty() ? default_config() : load_config(f.config);
  if (f.participants) c.participants_path = *f.participants;
  if (f.mems) c.mems_path = *f.mems;
  if (f.screened) c.screened_path = *f.screened;
  if (f.out) c.out_path = *f.out;
  if (f.format) c.format = *f.format;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (f.n) c.n = *f.n;
  if (f.reps) c.reps = *f.reps;
  if (c.format != "json" && c.format != "markdown" && c.format != "csv") {
    throw ConfigError("unknown report format '" + c.format + "' (json, markdown, csv)");
  }
  return c;
}

TrialDataset load(const AnalysisConfig& c) {
  if (c.participants_path.empty() || c.mems_path.empty()) {
    throw ConfigError("--participants and --mems are required");
  }
  std::optional<fs::path> screened;
  if (!c.screened_path.empty()) screened = c.screened_path;
  return load_trial_data(c.participants_path, c.mems_path, c, screened);
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
  if (!out) throw Error("write failed for " + path.string());
}

void write_outputs(const AnalysisConfig& c, const std::vector<std::pair<std::string, std::string>>& files) {
  if (c.out_path.empty()) {
    if (files.size() != 1) throw ConfigError("--out is required for csv output");
    std::cout << files.front().second;
    return;
  }
  for (const auto& [rel, text] : files) write_file(fs::path(c.out_path) / rel, text);
}

bool print_validation(const ValidationReport& v) {
  for (const auto& e : v.errors) {
    std::cerr << "error: " << e.participant_id << " " << e.field << ": " << e.message << "\n";
  }
  for (const auto& w : v.warnings) {
    std::cerr << "warning: " << w.participant_id << " " << w.field << ": " << w.message << "\n";
  }
  return v.ok();
}

int run_report(const Flags& f, const std::vector<Section>& sections) {
  const auto c = resolve(f);
  const auto ds = load(c);
  if (!print_validation(validate(ds, c))) {
    std::cerr << "validation failed; no analyses run\n";
    return 1;
  }
  const auto report = run_analyses(ds, c, sections);
  write_outputs(c, emit_report(report, c.format));
  for (const auto& a : report.analyses) {
    if (a.status == AnalysisStatus::failed) std::cerr << "failed: " << a.name << ": " << a.error << "\n";
  }
  return report.failures() ? 2 : 0;
}

int run_simulate(const Flags& f) {
  const auto c = resolve(f);
  auto sc = default_simulation(c.seed, c.n);
  sc.alcohol_missing = {MissingMechanism::mcar, 0.08, 0.0, 0.0};
  if (!c.sites.empty()) sc.sites = c.sites;
  sc.cutoffs = c.cutoffs;
  const auto trial = simulate_trial(sc);
  const fs::path dir = c.out_path.empty() ? fs::path(".") : fs::path(c.out_path);
  std::ostringstream p, m;
  write_participants(p, trial.dataset.participants);
  write_mems(m, trial.dataset.mems_events);
  write_file(dir / "participants.csv", p.str());
  write_file(dir / "mems.csv", m.str());
  std::cerr << "wrote " << trial.dataset.participants.size() << " participants and "
            << trial.dataset.mems_events.size() << " MEMS openings to " << dir.string() << "\n";
  return 0;
}

int run_calibrate(const Flags& f) {
  const auto c = resolve(f);
  auto sc = default_simulation(c.seed, c.n);
  if (!c.sites.empty()) sc.sites = c.sites;
  sc.cutoffs = c.cutoffs;
  ojson out;
  out["software_version"] = kSoftwareVersion;
  out["seed"] = c.seed;
  out["n"] = c.n;
  out["reps"] = c.reps;
  ojson arr = ojson::array();
  for (Factor factor : {Factor::alcohol_int, Factor::adherence_int}) {
    const auto r = monte_carlo_calibration(sc, c.reps, factor, c.threads, c.ci_level, c.significance_level);
    ojson o;
    o["factor"] = to_string(factor);
    o["replications"] = r.replications;
    o["failures"] = r.failures;
    o["true_rd"] = r.true_rd;
    o["mean_rd"] = r.mean_rd;
    o["mean_bias"] = r.mean_bias;
    o["empirical_sd"] = r.empirical_sd;
    o["mean_se"] = r.mean_se;
    o["coverage"] = r.coverage;
    o["ci_level"] = r.ci_level;
    o["lrt_tests"] = r.lrt_tests;
    o["lrt_rejection_rate"] = r.lrt_rejection_rate;
    o["alpha"] = r.alpha;
    arr.push_back(std::move(o));
  }
  out["calibration"] = std::move(arr);
  const std::string text = out.dump(2) + "\n";
  if (c.out_path.empty()) std::cout << text;
  else write_file(fs::path(c.out_path) / "calibration.json", text);
  return 0;
}

int run_validate(const Flags& f) {
  const auto c = resolve(f);
  const auto ds = load(c);
  const bool ok = print_validation(validate(ds, c));
  std::cout << (ok ? "valid" : "invalid") << ": " << ds.participants.size() << " participants, "
            << ds.mems_events.size() << " MEMS openings\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factorial trial analysis"};
  app.require_subcommand(1);
  Flags flags;
  struct Cmd {
    const char* name;
    const char* help;
  };
  const Cmd cmds[] = {
      {"describe", "descriptive tables"},
      {"analyze", "all prespecified analyses"},
      {"sensitivity", "missing-data analyses: complete case, worst case, IPW"},
      {"simulate", "write a synthetic dataset"},
      {"calibrate", "Monte Carlo calibration of the estimators"},
      {"validate", "schema and invariant checks only"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : cmds) {
    subs[c.name] = app.add_subcommand(c.name, c.help);
    add_flags(subs[c.name], flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (*subs["describe"]) return run_report(flags, {Section::descriptive});
    if (*subs["analyze"]) {
      return run_report(flags, {Section::descriptive, Section::primary, Section::secondary,
                                Section::exploratory, Section::missing_data});
    }
    if (*subs["sensitivity"]) return run_report(flags, {Section::missing_data});
    if (*subs["simulate"]) return run_simulate(flags);
    if (*subs["calibrate"]) return run_calibrate(flags);
    if (*subs["validate"]) return run_validate(flags);
  } catch (const LoadError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << d.to_string() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
