#include "dipt/data_model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "csv.hpp"
#include "dipt/errors.hpp"

namespace dipt {

const std::vector<std::string> kParticipantColumns{
    "participant_id", "site", "gender", "arm", "enrollment_date",
    "scheduled_inh_completion_date", "discontinued_inh", "discontinuation_date",
    "discontinuation_reason", "prescribed_doses", "visit3_attended", "visit6_attended",
    "visit12_attended", "peth_0", "peth_3", "peth_6", "peth_12", "auditc_0", "auditc_3",
    "auditc_6", "vl6_detectable", "vl12_detectable", "active_tb", "drink_days_30",
    "heavy_days_14", "timepref_score", "riskpref_score", "readiness_score"};

namespace {

// Accepted in addition to the fixed schema.
const std::vector<std::string> kOptionalParticipantColumns{"mems_available", "vl6_copies",
                                                           "vl12_copies"};

constexpr std::array<int, 3> kVisitMonths{3, 6, 12};
constexpr std::array<int, 4> kPethMonths{0, 3, 6, 12};
constexpr std::array<int, 3> kAuditcMonths{0, 3, 6};
constexpr std::array<int, 2> kVlMonths{6, 12};

template <std::size_t N>
std::size_t month_index(const std::array<int, N>& months, int month) {
  for (std::size_t i = 0; i < N; ++i) {
    if (months[i] == month) return i;
  }
  throw std::out_of_range("month " + std::to_string(month) + " is not measured");
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "female" || s == "F" || s == "f") return Gender::female;
  if (s == "male" || s == "M" || s == "m") return Gender::male;
  return std::nullopt;
}

std::optional<DiscontinuationReason> parse_reason(std::string_view s) {
  if (s == "hepatotoxicity_grade3") return DiscontinuationReason::hepatotoxicity_grade3;
  if (s == "hepatotoxicity_grade4") return DiscontinuationReason::hepatotoxicity_grade4;
  if (s == "other") return DiscontinuationReason::other;
  return std::nullopt;
}

// Collects cell-level diagnostics for one file.
class RowParser {
 public:
  RowParser(std::string file, std::vector<Diagnostic>& diags)
      : file_(std::move(file)), diags_(diags) {}

  // Returns false (after recording diagnostics) if the header is unusable.
  bool header(const csv::Row& row, const std::vector<std::string>& required,
              const std::vector<std::string>& optional, bool allow_extra = false) {
    index_.clear();
    bool ok = true;
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      const auto& name = row.fields[i];
      const bool known = std::find(required.begin(), required.end(), name) != required.end() ||
                         std::find(optional.begin(), optional.end(), name) != optional.end();
      if (!known && !allow_extra) {
        error(0, name, "malformed header: unknown column");
        ok = false;
      }
      if (!index_.emplace(name, i).second) {
        error(0, name, "malformed header: duplicate column");
        ok = false;
      }
    }
    for (const auto& name : required) {
      if (!index_.count(name)) {
        error(0, name, "malformed header: missing required column");
        ok = false;
      }
    }
    width_ = row.fields.size();
    return ok;
  }

  bool begin_row(const csv::Row& row, std::size_t data_row) {
    row_ = &row;
    data_row_ = data_row;
    if (row.fields.size() != width_) {
      error(data_row, "", "expected " + std::to_string(width_) + " fields, found " +
                              std::to_string(row.fields.size()));
      return false;
    }
    return true;
  }

  bool has(const std::string& col) const { return index_.count(col) > 0; }

  std::string_view raw(const std::string& col) const {
    const auto it = index_.find(col);
    if (it == index_.end()) return {};
    return row_->fields[it->second];
  }

  template <typename T, typename Parse>
  std::optional<T> optional_cell(const std::string& col, Parse parse, const char* expect) {
    const auto text = raw(col);
    if (text.empty()) return std::nullopt;
    auto v = parse(text);
    if (!v) {
      error(data_row_, col, "unparseable cell '" + std::string(text) + "', expected " + expect);
      return std::nullopt;
    }
    return static_cast<T>(*v);
  }

  template <typename T, typename Parse>
  T required_cell(const std::string& col, Parse parse, const char* expect, T fallback) {
    if (raw(col).empty()) {
      error(data_row_, col, "required value is empty");
      return fallback;
    }
    return optional_cell<T>(col, parse, expect).value_or(fallback);
  }

  void error(std::size_t row, const std::string& col, const std::string& msg) {
    diags_.push_back(Diagnostic{file_, row, col, msg});
  }
  void error(const std::string& col, const std::string& msg) { error(data_row_, col, msg); }

  std::size_t data_row() const { return data_row_; }
  const std::string& file() const { return file_; }

 private:
  std::string file_;
  std::vector<Diagnostic>& diags_;
  std::map<std::string, std::size_t> index_;
  std::size_t width_ = 0;
  const csv::Row* row_ = nullptr;
  std::size_t data_row_ = 0;
};

bool blank(const csv::Row& row) {
  return row.fields.size() == 1 && row.fields[0].empty();
}

std::optional<csv::Row> read_header(csv::Reader& reader, RowParser& p) {
  auto header = reader.next();
  if (!header) p.error(0, "", "malformed header: file is empty");
  return header;
}

auto date_parser = [](std::string_view s) { return parse_date(s); };
auto double_parser = [](std::string_view s) { return csv::parse_double(s); };
auto int_parser = [](std::string_view s) { return csv::parse_int(s); };
auto bool_parser = [](std::string_view s) { return csv::parse_bool(s); };

std::string opt_double(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string{};
}
template <typename I>
std::string opt_int(const std::optional<I>& v) {
  return v ? std::to_string(*v) : std::string{};
}
std::string bool_text(bool b) { return b ? "true" : "false"; }
std::string opt_bool(const std::optional<bool>& v) { return v ? bool_text(*v) : std::string{}; }

}  // namespace

std::string to_string(Gender g) { return g == Gender::female ? "female" : "male"; }

std::string to_string(DiscontinuationReason r) {
  switch (r) {
    case DiscontinuationReason::hepatotoxicity_grade3:
      return "hepatotoxicity_grade3";
    case DiscontinuationReason::hepatotoxicity_grade4:
      return "hepatotoxicity_grade4";
    case DiscontinuationReason::other:
      return "other";
  }
  return "other";
}

bool ParticipantRecord::visit_attended_at(int month) const {
  return visit_attended[month_index(kVisitMonths, month)];
}
std::optional<double> ParticipantRecord::peth_at(int month) const {
  return peth[month_index(kPethMonths, month)];
}
std::optional<int> ParticipantRecord::auditc_at(int month) const {
  return auditc[month_index(kAuditcMonths, month)];
}
std::optional<bool> ParticipantRecord::vl_detectable_at(int month) const {
  return vl_detectable[month_index(kVlMonths, month)];
}

FactorIndicators derive_factor_indicators(int arm) {
  switch (arm) {
    case 1:
      return {0, 0};
    case 2:
      return {1, 0};
    case 3:
      return {0, 1};
    case 4:
      return {1, 1};
    default:
      throw std::invalid_argument("arm must be in {1,2,3,4}, got " + std::to_string(arm));
  }
}

int arm_from_indicators(FactorIndicators f) {
  if ((f.alcohol_int != 0 && f.alcohol_int != 1) || (f.adherence_int != 0 && f.adherence_int != 1)) {
    throw std::invalid_argument("factor indicators must be binary");
  }
  return 1 + f.alcohol_int + 2 * f.adherence_int;
}

std::unordered_map<std::string, std::vector<DateTime>> TrialDataset::events_by_participant() const {
  std::unordered_map<std::string, std::vector<DateTime>> out;
  for (const auto& e : mems_events) out[e.participant_id].push_back(e.opening_timestamp);
  for (auto& [id, times] : out) std::sort(times.begin(), times.end());
  return out;
}

const ParticipantRecord* TrialDataset::find(const std::string& participant_id) const {
  for (const auto& p : participants) {
    if (p.participant_id == participant_id) return &p;
  }
  return nullptr;
}

std::vector<ParticipantRecord> read_participants(std::istream& in, const AnalysisConfig& config,
                                                 const std::string& name) {
  std::vector<Diagnostic> diags;
  RowParser p(name, diags);
  csv::Reader reader(in);
  std::vector<ParticipantRecord> out;
  try {
    const auto header = read_header(reader, p);
    if (!header || !p.header(*header, kParticipantColumns, kOptionalParticipantColumns)) {
      throw LoadError(std::move(diags));
    }
    std::size_t data_row = 0;
    while (auto row = reader.next()) {
      if (blank(*row)) continue;
      ++data_row;
      if (!p.begin_row(*row, data_row)) continue;
      ParticipantRecord r;
      r.participant_id = std::string(p.raw("participant_id"));
      if (r.participant_id.empty()) p.error("participant_id", "required value is empty");
      r.site = std::string(p.raw("site"));
      if (r.site.empty()) p.error("site", "required value is empty");
      r.gender = p.required_cell<Gender>("gender", parse_gender, "female|male", Gender::female);
      r.arm = p.required_cell<int>("arm", int_parser, "integer", 1);
      if (!p.raw("arm").empty() && csv::parse_int(p.raw("arm")) &&
          (r.arm < 1 || r.arm > 4)) {
        p.error("arm", "constraint violated: arm must be in {1,2,3,4}, got " +
                           std::string(p.raw("arm")));
      }
      r.enrollment_date = p.required_cell<Date>("enrollment_date", date_parser, "YYYY-MM-DD", Date{});
      r.scheduled_inh_completion_date = p.required_cell<Date>(
          "scheduled_inh_completion_date", date_parser, "YYYY-MM-DD", Date{});
      r.discontinued_inh = p.required_cell<bool>("discontinued_inh", bool_parser, "boolean", false);
      r.discontinuation_date = p.optional_cell<Date>("discontinuation_date", date_parser, "YYYY-MM-DD");
      r.discontinuation_reason = p.optional_cell<DiscontinuationReason>(
          "discontinuation_reason", parse_reason,
          "hepatotoxicity_grade3|hepatotoxicity_grade4|other");
      r.prescribed_doses = p.optional_cell<int>("prescribed_doses", int_parser, "integer")
                               .value_or(config.cutoffs.default_prescribed_doses);
      for (std::size_t i = 0; i < kVisitMonths.size(); ++i) {
        const auto col = "visit" + std::to_string(kVisitMonths[i]) + "_attended";
        r.visit_attended[i] = p.required_cell<bool>(col, bool_parser, "boolean", false);
      }
      for (std::size_t i = 0; i < kPethMonths.size(); ++i) {
        r.peth[i] = p.optional_cell<double>("peth_" + std::to_string(kPethMonths[i]),
                                            double_parser, "number");
      }
      for (std::size_t i = 0; i < kAuditcMonths.size(); ++i) {
        r.auditc[i] = p.optional_cell<int>("auditc_" + std::to_string(kAuditcMonths[i]),
                                           int_parser, "integer");
      }
      for (std::size_t i = 0; i < kVlMonths.size(); ++i) {
        const auto m = std::to_string(kVlMonths[i]);
        r.vl_detectable[i] = p.optional_cell<bool>("vl" + m + "_detectable", bool_parser, "boolean");
        const auto copies_col = "vl" + m + "_copies";
        if (p.has(copies_col)) {
          const auto copies = p.optional_cell<double>(copies_col, double_parser, "number");
          if (copies) {
            const bool detectable = *copies >= config.vl_detection_limit;
            if (r.vl_detectable[i] && *r.vl_detectable[i] != detectable) {
              p.error(copies_col, "contradicts vl" + m + "_detectable");
            }
            r.vl_detectable[i] = detectable;
          }
        }
      }
      r.active_tb = p.required_cell<bool>("active_tb", bool_parser, "boolean", false);
      r.drink_days_30 = p.optional_cell<int>("drink_days_30", int_parser, "integer");
      r.heavy_days_14 = p.optional_cell<int>("heavy_days_14", int_parser, "integer");
      r.timepref_score = p.optional_cell<double>("timepref_score", double_parser, "number");
      r.riskpref_score = p.optional_cell<double>("riskpref_score", double_parser, "number");
      r.readiness_score = p.optional_cell<double>("readiness_score", double_parser, "number");
      if (p.has("mems_available")) {
        r.mems_available = p.optional_cell<bool>("mems_available", bool_parser, "boolean");
      }
      out.push_back(std::move(r));
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const LoadError*>(&e)) throw;
    p.error(0, "", e.what());
  }
  if (!diags.empty()) throw LoadError(std::move(diags));
  return out;
}

std::vector<MemsEvent> read_mems(std::istream& in, const std::string& name) {
  std::vector<Diagnostic> diags;
  RowParser p(name, diags);
  csv::Reader reader(in);
  std::vector<MemsEvent> out;
  try {
    const auto header = read_header(reader, p);
    if (!header || !p.header(*header, {"participant_id", "opening_timestamp"}, {})) {
      throw LoadError(std::move(diags));
    }
    std::size_t data_row = 0;
    while (auto row = reader.next()) {
      if (blank(*row)) continue;
      ++data_row;
      if (!p.begin_row(*row, data_row)) continue;
      MemsEvent e;
      e.participant_id = std::string(p.raw("participant_id"));
      if (e.participant_id.empty()) p.error("participant_id", "required value is empty");
      e.opening_timestamp = p.required_cell<DateTime>(
          "opening_timestamp", [](std::string_view s) { return parse_datetime(s); },
          "YYYY-MM-DDTHH:MM:SS", DateTime{});
      out.push_back(std::move(e));
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const LoadError*>(&e)) throw;
    p.error(0, "", e.what());
  }
  if (!diags.empty()) throw LoadError(std::move(diags));
  return out;
}

std::vector<ScreenedRecord> read_screened(std::istream& in, std::vector<std::string>& columns,
                                          const std::string& name) {
  std::vector<Diagnostic> diags;
  RowParser p(name, diags);
  csv::Reader reader(in);
  std::vector<ScreenedRecord> out;
  try {
    const auto header = read_header(reader, p);
    if (!header || !p.header(*header, {"screening_id"}, {}, /*allow_extra=*/true)) {
      throw LoadError(std::move(diags));
    }
    columns.clear();
    for (const auto& col : header->fields) {
      if (col != "screening_id") columns.push_back(col);
    }
    std::size_t data_row = 0;
    while (auto row = reader.next()) {
      if (blank(*row)) continue;
      ++data_row;
      if (!p.begin_row(*row, data_row)) continue;
      ScreenedRecord s;
      s.screening_id = std::string(p.raw("screening_id"));
      for (const auto& col : columns) s.values[col] = std::string(p.raw(col));
      out.push_back(std::move(s));
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const LoadError*>(&e)) throw;
    p.error(0, "", e.what());
  }
  if (!diags.empty()) throw LoadError(std::move(diags));
  return out;
}

TrialDataset assemble_dataset(std::vector<ParticipantRecord> participants,
                              std::vector<MemsEvent> events) {
  std::vector<Diagnostic> diags;
  std::unordered_map<std::string, std::size_t> first_row;
  for (std::size_t i = 0; i < participants.size(); ++i) {
    const auto [it, inserted] = first_row.emplace(participants[i].participant_id, i + 1);
    if (!inserted) {
      diags.push_back({"participants.csv", i + 1, "participant_id",
                       "duplicate participant_id '" + participants[i].participant_id +
                           "' (first seen on row " + std::to_string(it->second) + ")"});
    }
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!first_row.count(events[i].participant_id)) {
      diags.push_back({"mems.csv", i + 1, "participant_id",
                       "orphan MEMS event: unknown participant_id '" +
                           events[i].participant_id + "'"});
    }
  }
  if (!diags.empty()) throw LoadError(std::move(diags));
  TrialDataset ds;
  ds.participants = std::move(participants);
  ds.mems_events = std::move(events);
  return ds;
}

TrialDataset load_trial_data(const std::filesystem::path& participants_path,
                             const std::filesystem::path& mems_path,
                             const AnalysisConfig& config,
                             const std::optional<std::filesystem::path>& screened_path) {
  auto open = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw LoadError({Diagnostic{path.string(), 0, "", "cannot open file"}});
    }
    return in;
  };
  auto pin = open(participants_path);
  auto participants = read_participants(pin, config, participants_path.filename().string());
  auto min = open(mems_path);
  auto events = read_mems(min, mems_path.filename().string());
  TrialDataset ds = assemble_dataset(std::move(participants), std::move(events));
  if (screened_path) {
    auto sin = open(*screened_path);
    ds.screened_declined = read_screened(sin, ds.screened_columns,
                                         screened_path->filename().string());
  }
  return ds;
}

void write_participants(std::ostream& out, const std::vector<ParticipantRecord>& participants) {
  const bool with_mems_flag = std::any_of(participants.begin(), participants.end(),
                                          [](const auto& p) { return p.mems_available.has_value(); });
  auto header = kParticipantColumns;
  if (with_mems_flag) header.push_back("mems_available");
  csv::write_row(out, header);
  for (const auto& r : participants) {
    std::vector<std::string> f{
        r.participant_id,
        r.site,
        to_string(r.gender),
        std::to_string(r.arm),
        format_date(r.enrollment_date),
        format_date(r.scheduled_inh_completion_date),
        bool_text(r.discontinued_inh),
        r.discontinuation_date ? format_date(*r.discontinuation_date) : std::string{},
        r.discontinuation_reason ? to_string(*r.discontinuation_reason) : std::string{},
        std::to_string(r.prescribed_doses),
        bool_text(r.visit_attended[0]),
        bool_text(r.visit_attended[1]),
        bool_text(r.visit_attended[2]),
        opt_double(r.peth[0]),
        opt_double(r.peth[1]),
        opt_double(r.peth[2]),
        opt_double(r.peth[3]),
        opt_int(r.auditc[0]),
        opt_int(r.auditc[1]),
        opt_int(r.auditc[2]),
        opt_bool(r.vl_detectable[0]),
        opt_bool(r.vl_detectable[1]),
        bool_text(r.active_tb),
        opt_int(r.drink_days_30),
        opt_int(r.heavy_days_14),
        opt_double(r.timepref_score),
        opt_double(r.riskpref_score),
        opt_double(r.readiness_score),
    };
    if (with_mems_flag) f.push_back(opt_bool(r.mems_available));
    csv::write_row(out, f);
  }
}

void write_mems(std::ostream& out, const std::vector<MemsEvent>& events) {
  csv::write_row(out, {"participant_id", "opening_timestamp"});
  for (const auto& e : events) {
    csv::write_row(out, {e.participant_id, format_datetime(e.opening_timestamp)});
  }
}

std::vector<std::string> resolve_sites(const TrialDataset& dataset, const AnalysisConfig& config) {
  if (!config.sites.empty()) return config.sites;
  std::vector<std::string> sites;
  for (const auto& p : dataset.participants) {
    if (std::find(sites.begin(), sites.end(), p.site) == sites.end()) sites.push_back(p.site);
  }
  return sites;
}

ValidationReport validate(const TrialDataset& dataset, const AnalysisConfig& config) {
  ValidationReport rep;
  auto err = [&](const std::string& id, const std::string& field, const std::string& msg) {
    rep.errors.push_back({id, field, msg});
  };
  auto warn = [&](const std::string& id, const std::string& field, const std::string& msg) {
    rep.warnings.push_back({id, field, msg});
  };

  std::unordered_set<std::string> seen;
  std::unordered_map<std::string, const ParticipantRecord*> by_id;
  for (const auto& p : dataset.participants) {
    const auto& id = p.participant_id;
    if (!seen.insert(id).second) err(id, "participant_id", "duplicate participant_id");
    by_id.emplace(id, &p);
    if (p.arm < 1 || p.arm > 4) err(id, "arm", "arm must be in {1,2,3,4}");
    if (!config.sites.empty() &&
        std::find(config.sites.begin(), config.sites.end(), p.site) == config.sites.end()) {
      err(id, "site", "site '" + p.site + "' is not a configured study site");
    }
    if (p.discontinued_inh && !p.discontinuation_date) {
      err(id, "discontinuation_date", "discontinued_inh is true but discontinuation_date is missing");
    }
    if (!p.discontinued_inh && p.discontinuation_date) {
      err(id, "discontinuation_date", "discontinuation_date present but discontinued_inh is false");
    }
    if (!p.discontinued_inh && p.discontinuation_reason) {
      warn(id, "discontinuation_reason", "reason present but discontinued_inh is false");
    }
    if (p.prescribed_doses <= 0 || p.prescribed_doses > 180) {
      err(id, "prescribed_doses", "prescribed_doses must be in 1..180");
    }
    if (p.scheduled_inh_completion_date < p.enrollment_date) {
      err(id, "scheduled_inh_completion_date", "date precedes enrollment_date");
    }
    if (p.discontinuation_date && *p.discontinuation_date < p.enrollment_date) {
      err(id, "discontinuation_date", "date precedes enrollment_date");
    }
    for (int m : kPethMonths) {
      const auto v = p.peth_at(m);
      const auto col = "peth_" + std::to_string(m);
      if (v && *v < 0.0) err(id, col, "PEth must be non-negative");
      if (v && m != 0 && !p.visit_attended_at(m)) {
        warn(id, col, "value present but visit" + std::to_string(m) + "_attended is false");
      }
    }
    for (int m : kAuditcMonths) {
      const auto v = p.auditc_at(m);
      const auto col = "auditc_" + std::to_string(m);
      if (v && (*v < 0 || *v > 12)) err(id, col, "AUDIT-C must be in 0..12");
      if (v && m != 0 && !p.visit_attended_at(m)) {
        warn(id, col, "value present but visit" + std::to_string(m) + "_attended is false");
      }
    }
    for (int m : kVlMonths) {
      if (p.vl_detectable_at(m) && !p.visit_attended_at(m)) {
        warn(id, "vl" + std::to_string(m) + "_detectable",
             "value present but visit" + std::to_string(m) + "_attended is false");
      }
    }
    if (p.drink_days_30 && (*p.drink_days_30 < 0 || *p.drink_days_30 > 30)) {
      err(id, "drink_days_30", "must be in 0..30");
    }
    if (p.heavy_days_14 && (*p.heavy_days_14 < 0 || *p.heavy_days_14 > 14)) {
      err(id, "heavy_days_14", "must be in 0..14");
    }
  }
  for (const auto& e : dataset.mems_events) {
    const auto it = by_id.find(e.participant_id);
    if (it == by_id.end()) {
      err(e.participant_id, "mems", "orphan MEMS event");
    } else if (date_of(e.opening_timestamp) < it->second->enrollment_date) {
      err(e.participant_id, "opening_timestamp",
          "opening " + format_datetime(e.opening_timestamp) + " precedes enrollment_date");
    }
  }
  return rep;
}

}  // namespace dipt
