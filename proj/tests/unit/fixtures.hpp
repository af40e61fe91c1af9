#pragma once

#include <string>
#include <vector>

#include "dipt/config.hpp"
#include "dipt/data_model.hpp"
#include "dipt/date.hpp"

namespace fixtures {

inline dipt::Date day(int y, unsigned m, unsigned d) {
  return dipt::Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

// Fully observed, no heavy drinking, not discontinued.
inline dipt::ParticipantRecord participant(const std::string& id, int arm = 1,
                                           dipt::Gender g = dipt::Gender::female,
                                           const std::string& site = "site_a") {
  dipt::ParticipantRecord p;
  p.participant_id = id;
  p.site = site;
  p.gender = g;
  p.arm = arm;
  p.enrollment_date = day(2019, 1, 10);
  p.scheduled_inh_completion_date = day(2019, 7, 9);
  p.visit_attended = {true, true, true};
  p.peth = {120.0, 10.0, 12.0, 15.0};
  p.auditc = {7, 1, 1};
  p.vl_detectable = {false, false};
  p.drink_days_30 = 2;
  p.heavy_days_14 = 0;
  p.timepref_score = 0.1;
  p.riskpref_score = -0.2;
  p.readiness_score = 5.0;
  return p;
}

// n participants cycling through arms 1..4.
inline dipt::TrialDataset balanced(std::size_t n) {
  dipt::TrialDataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = participant("P" + std::to_string(i + 1), static_cast<int>(i % 4) + 1,
                         (i / 4) % 2 ? dipt::Gender::male : dipt::Gender::female);
    ds.participants.push_back(p);
  }
  return ds;
}

}  // namespace fixtures
