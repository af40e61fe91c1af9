#pragma once

// Descriptive tables and two-group comparisons of baseline characteristics.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dipt/data_model.hpp"
#include "dipt/inference.hpp"
#include "dipt/outcomes.hpp"

namespace dipt {

// Linear interpolation between order statistics: position q*(n-1).
double percentile_linear(std::span<const double> sorted, double q);

struct ContinuousSummary {
  std::size_t n = 0;
  std::size_t n_missing = 0;
  std::optional<double> mean;
  std::optional<double> sd;  // undefined for n < 2
  std::optional<double> p0, p25, p50, p75, p100;
};

struct CategoricalSummary {
  std::size_t n = 0;
  std::size_t n_missing = 0;
  std::vector<std::string> levels;
  std::vector<std::size_t> counts;
  std::vector<double> proportions;  // of non-missing
};

ContinuousSummary summarize_continuous(std::span<const std::optional<double>> values);
// `levels` fixes the level order; values outside it are appended in sorted order.
CategoricalSummary summarize_categorical(std::span<const std::optional<std::string>> values,
                                         const std::vector<std::string>& levels = {});

struct VariableData {
  std::string name;
  bool continuous = true;
  std::vector<std::optional<double>> numeric;
  std::vector<std::optional<std::string>> categorical;
  std::vector<std::string> levels;  // categorical level order

  std::size_t size() const { return continuous ? numeric.size() : categorical.size(); }
};

// Categorical names (gender, site, arm, covid_cohort) give categorical data,
// other known variables numeric data. Throws ConfigError for unknown names.
VariableData collect_variable(const TrialDataset& dataset, const std::vector<DerivedOutcomes>& derived,
                              const std::string& name);

struct DescriptiveRow {
  std::string variable;
  bool continuous = true;
  std::vector<ContinuousSummary> continuous_by_group;    // aligned with groups
  std::vector<CategoricalSummary> categorical_by_group;
};

struct DescriptiveTable {
  std::vector<std::string> groups;  // "overall" first
  std::vector<DescriptiveRow> rows;
};

// group_of[i] names the group of row i; nullopt rows only count in "overall".
DescriptiveTable grouped_table(const std::vector<VariableData>& variables,
                               const std::vector<std::optional<std::string>>& group_of,
                               const std::vector<std::string>& group_order);

// Overall and by randomization arm (arm1..arm4). No tests across arms.
DescriptiveTable descriptive_table(const TrialDataset& dataset,
                                   const std::vector<DerivedOutcomes>& derived,
                                   const std::vector<std::string>& variables);

struct ComparisonTest {
  std::string variable;
  std::string level;  // categorical level tested against the rest; empty for continuous
  std::optional<TestResult> test;
  std::string error;
};

struct GroupComparison {
  std::string group_a;
  std::string group_b;
  DescriptiveTable table;
  std::vector<ComparisonTest> tests;
  std::vector<std::string> notes;
};

// Pooled two-sample t-test for continuous variables; for categorical ones
// a 2x2 Fisher test of each level against the rest.
GroupComparison compare_groups(const std::vector<VariableData>& variables,
                               const std::vector<std::optional<std::string>>& group_of,
                               const std::string& group_a, const std::string& group_b);

// Outcome-observed vs outcome-missing participants.
GroupComparison missingness_comparison(const TrialDataset& dataset,
                                       const std::vector<DerivedOutcomes>& derived,
                                       const std::string& outcome_name,
                                       const std::vector<std::string>& covariates);

// Enrolled participants vs screened decliners on the screening columns.
// Columns that are not participant variables are skipped with a note.
// Returns nullopt when there is no screening file.
std::optional<GroupComparison> enrollment_comparison(const TrialDataset& dataset,
                                                     const std::vector<DerivedOutcomes>& derived);

struct TimepointProportion {
  int month = 0;
  std::string group;  // overall, arm1..arm4
  std::size_t n = 0;  // participants with the visit-level outcome known
  std::size_t successes = 0;
  std::optional<double> proportion;
};

// No heavy drinking at a single visit (PEth and AUDIT-C both below cutoffs),
// months 3 and 6, overall and by arm.
std::vector<TimepointProportion> timepoint_proportions(const TrialDataset& dataset,
                                                       const OutcomeCutoffs& cutoffs);

}  // namespace dipt
