#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dipt {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Diagnostic {
  std::string file;
  std::size_t row = 0;  // 1-based data row; 0 = header or whole file
  std::string column;
  std::string message;

  std::string to_string() const;
};

// Ingestion failure carrying every row-level problem found in one pass.
class LoadError : public Error {
 public:
  explicit LoadError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

enum class FitFailure {
  non_convergence,
  rank_deficient,
  separation,
  degenerate_moderator,
  invalid_input,
};

const char* to_string(FitFailure kind);

class FitError : public Error {
 public:
  FitError(FitFailure kind, const std::string& detail);
  FitFailure kind() const { return kind_; }

 private:
  FitFailure kind_;
};

// Raised by the pipeline layer for analyses that cannot run (e.g. an empty
// analysis population) as opposed to models that fail to fit.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace dipt
