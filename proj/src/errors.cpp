#include "dipt/errors.hpp"

namespace dipt {

std::string Diagnostic::to_string() const {
  std::string out = file;
  if (row > 0) out += ":row " + std::to_string(row);
  if (!column.empty()) out += ":" + column;
  out += ": " + message;
  return out;
}

namespace {
std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out = std::to_string(diags.size()) + " data error(s)";
  constexpr std::size_t kShown = 20;
  for (std::size_t i = 0; i < diags.size() && i < kShown; ++i) {
    out += "\n  " + diags[i].to_string();
  }
  if (diags.size() > kShown) out += "\n  ...";
  return out;
}
}  // namespace

LoadError::LoadError(std::vector<Diagnostic> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

const char* to_string(FitFailure kind) {
  switch (kind) {
    case FitFailure::non_convergence:
      return "non_convergence";
    case FitFailure::rank_deficient:
      return "rank_deficient";
    case FitFailure::separation:
      return "separation";
    case FitFailure::degenerate_moderator:
      return "degenerate_moderator";
    case FitFailure::invalid_input:
      return "invalid_input";
  }
  return "unknown";
}

FitError::FitError(FitFailure kind, const std::string& detail)
    : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace dipt
