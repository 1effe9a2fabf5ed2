#pragma once

#include <stdexcept>
#include <string>

namespace floodaudit {

// Exit codes reported by the CLI. Exceptions below map onto them 1:1.
enum class ExitCode : int {
  ok = 0,
  validation_error = 2,
  data_error = 3,
  numeric_error = 4,
};

// Bad configuration or CLI usage.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files, join mismatches, missing columns/values.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Degenerate inputs to a statistic (zero variance, rank deficiency, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline ExitCode exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return ExitCode::validation_error;
  if (dynamic_cast<const DataError*>(&e)) return ExitCode::data_error;
  if (dynamic_cast<const NumericError*>(&e)) return ExitCode::numeric_error;
  return ExitCode::data_error;
}

}  // namespace floodaudit
