#pragma once

#include <functional>
#include <string>
#include <vector>

namespace mechsq::validation {

enum class Level { fast, full };

Level parse_level(const std::string& name);
std::string to_string(Level level);

/// One measured quantity against its tolerance.
struct Measurement {
  std::string label;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CheckResult {
  int criterion = 0;
  std::string name;
  std::vector<Measurement> measurements;
  /// set when the check could not run to completion
  std::string error;
  std::string note;
  double seconds = 0.0;

  bool passed() const;
  /// "PASS  3  n_th,max ...: label 0.1 <= 2; ... (1.2 s)"
  std::string summary() const;
};

struct Check {
  int criterion;
  std::string name;
  std::function<CheckResult(Level)> run;
};

/// The acceptance checks, one per criterion, in order.
const std::vector<Check>& acceptance_checks();

/// Runs every check at `level`, invoking `on_result` as each finishes.
std::vector<CheckResult> run_checks(Level level, const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace mechsq::validation
