#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlfd/verify.hpp"

namespace nlfd {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;
  double seconds = 0.0;
  std::vector<CheckRecord> records;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  /// When nonempty, every record is written below output_dir/<criterion>/.
  std::string output_dir;
  /// Restricts the run to these criterion ids (all when empty).
  std::vector<int> only;
  /// Called after each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

/// "acceptance" and "quick".
const std::vector<std::string>& suite_names();

/// Number of criteria in a suite; throws invalid_argument for an unknown name.
int suite_size(const std::string& name);

/// Runs a predefined suite.  Throws invalid_argument for an unknown name.
std::vector<CriterionResult> run_suite(const std::string& name, const SuiteOptions& options = {});

/// Stroock-Varopoulos companion h_eps(s) = sqrt(c (p-1)) int_0^s (r+eps)^{(p-2)/2} r^{(m-1)/2} dr.
double sv_companion(double s, double m, double p, double eps, double c);

}  // namespace nlfd
