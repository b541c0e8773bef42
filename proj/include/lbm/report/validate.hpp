#pragma once

#include <functional>
#include <string>
#include <vector>

namespace lbm::report {

struct SuiteResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

SuiteResult suite_layout_equivalence();
SuiteResult suite_propagate_translation();
SuiteResult suite_bgk_conservation();
SuiteResult suite_energy_integration();
SuiteResult suite_metric_identities();
SuiteResult suite_thread_determinism();

/// All correctness suites in order; `progress` sees each result as it finishes.
std::vector<SuiteResult> run_validation(
    const std::function<void(const SuiteResult&)>& progress = {});

}  // namespace lbm::report
