#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace lbm::harness {

struct CpuTopology {
  int cpu = 0;
  int package = 0;
  int core = 0;
};

/// CPUs in the process affinity mask at first use, with their package/core ids.
std::vector<CpuTopology> allowed_cpus();

/// One CPU per physical core first (ordered by package, core), then the
/// second SMT sibling of each core, and so on.
std::vector<int> placement_order(std::vector<CpuTopology> cpus);

struct AffinityReport {
  int requested = 0;
  std::vector<int> planned;
  std::vector<int> achieved;  // CPU each worker actually runs on, -1 if unpinned
  bool honored = false;
  std::string note;
};

/// Pins the OpenMP worker team of size `threads`, worker i on planned[i].
/// Throws std::invalid_argument for threads < 1 and std::runtime_error
/// ("oversubscription refused") when threads exceed the allowed CPUs.
AffinityReport pin_workers(int threads);

nlohmann::json to_json(const AffinityReport& report);

}  // namespace lbm::harness
