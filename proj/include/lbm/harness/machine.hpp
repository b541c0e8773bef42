#pragma once

#include <string>

#include <json.hpp>

namespace lbm::harness {

struct MachineInfo {
  std::string cpu_model;
  std::string hostname;
  int logical_cpus = 0;
  int numa_nodes = 0;
  bool dram_available = false;

  friend bool operator==(const MachineInfo&, const MachineInfo&) = default;
};

/// `dram_available` is left false; callers fill it from the energy backend.
MachineInfo probe_machine();

nlohmann::json to_json(const MachineInfo& info);
MachineInfo machine_from_json(const nlohmann::json& j);

}  // namespace lbm::harness
