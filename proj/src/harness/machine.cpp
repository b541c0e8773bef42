#include "lbm/harness/machine.hpp"

#include <unistd.h>

#include <fstream>
#include <string>
#include <thread>

#include "lbm/memory.hpp"

namespace lbm::harness {

namespace {

std::string cpu_model_name() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) break;
      const auto start = line.find_first_not_of(' ', colon + 1);
      return start == std::string::npos ? std::string() : line.substr(start);
    }
  }
  return "unknown";
}

}  // namespace

MachineInfo probe_machine() {
  MachineInfo info;
  info.cpu_model = cpu_model_name();
  char host[256] = {};
  if (::gethostname(host, sizeof host - 1) == 0) info.hostname = host;
  const long online = ::sysconf(_SC_NPROCESSORS_ONLN);
  info.logical_cpus = online > 0 ? static_cast<int>(online)
                                 : static_cast<int>(std::thread::hardware_concurrency());
  info.numa_nodes = numa_node_count();
  return info;
}

nlohmann::json to_json(const MachineInfo& info) {
  return {{"cpu_model", info.cpu_model},
          {"hostname", info.hostname},
          {"logical_cpus", info.logical_cpus},
          {"numa_nodes", info.numa_nodes},
          {"dram_available", info.dram_available}};
}

MachineInfo machine_from_json(const nlohmann::json& j) {
  MachineInfo info;
  info.cpu_model = j.value("cpu_model", std::string("unknown"));
  info.hostname = j.value("hostname", std::string());
  info.logical_cpus = j.value("logical_cpus", 0);
  info.numa_nodes = j.value("numa_nodes", 0);
  info.dram_available = j.value("dram_available", false);
  return info;
}

}  // namespace lbm::harness
