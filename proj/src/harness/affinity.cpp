#include "lbm/harness/affinity.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>
#include <omp.h>

namespace lbm::harness {

namespace {

int read_int(const std::string& path, int fallback) {
  std::ifstream in(path);
  int v = fallback;
  if (!(in >> v)) return fallback;
  return v;
}

}  // namespace

std::vector<CpuTopology> allowed_cpus() {
  static const std::vector<CpuTopology> cached = [] {
    std::vector<CpuTopology> out;
    cpu_set_t set;
    CPU_ZERO(&set);
    if (sched_getaffinity(0, sizeof set, &set) != 0) return out;
    for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu) {
      if (!CPU_ISSET(cpu, &set)) continue;
      const std::string base = fmt::format("/sys/devices/system/cpu/cpu{}/topology/", cpu);
      out.push_back({cpu, read_int(base + "physical_package_id", 0),
                     read_int(base + "core_id", cpu)});
    }
    return out;
  }();
  return cached;
}

std::vector<int> placement_order(std::vector<CpuTopology> cpus) {
  std::sort(cpus.begin(), cpus.end(), [](const CpuTopology& a, const CpuTopology& b) {
    return std::tie(a.package, a.core, a.cpu) < std::tie(b.package, b.core, b.cpu);
  });
  // rank of each CPU among the SMT siblings of its core
  std::map<std::pair<int, int>, int> seen;
  std::vector<std::pair<int, CpuTopology>> ranked;
  for (const auto& c : cpus) ranked.emplace_back(seen[{c.package, c.core}]++, c);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> order;
  for (const auto& [rank, c] : ranked) order.push_back(c.cpu);
  return order;
}

AffinityReport pin_workers(int threads) {
  if (threads < 1) throw std::invalid_argument("pin_workers: threads must be >= 1");
  AffinityReport report;
  report.requested = threads;
  const std::vector<int> order = placement_order(allowed_cpus());
  if (order.empty()) {
    report.achieved.assign(static_cast<std::size_t>(threads), -1);
    report.note = "affinity control unavailable; workers left unpinned";
    return report;
  }
  if (threads > static_cast<int>(order.size())) {
    throw std::runtime_error(fmt::format(
        "oversubscription refused: {} workers requested, {} CPUs available", threads,
        order.size()));
  }
  report.planned.assign(order.begin(), order.begin() + threads);
  report.achieved.assign(static_cast<std::size_t>(threads), -1);

  omp_set_dynamic(0);
  int team = 0;
#pragma omp parallel num_threads(threads)
  {
    const int id = omp_get_thread_num();
#pragma omp single
    team = omp_get_num_threads();
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(report.planned[static_cast<std::size_t>(id)], &set);
    pthread_setaffinity_np(pthread_self(), sizeof set, &set);
    cpu_set_t actual;
    CPU_ZERO(&actual);
    if (pthread_getaffinity_np(pthread_self(), sizeof actual, &actual) == 0 &&
        CPU_COUNT(&actual) == 1) {
      for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu) {
        if (CPU_ISSET(cpu, &actual)) report.achieved[static_cast<std::size_t>(id)] = cpu;
      }
    }
  }
  report.honored = team == threads && report.achieved == report.planned;
  if (!report.honored) report.note = "requested placement not achieved";
  return report;
}

nlohmann::json to_json(const AffinityReport& report) {
  return {{"requested", report.requested},
          {"planned", report.planned},
          {"achieved", report.achieved},
          {"honored", report.honored},
          {"note", report.note}};
}

}  // namespace lbm::harness
