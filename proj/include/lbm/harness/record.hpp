#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbm/energy/backend.hpp"
#include "lbm/harness/config.hpp"
#include "lbm/harness/machine.hpp"

namespace lbm::harness {

/// Per-kernel metrics of the reported (median) repetition.
struct KernelMetrics {
  std::string kernel;  // "propagate" or "collide"
  std::int64_t sites = 0;
  int iterations = 0;
  std::int64_t wall_ns_total = 0;
  std::int64_t wall_ns_min = 0;
  std::int64_t wall_ns_max = 0;
  double ns_per_site = 0.0;
  std::map<energy::PowerDomain, double> p_avg_w;
  double p_avg_w_summed = 0.0;
  double e_s_joules = 0.0;
  double e_s_per_site_j = 0.0;
  std::map<energy::PowerDomain, double> e_s_per_site_j_domain;
  std::optional<double> bandwidth_gbs;

  friend bool operator==(const KernelMetrics&, const KernelMetrics&) = default;
};

enum class RunStatus { Ok, Skipped, Error };
std::string to_string(RunStatus status);
RunStatus parse_run_status(std::string_view text);

struct RunRecord {
  ExperimentConfig config;
  RunStatus status = RunStatus::Ok;
  std::string reason;
  std::string backend;
  std::vector<KernelMetrics> kernels;
  double checksum = 0.0;
  MachineInfo machine;
  nlohmann::json affinity = nlohmann::json::object();
  std::string timestamp;
  std::vector<std::string> warnings;

  [[nodiscard]] const KernelMetrics* kernel(std::string_view name) const;
};

/// Bit pattern of the checksum, 16 lowercase hex digits.
std::string checksum_hex(double checksum);

nlohmann::json to_json(const KernelMetrics& m);
KernelMetrics kernel_metrics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

/// Appends one JSON line and flushes, so a crash loses at most the current record.
void append_jsonl(const std::string& path, const RunRecord& record);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace lbm::harness
