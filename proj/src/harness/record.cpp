#include "lbm/harness/record.hpp"

#include <bit>
#include <chrono>
#include <fstream>
#include <stdexcept>

#include <fmt/chrono.h>
#include <fmt/format.h>

namespace lbm::harness {

using energy::PowerDomain;

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Skipped: return "skipped";
    case RunStatus::Error: return "error";
  }
  return "error";
}

RunStatus parse_run_status(std::string_view text) {
  if (text == "ok") return RunStatus::Ok;
  if (text == "skipped") return RunStatus::Skipped;
  if (text == "error") return RunStatus::Error;
  throw std::invalid_argument(fmt::format("invalid run status '{}'", text));
}

const KernelMetrics* RunRecord::kernel(std::string_view name) const {
  for (const auto& k : kernels) {
    if (k.kernel == name) return &k;
  }
  return nullptr;
}

std::string checksum_hex(double checksum) {
  return fmt::format("{:016x}", std::bit_cast<std::uint64_t>(checksum));
}

namespace {

nlohmann::json domain_map(const std::map<PowerDomain, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [d, v] : m) j[energy::to_string(d)] = v;
  return j;
}

std::map<PowerDomain, double> domain_map_from(const nlohmann::json& j) {
  std::map<PowerDomain, double> m;
  for (const auto& [k, v] : j.items()) m[energy::parse_domain(k)] = v.get<double>();
  return m;
}

}  // namespace

nlohmann::json to_json(const KernelMetrics& m) {
  nlohmann::json j = {
      {"kernel", m.kernel},
      {"sites", m.sites},
      {"iterations", m.iterations},
      {"wall_ns_total", m.wall_ns_total},
      {"wall_ns_min", m.wall_ns_min},
      {"wall_ns_max", m.wall_ns_max},
      {"ns_per_site", m.ns_per_site},
      {"p_avg_w", domain_map(m.p_avg_w)},
      {"p_avg_w_summed", m.p_avg_w_summed},
      {"e_s_joules", m.e_s_joules},
      {"e_s_per_site_j", m.e_s_per_site_j},
      {"e_s_per_site_j_domain", domain_map(m.e_s_per_site_j_domain)},
  };
  j["bandwidth_gbs"] = m.bandwidth_gbs ? nlohmann::json(*m.bandwidth_gbs) : nlohmann::json();
  return j;
}

KernelMetrics kernel_metrics_from_json(const nlohmann::json& j) {
  KernelMetrics m;
  m.kernel = j.at("kernel").get<std::string>();
  m.sites = j.at("sites").get<std::int64_t>();
  m.iterations = j.at("iterations").get<int>();
  m.wall_ns_total = j.at("wall_ns_total").get<std::int64_t>();
  m.wall_ns_min = j.value("wall_ns_min", m.wall_ns_total);
  m.wall_ns_max = j.value("wall_ns_max", m.wall_ns_total);
  m.ns_per_site = j.at("ns_per_site").get<double>();
  m.p_avg_w = domain_map_from(j.at("p_avg_w"));
  m.p_avg_w_summed = j.at("p_avg_w_summed").get<double>();
  m.e_s_joules = j.at("e_s_joules").get<double>();
  m.e_s_per_site_j = j.at("e_s_per_site_j").get<double>();
  m.e_s_per_site_j_domain = domain_map_from(j.value("e_s_per_site_j_domain", nlohmann::json::object()));
  if (j.contains("bandwidth_gbs") && !j.at("bandwidth_gbs").is_null()) {
    m.bandwidth_gbs = j.at("bandwidth_gbs").get<double>();
  }
  return m;
}

nlohmann::json to_json(const RunRecord& record) {
  nlohmann::json kernels = nlohmann::json::array();
  for (const auto& k : record.kernels) kernels.push_back(to_json(k));
  return {
      {"config", to_json(record.config)},
      {"status", to_string(record.status)},
      {"reason", record.reason},
      {"backend", record.backend},
      {"kernels", kernels},
      {"checksum", record.checksum},
      {"checksum_hex", checksum_hex(record.checksum)},
      {"machine", to_json(record.machine)},
      {"affinity", record.affinity},
      {"timestamp", record.timestamp},
      {"warnings", record.warnings},
  };
}

RunRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  RunRecord r;
  r.config = config_from_json(j.at("config"));
  r.status = parse_run_status(j.value("status", std::string("ok")));
  r.reason = j.value("reason", std::string());
  r.backend = j.value("backend", std::string());
  for (const auto& k : j.value("kernels", nlohmann::json::array())) {
    r.kernels.push_back(kernel_metrics_from_json(k));
  }
  r.checksum = j.value("checksum", 0.0);
  if (j.contains("checksum_hex") && checksum_hex(r.checksum) != j.at("checksum_hex")) {
    throw std::invalid_argument("checksum and checksum_hex disagree");
  }
  r.machine = machine_from_json(j.value("machine", nlohmann::json::object()));
  r.affinity = j.value("affinity", nlohmann::json::object());
  r.timestamp = j.value("timestamp", std::string());
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

void append_jsonl(const std::string& path, const RunRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for append", path));
  out << to_json(record).dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

}  // namespace lbm::harness
