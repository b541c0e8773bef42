#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbm/energy/backend.hpp"

namespace lbm::energy {

struct EnergySample {
  std::int64_t t_ns = 0;
  PowerDomain domain = PowerDomain::Package;
  std::uint64_t cumulative_uj = 0;

  friend bool operator==(const EnergySample&, const EnergySample&) = default;
};

struct Marker {
  std::int64_t t_ns = 0;
  std::string label;

  friend bool operator==(const Marker&, const Marker&) = default;
};

/// Raw counter samples and markers of one measurement session.
struct EnergyTrace {
  std::vector<PowerDomain> domains;
  std::map<PowerDomain, std::uint64_t> counter_max_uj;
  std::vector<EnergySample> samples;
  std::vector<Marker> markers;
  /// The sampler failed before the session ended.
  bool partial = false;
  /// Free-form capability notes, e.g. "dram:unavailable".
  std::vector<std::string> flags;

  [[nodiscard]] bool has_domain(PowerDomain d) const;
  /// First marker with this label.
  [[nodiscard]] std::optional<Marker> marker(std::string_view label) const;
  /// Time span covered by the samples of `domain`.
  [[nodiscard]] std::int64_t first_ns(PowerDomain domain) const;
  [[nodiscard]] std::int64_t last_ns(PowerDomain domain) const;

  /// Throws std::invalid_argument if per-domain timestamps are not strictly
  /// increasing, markers are out of order, or a counter exceeds its range.
  void validate() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static EnergyTrace from_json(const nlohmann::json& j);

  friend bool operator==(const EnergyTrace&, const EnergyTrace&) = default;
};

/// Joules consumed by `domain` in [t0_ns, t1_ns]. Counters are unwrapped
/// (at most one wrap between consecutive samples) and the cumulative energy
/// is interpolated linearly between samples.
///
/// Throws std::invalid_argument for t0 >= t1 or an absent domain and
/// std::out_of_range when the interval leaves the sampled span.
double interval_energy(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                       PowerDomain domain);

/// Sum over `domains`.
double interval_energy(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                       std::span<const PowerDomain> domains);

/// interval_energy / (t1 - t0), in watts.
double average_power(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                     PowerDomain domain);
double average_power(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                     std::span<const PowerDomain> domains);

/// E_s = T_s * P_avg. Throws std::invalid_argument for t_s <= 0 or p_avg < 0.
double energy_to_solution(double t_s, double p_avg);

}  // namespace lbm::energy
