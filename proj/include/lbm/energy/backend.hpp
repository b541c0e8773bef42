#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lbm/energy/clock.hpp"
#include "lbm/errors.hpp"

namespace lbm::energy {

enum class PowerDomain { Package, Dram };

std::string to_string(PowerDomain domain);
PowerDomain parse_domain(std::string_view text);

using lbm::CapabilityError;

struct CounterReading {
  PowerDomain domain;
  std::int64_t t_ns;
  std::uint64_t cumulative_uj;
};

/// Source of cumulative energy counters. Counters wrap modulo
/// counter_max_uj(domain).
class Backend {
 public:
  virtual ~Backend() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual std::vector<PowerDomain> domains() const = 0;
  [[nodiscard]] virtual std::uint64_t counter_max_uj(PowerDomain domain) const = 0;
  /// One reading per domain, stamped by clock().
  virtual std::vector<CounterReading> read() = 0;
  [[nodiscard]] virtual Clock& clock() = 0;
};

/// Linux powercap RAPL zones.
///
/// Package zones are `<root>/intel-rapl:<n>` whose `name` starts with
/// "package"; DRAM zones are `<root>/intel-rapl:<n>:<m>` whose `name`
/// contains "dram". Each zone provides `energy_uj` and `max_energy_range_uj`
/// as ASCII decimal. With one zone per domain the raw counter and its range
/// are passed through; with several (multi-socket) the zones are unwrapped and
/// summed here and the domain reports an effectively unbounded range.
class RaplBackend final : public Backend {
 public:
  static constexpr std::string_view kDefaultRoot = "/sys/class/powercap";

  /// Throws CapabilityError when no readable package zone exists.
  static std::unique_ptr<RaplBackend> open(const std::filesystem::path& root = kDefaultRoot,
                                           std::shared_ptr<Clock> clock = nullptr);

  [[nodiscard]] std::string name() const override { return "rapl"; }
  [[nodiscard]] std::vector<PowerDomain> domains() const override;
  [[nodiscard]] std::uint64_t counter_max_uj(PowerDomain domain) const override;
  std::vector<CounterReading> read() override;
  [[nodiscard]] Clock& clock() override { return *clock_; }

  struct Zone {
    std::filesystem::path energy_file;
    std::uint64_t max_uj = 0;
    std::uint64_t last_raw = 0;
    std::uint64_t unwrapped = 0;
  };

 private:
  RaplBackend() = default;

  std::shared_ptr<Clock> clock_;
  std::vector<Zone> package_;
  std::vector<Zone> dram_;
};

struct PowerSegment {
  std::int64_t duration_ns = 0;
  double package_w = 0.0;
  double dram_w = 0.0;
};

/// Piecewise-constant power. After the last segment its power is held.
struct SyntheticPowerModel {
  std::vector<PowerSegment> segments;
  std::uint64_t counter_max_uj = 262'144'000'000;
  bool has_dram = true;

  static SyntheticPowerModel constant(double package_w, double dram_w);

  /// Throws std::invalid_argument for empty models, non-positive durations,
  /// negative powers or a zero counter range.
  void validate() const;

  /// Exact energy in microjoules consumed in [0, t_ns].
  [[nodiscard]] long double energy_uj(PowerDomain domain, std::int64_t t_ns) const;
};

/// Counters follow floor(model.energy_uj(t - epoch)) mod counter_max_uj.
class SyntheticBackend final : public Backend {
 public:
  SyntheticBackend(SyntheticPowerModel model, std::shared_ptr<Clock> clock = nullptr);

  [[nodiscard]] std::string name() const override { return "synthetic"; }
  [[nodiscard]] std::vector<PowerDomain> domains() const override;
  [[nodiscard]] std::uint64_t counter_max_uj(PowerDomain) const override {
    return model_.counter_max_uj;
  }
  std::vector<CounterReading> read() override;
  [[nodiscard]] Clock& clock() override { return *clock_; }

  [[nodiscard]] std::int64_t epoch_ns() const { return epoch_; }
  [[nodiscard]] const SyntheticPowerModel& model() const { return model_; }
  [[nodiscard]] std::uint64_t counter_at(PowerDomain domain, std::int64_t t_ns) const;

 private:
  SyntheticPowerModel model_;
  std::shared_ptr<Clock> clock_;
  std::int64_t epoch_;
};

struct RaplSpec {
  std::filesystem::path root = RaplBackend::kDefaultRoot;
};
struct SyntheticSpec {
  SyntheticPowerModel model;
};
using BackendSpec = std::variant<RaplSpec, SyntheticSpec>;

/// Throws CapabilityError when RAPL is requested but unavailable.
std::unique_ptr<Backend> open_backend(const BackendSpec& spec,
                                      std::shared_ptr<Clock> clock = nullptr);

}  // namespace lbm::energy
