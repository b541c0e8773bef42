#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lbm/harness/toml.hpp"
#include "lbm/kernels.hpp"
#include "lbm/layout.hpp"
#include "lbm/memory.hpp"
#include "lbm/velocity_set.hpp"

namespace lbm::harness {

/// Collision kernel selection as written in a config: "None", "Bgk(0.8)",
/// "Surrogate(90)".
struct CollideChoice {
  enum class Kind { None, Bgk, Surrogate };
  Kind kind = Kind::Surrogate;
  double tau = 0.8;
  int fma_per_pop = SurrogateParams::kDefaultFmaPerPop;

  static CollideChoice none() { return {Kind::None}; }
  static CollideChoice bgk(double tau) { return {Kind::Bgk, tau}; }
  static CollideChoice surrogate(int f) { return {Kind::Surrogate, 0.8, f}; }

  [[nodiscard]] CollideMode to_mode() const;
  friend bool operator==(const CollideChoice&, const CollideChoice&) = default;
};

CollideChoice parse_collide(std::string_view text);
std::string to_string(const CollideChoice& choice);

enum class BackendKind { Auto, Rapl, Synthetic };
BackendKind parse_backend_kind(std::string_view text);
std::string to_string(BackendKind kind);

struct ExperimentConfig {
  int nx = 64;
  int ny = 64;
  Model model = Model::D2Q37;
  LayoutKind layout = LayoutKind::aos();
  int threads = 1;
  MemoryTarget memory_target;
  CollideChoice collide_mode;
  int iterations = 10;
  int warmup_iterations = 2;
  double sampler_period_ms = 50.0;
  BackendKind backend = BackendKind::Auto;
  std::uint64_t seed = 1;
  int repetitions = 3;
  bool padding = true;
  bool pin = true;
  std::string memory_mode = "unspecified";
  std::string rapl_root = "/sys/class/powercap";
  double synthetic_package_w = 100.0;
  double synthetic_dram_w = 10.0;

  [[nodiscard]] std::int64_t sites() const { return static_cast<std::int64_t>(nx) * ny; }
  [[nodiscard]] Padding padding_mode() const {
    return padding ? Padding::Enabled : Padding::Disabled;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws std::invalid_argument naming the first offending field.
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys and wrong types throw.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Layouts x thread counts x memory targets over a fixed base.
struct SweepPlan {
  ExperimentConfig base;
  std::vector<LayoutKind> layouts;
  std::vector<int> threads;
  std::vector<MemoryTarget> memory_targets;

  [[nodiscard]] std::vector<ExperimentConfig> combinations() const;
  [[nodiscard]] std::size_t size() const {
    return layouts.size() * threads.size() * memory_targets.size();
  }
};

/// Scalar keys only; array values are rejected.
ExperimentConfig config_from_toml(const TomlDocument& doc);
/// `layout`, `threads` and `memory_target` may be arrays.
SweepPlan plan_from_toml(const TomlDocument& doc);

}  // namespace lbm::harness
