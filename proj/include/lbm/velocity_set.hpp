#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lbm {

struct Velocity {
  int x = 0;
  int y = 0;

  [[nodiscard]] constexpr int norm_sq() const { return x * x + y * y; }
  friend constexpr bool operator==(const Velocity&, const Velocity&) = default;
};

enum class Model { D2Q9, D2Q37 };

/// Discrete velocities of a DdQq model. Weights and the squared speed of
/// sound are present only for sets that carry a physical equilibrium.
class VelocitySet {
 public:
  VelocitySet(std::string name, std::vector<Velocity> vectors,
              std::optional<std::vector<double>> weights = std::nullopt,
              std::optional<double> speed_of_sound_sq = std::nullopt);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] int d() const { return 2; }
  [[nodiscard]] int q() const { return static_cast<int>(vectors_.size()); }
  [[nodiscard]] std::span<const Velocity> vectors() const { return vectors_; }
  [[nodiscard]] const Velocity& operator[](int p) const { return vectors_[static_cast<std::size_t>(p)]; }
  [[nodiscard]] bool has_weights() const { return weights_.has_value(); }
  [[nodiscard]] std::span<const double> weights() const;
  [[nodiscard]] std::optional<double> speed_of_sound_sq() const { return cs2_; }

  /// Largest |component| over all vectors; the minimum halo width.
  [[nodiscard]] int reach() const { return reach_; }
  [[nodiscard]] int reach_x() const { return reach_x_; }
  [[nodiscard]] int reach_y() const { return reach_y_; }

 private:
  std::string name_;
  std::vector<Velocity> vectors_;
  std::optional<std::vector<double>> weights_;
  std::optional<double> cs2_;
  int reach_ = 0;
  int reach_x_ = 0;
  int reach_y_ = 0;
};

VelocitySet build_velocity_set(Model model);

/// All integer vectors whose squared norm is one of `shells`, ordered by norm,
/// then x, then y. Throws std::invalid_argument for negative norms, norms that
/// are not a sum of two squares, or an empty result.
VelocitySet build_velocity_set(std::span<const int> shells, std::string name = "custom");

Model parse_model(std::string_view text);
std::string to_string(Model model);

}  // namespace lbm
