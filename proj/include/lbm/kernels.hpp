#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "lbm/field.hpp"
#include "lbm/velocity_set.hpp"

namespace lbm {

struct BgkParams {
  double tau = 1.0;

  /// Throws std::invalid_argument unless tau > 0.5.
  static BgkParams make(double tau);
};

/// Compute-bound stand-in collision: every population is replaced by a
/// degree-F polynomial of itself, evaluated by Horner's rule.
///
///   acc = coeffs[0]; for k in 1..F: acc = acc * f + coeffs[k]
///
/// Each step is one multiply then one add, rounded separately, so any path
/// that keeps this order produces identical bits.
struct SurrogateParams {
  int fma_per_pop = 1;
  std::vector<double> coeffs;  // F + 1 entries, leading coefficient first

  static constexpr int kDefaultFmaPerPop = 90;

  /// Deterministic coefficients from `seed`: the linear term is 0.75 and the
  /// remaining terms are scaled so that sum |coeffs| == 1. The polynomial
  /// then maps [-1, 1] into itself.
  static SurrogateParams from_seed(int fma_per_pop, std::uint64_t seed = 0);
  static SurrogateParams from_coeffs(std::vector<double> coeffs);
};

struct NoCollide {};
using CollideMode = std::variant<NoCollide, BgkParams, SurrogateParams>;

/// Fills the halo ring with the periodic images of interior sites.
void halo_exchange(PopulationField& field);

/// Pull-scheme streaming: nxt(s, p) = prv(s - c_p, p). prv's halo must be
/// current. Work is split over `workers` threads by contiguous x ranges.
void propagate(const PopulationField& prv, PopulationField& nxt, const VelocitySet& set,
               int workers = 1);

/// Single-relaxation-time BGK with the second-order equilibrium. The set must
/// carry weights.
void collide_bgk(PopulationField& field, const VelocitySet& set, const BgkParams& params,
                 int workers = 1);

void collide_surrogate(PopulationField& field, const SurrogateParams& params, int workers = 1);

void collide(PopulationField& field, const VelocitySet& set, const CollideMode& mode,
             int workers = 1);

/// Throws std::invalid_argument when `mode` cannot run on `set` (BGK needs
/// weights).
void check_collide_mode(const VelocitySet& set, const CollideMode& mode);

/// Double buffer for propagate; prv and nxt are distinct allocations.
class StepBuffers {
 public:
  explicit StepBuffers(PopulationField initial);
  StepBuffers(const StepBuffers&) = delete;
  StepBuffers& operator=(const StepBuffers&) = delete;

  [[nodiscard]] PopulationField& prv() { return *prv_; }
  [[nodiscard]] PopulationField& nxt() { return *nxt_; }
  [[nodiscard]] const PopulationField& prv() const { return *prv_; }
  void swap() { std::swap(prv_, nxt_); }

 private:
  PopulationField a_;
  PopulationField b_;
  PopulationField* prv_;
  PopulationField* nxt_;
};

/// halo_exchange(prv); propagate(prv -> nxt); collide(nxt); swap. After the
/// call the newest state is buffers.prv().
void step(StepBuffers& buffers, const VelocitySet& set, const CollideMode& mode,
          int workers = 1);

}  // namespace lbm
