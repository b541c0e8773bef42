#pragma once

#include <span>
#include <vector>

#include "lbm/geometry.hpp"
#include "lbm/kernels.hpp"
#include "lbm/velocity_set.hpp"

/// Scalar reference kernels on canonical logical arrays (index s*q + pop,
/// s = x*ny + y). Periodicity is applied by wrapping coordinates directly;
/// there is no halo and no layout. The optimized kernels are checked against
/// these.
namespace lbm::reference {

template <typename Real>
Real horner(std::span<const double> coeffs, Real f) {
  Real acc = Real(coeffs[0]);
  for (std::size_t k = 1; k < coeffs.size(); ++k) acc = acc * f + Real(coeffs[k]);
  return acc;
}

std::vector<double> propagate(std::span<const double> in, const LatticeGeometry& geometry,
                              const VelocitySet& set);

void collide_bgk(std::span<double> field, const LatticeGeometry& geometry,
                 const VelocitySet& set, const BgkParams& params);

void collide_surrogate(std::span<double> field, const SurrogateParams& params);

/// propagate then collide, returning the new state.
std::vector<double> step(std::span<const double> in, const LatticeGeometry& geometry,
                         const VelocitySet& set, const CollideMode& mode);

}  // namespace lbm::reference
