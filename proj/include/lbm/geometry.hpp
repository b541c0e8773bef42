#pragma once

#include <compare>
#include <cstdint>

namespace lbm {

struct SiteCoord {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const SiteCoord&, const SiteCoord&) = default;
};

/// Interior extent of a periodic 2D lattice plus the halo ring width kept
/// around it for the propagate stencil.
struct LatticeGeometry {
  int nx = 0;
  int ny = 0;
  int halo = 0;

  /// Throws std::invalid_argument when nx or ny is below 1 or halo is negative.
  static LatticeGeometry make(int nx, int ny, int halo);

  [[nodiscard]] constexpr std::int64_t sites() const {
    return static_cast<std::int64_t>(nx) * ny;
  }
  [[nodiscard]] constexpr bool contains(SiteCoord s) const {
    return s.x >= 0 && s.x < nx && s.y >= 0 && s.y < ny;
  }
  /// Canonical site index, x-major.
  [[nodiscard]] constexpr std::int64_t linear(SiteCoord s) const {
    return static_cast<std::int64_t>(s.x) * ny + s.y;
  }

  friend constexpr bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;
};

}  // namespace lbm
