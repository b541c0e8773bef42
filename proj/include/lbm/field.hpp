#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "lbm/geometry.hpp"
#include "lbm/layout.hpp"
#include "lbm/memory.hpp"
#include "lbm/velocity_set.hpp"

namespace lbm {

/// Q reals per lattice site, stored under a layout, plus a halo ring of
/// width geometry().halo holding periodic images for the propagate stencil.
///
/// The interior lives in storage() at the indexer's addresses. Halo cells are
/// layout independent: cell-major, population-minor.
class PopulationField {
 public:
  PopulationField(const LatticeGeometry& geometry, int q, LayoutKind layout,
                  MemoryTarget target = {}, Padding padding = Padding::Enabled);
  explicit PopulationField(LayoutIndexer indexer, MemoryTarget target = {});

  [[nodiscard]] const LatticeGeometry& geometry() const { return indexer_.geometry(); }
  [[nodiscard]] int q() const { return indexer_.q(); }
  [[nodiscard]] LayoutKind layout() const { return indexer_.kind(); }
  [[nodiscard]] const LayoutIndexer& indexer() const { return indexer_; }
  [[nodiscard]] MemoryTarget memory_target() const { return storage_.target(); }

  /// Checked interior access; throws std::out_of_range.
  [[nodiscard]] double read(SiteCoord site, int pop) const;
  void write(SiteCoord site, int pop, double value);

  /// Interior or halo access for x in [-halo, nx + halo), y in [-halo, ny + halo).
  [[nodiscard]] double read_extended(int x, int y, int pop) const {
    const LatticeGeometry& g = geometry();
    if (x >= 0 && x < g.nx && y >= 0 && y < g.ny) {
      return storage_.data()[indexer_.address_unchecked({x, y}, pop)];
    }
    return halo_.data()[halo_cell(x, y) * q() + pop];
  }

  /// Index of a halo cell; (x, y) must be outside the interior and inside
  /// the extended range.
  [[nodiscard]] std::int64_t halo_cell(int x, int y) const {
    const LatticeGeometry& g = geometry();
    const int h = g.halo;
    if (x < 0 || x >= g.nx) {
      const int col = x < 0 ? x + h : h + (x - g.nx);
      return static_cast<std::int64_t>(col) * (g.ny + 2 * h) + (y + h);
    }
    const int row = y < 0 ? y + h : h + (y - g.ny);
    return static_cast<std::int64_t>(2 * h) * (g.ny + 2 * h) +
           static_cast<std::int64_t>(x) * 2 * h + row;
  }
  [[nodiscard]] std::int64_t halo_cell_count() const;

  [[nodiscard]] std::span<double> storage() { return storage_.span(); }
  [[nodiscard]] std::span<const double> storage() const { return storage_.span(); }
  [[nodiscard]] std::span<double> halo_storage() { return halo_.span(); }
  [[nodiscard]] std::span<const double> halo_storage() const { return halo_.span(); }

  /// Same geometry, q, layout and padded extent.
  [[nodiscard]] bool same_shape(const PopulationField& other) const;

 private:
  LayoutIndexer indexer_;
  AlignedBuffer storage_;
  AlignedBuffer halo_;
};

struct Uniform {
  double value = 0.0;
};
struct Impulse {
  SiteCoord site;
  int pop = 0;
  double value = 0.0;
};
/// Uniform draws in [0, 1), generated in canonical (site-major, pop-minor)
/// order so the logical content does not depend on the layout.
struct RandomSeeded {
  std::uint64_t seed = 0;
};
using InitPattern = std::variant<Uniform, Impulse, RandomSeeded>;

void fill(PopulationField& field, const InitPattern& pattern);

PopulationField init_field(const LatticeGeometry& geometry, int q, LayoutKind layout,
                           const InitPattern& pattern, MemoryTarget target = {},
                           Padding padding = Padding::Enabled);

struct Moments {
  double density = 0.0;
  std::array<double, 2> momentum{};
};

/// Throws std::invalid_argument when set.q() != field.q().
Moments moments(const PopulationField& field, const VelocitySet& set, SiteCoord site);

/// Neumaier-compensated sum over (site, pop) in canonical order. Identical bits
/// for the same logical content under any layout.
double field_checksum(const PopulationField& field);

/// Interior values in canonical order: index s*q + pop.
std::vector<double> to_logical(const PopulationField& field);
void assign_logical(PopulationField& field, std::span<const double> values);

/// Copy of `field` under another layout; halo values carry over unchanged.
PopulationField convert(const PopulationField& field, LayoutKind to,
                        Padding padding = Padding::Enabled);

}  // namespace lbm
