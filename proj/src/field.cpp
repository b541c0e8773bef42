#include "lbm/field.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace lbm {

PopulationField::PopulationField(const LatticeGeometry& geometry, int q, LayoutKind layout,
                                 MemoryTarget target, Padding padding)
    : PopulationField(make_indexer(layout, geometry, q, padding), target) {}

PopulationField::PopulationField(LayoutIndexer indexer, MemoryTarget target)
    : indexer_(std::move(indexer)),
      storage_(static_cast<std::size_t>(indexer_.capacity()), target) {
  halo_ = AlignedBuffer(static_cast<std::size_t>(halo_cell_count() * q()), target);
}

std::int64_t PopulationField::halo_cell_count() const {
  const LatticeGeometry& g = geometry();
  const std::int64_t h = g.halo;
  return 2 * h * (g.ny + 2 * h) + static_cast<std::int64_t>(g.nx) * 2 * h;
}

double PopulationField::read(SiteCoord site, int pop) const {
  return storage_.data()[indexer_.address(site, pop)];
}

void PopulationField::write(SiteCoord site, int pop, double value) {
  storage_.data()[indexer_.address(site, pop)] = value;
}

bool PopulationField::same_shape(const PopulationField& other) const {
  return geometry() == other.geometry() && q() == other.q() && layout() == other.layout() &&
         indexer_.padded_ny() == other.indexer_.padded_ny();
}

namespace {

template <typename Fn>
void for_each_canonical(const LatticeGeometry& g, int q, Fn&& fn) {
  for (int x = 0; x < g.nx; ++x) {
    for (int y = 0; y < g.ny; ++y) {
      for (int p = 0; p < q; ++p) fn(SiteCoord{x, y}, p);
    }
  }
}

}  // namespace

void fill(PopulationField& field, const InitPattern& pattern) {
  auto storage = field.storage();
  std::fill(storage.begin(), storage.end(), 0.0);
  auto halo = field.halo_storage();
  std::fill(halo.begin(), halo.end(), 0.0);
  const LayoutIndexer& ix = field.indexer();

  if (const auto* uniform = std::get_if<Uniform>(&pattern)) {
    for_each_canonical(field.geometry(), field.q(), [&](SiteCoord s, int p) {
      storage[static_cast<std::size_t>(ix.address_unchecked(s, p))] = uniform->value;
    });
  } else if (const auto* impulse = std::get_if<Impulse>(&pattern)) {
    field.write(impulse->site, impulse->pop, impulse->value);
  } else if (const auto* random = std::get_if<RandomSeeded>(&pattern)) {
    std::mt19937_64 rng(random->seed);
    for_each_canonical(field.geometry(), field.q(), [&](SiteCoord s, int p) {
      // 53 random mantissa bits; avoids implementation-defined distributions
      storage[static_cast<std::size_t>(ix.address_unchecked(s, p))] =
          static_cast<double>(rng() >> 11) * 0x1.0p-53;
    });
  }
}

PopulationField init_field(const LatticeGeometry& geometry, int q, LayoutKind layout,
                           const InitPattern& pattern, MemoryTarget target, Padding padding) {
  PopulationField field(geometry, q, layout, target, padding);
  fill(field, pattern);
  return field;
}

Moments moments(const PopulationField& field, const VelocitySet& set, SiteCoord site) {
  if (set.q() != field.q()) {
    throw std::invalid_argument(
        fmt::format("velocity set has q={}, field has q={}", set.q(), field.q()));
  }
  Moments m;
  for (int p = 0; p < field.q(); ++p) {
    const double f = field.read(site, p);
    m.density += f;
    m.momentum[0] += set[p].x * f;
    m.momentum[1] += set[p].y * f;
  }
  return m;
}

double field_checksum(const PopulationField& field) {
  const auto storage = field.storage();
  const LayoutIndexer& ix = field.indexer();
  double sum = 0.0;
  double compensation = 0.0;
  for_each_canonical(field.geometry(), field.q(), [&](SiteCoord s, int p) {
    const double v = storage[static_cast<std::size_t>(ix.address_unchecked(s, p))];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  });
  return sum + compensation;
}

std::vector<double> to_logical(const PopulationField& field) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(field.geometry().sites() * field.q()));
  const auto storage = field.storage();
  const LayoutIndexer& ix = field.indexer();
  for_each_canonical(field.geometry(), field.q(), [&](SiteCoord s, int p) {
    out.push_back(storage[static_cast<std::size_t>(ix.address_unchecked(s, p))]);
  });
  return out;
}

void assign_logical(PopulationField& field, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(field.geometry().sites() * field.q())) {
    throw std::invalid_argument("logical value count does not match field");
  }
  auto storage = field.storage();
  const LayoutIndexer& ix = field.indexer();
  std::size_t i = 0;
  for_each_canonical(field.geometry(), field.q(), [&](SiteCoord s, int p) {
    storage[static_cast<std::size_t>(ix.address_unchecked(s, p))] = values[i++];
  });
}

PopulationField convert(const PopulationField& field, LayoutKind to, Padding padding) {
  PopulationField out(field.geometry(), field.q(), to, field.memory_target(), padding);
  const auto src = field.storage();
  auto dst = out.storage();
  const LayoutIndexer& from_ix = field.indexer();
  const LayoutIndexer& to_ix = out.indexer();
  for_each_canonical(field.geometry(), field.q(), [&](SiteCoord s, int p) {
    dst[static_cast<std::size_t>(to_ix.address_unchecked(s, p))] =
        src[static_cast<std::size_t>(from_ix.address_unchecked(s, p))];
  });
  std::copy(field.halo_storage().begin(), field.halo_storage().end(),
            out.halo_storage().begin());
  return out;
}

}  // namespace lbm
