#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "lbm/geometry.hpp"

namespace lbm {

enum class LayoutTag { AoS, SoA, CSoA, CAoSoA };

/// Storage layout of a population field. Clustered variants group `vl` sites
/// into one aligned vector run.
struct LayoutKind {
  LayoutTag tag = LayoutTag::AoS;
  int vl = 1;

  static constexpr int kDefaultVectorLength = 8;

  static constexpr LayoutKind aos() { return {LayoutTag::AoS, 1}; }
  static constexpr LayoutKind soa() { return {LayoutTag::SoA, 1}; }
  static constexpr LayoutKind csoa(int vl = kDefaultVectorLength) { return {LayoutTag::CSoA, vl}; }
  static constexpr LayoutKind caosoa(int vl = kDefaultVectorLength) { return {LayoutTag::CAoSoA, vl}; }

  [[nodiscard]] constexpr bool clustered() const {
    return tag == LayoutTag::CSoA || tag == LayoutTag::CAoSoA;
  }

  friend constexpr bool operator==(const LayoutKind&, const LayoutKind&) = default;
};

/// "AoS", "SoA", "CSoA(8)", "CAoSoA(4)". A clustered name without a
/// parenthesised width gets the default width.
LayoutKind parse_layout(std::string_view text);
std::string to_string(LayoutKind kind);

enum class Padding { Enabled, Disabled };

/// Bijective (site, pop) -> storage index map.
///
/// With s = x*ny + y, H = ny_padded/vl, lane l = y / H, r = y % H and cluster
/// k = x*H + r:
///
///   AoS     s*q + pop
///   SoA     pop*S + s
///   CSoA    pop*S + k*vl + l
///   CAoSoA  (k*q + pop)*vl + l
///
/// where S is the (padded) site count. Every map is affine in pop, so an
/// address is site_base(site) + pop*pop_stride(). For clustered layouts the
/// vl sites {(x, r + l*H)} share one vl-aligned run of consecutive indices.
class LayoutIndexer {
 public:
  [[nodiscard]] LayoutKind kind() const { return kind_; }
  [[nodiscard]] const LatticeGeometry& geometry() const { return geometry_; }
  [[nodiscard]] int q() const { return q_; }
  [[nodiscard]] int vl() const { return kind_.vl; }
  [[nodiscard]] std::int64_t capacity() const { return capacity_; }
  [[nodiscard]] int alignment_elems() const { return kind_.clustered() ? kind_.vl : 1; }
  [[nodiscard]] int padded_ny() const { return padded_ny_; }
  /// H: distance in y between sites that share a vector run (clustered only;
  /// equals padded_ny for AoS/SoA).
  [[nodiscard]] int lane_stride() const { return lane_stride_; }
  [[nodiscard]] std::int64_t pop_stride() const { return pop_stride_; }

  [[nodiscard]] std::int64_t site_base(SiteCoord s) const {
    switch (kind_.tag) {
      case LayoutTag::AoS:
        return (static_cast<std::int64_t>(s.x) * geometry_.ny + s.y) * q_;
      case LayoutTag::SoA:
        return static_cast<std::int64_t>(s.x) * geometry_.ny + s.y;
      case LayoutTag::CSoA: {
        const int lane = s.y / lane_stride_;
        const int r = s.y - lane * lane_stride_;
        return (static_cast<std::int64_t>(s.x) * lane_stride_ + r) * kind_.vl + lane;
      }
      case LayoutTag::CAoSoA: {
        const int lane = s.y / lane_stride_;
        const int r = s.y - lane * lane_stride_;
        return (static_cast<std::int64_t>(s.x) * lane_stride_ + r) * q_ * kind_.vl + lane;
      }
    }
    return 0;
  }

  [[nodiscard]] std::int64_t address_unchecked(SiteCoord s, int pop) const {
    return site_base(s) + pop * pop_stride_;
  }

  /// Throws std::out_of_range for a site outside the interior or a bad pop.
  [[nodiscard]] std::int64_t address(SiteCoord s, int pop) const;

  friend LayoutIndexer make_indexer(LayoutKind, const LatticeGeometry&, int, Padding);

 private:
  LayoutKind kind_;
  LatticeGeometry geometry_;
  int q_ = 0;
  int padded_ny_ = 0;
  int lane_stride_ = 0;
  std::int64_t pop_stride_ = 0;
  std::int64_t capacity_ = 0;
};

/// Throws std::invalid_argument for a malformed kind (vl not a power of two
/// >= 2) or, with padding disabled, ny not divisible by vl.
LayoutIndexer make_indexer(LayoutKind kind, const LatticeGeometry& geometry, int q,
                           Padding padding = Padding::Enabled);

}  // namespace lbm
