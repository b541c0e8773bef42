#include "lbm/layout.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace lbm {

LatticeGeometry LatticeGeometry::make(int nx, int ny, int halo) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument(fmt::format("lattice must be at least 1x1, got {}x{}", nx, ny));
  }
  if (halo < 0) throw std::invalid_argument("halo width must be non-negative");
  return {nx, ny, halo};
}

LayoutKind parse_layout(std::string_view text) {
  auto open = text.find('(');
  std::string_view name = text.substr(0, open);
  int vl = LayoutKind::kDefaultVectorLength;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw std::invalid_argument(fmt::format("bad layout '{}'", text));
    std::string_view digits = text.substr(open + 1, text.size() - open - 2);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), vl);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw std::invalid_argument(fmt::format("bad vector length in layout '{}'", text));
    }
  }
  if (name == "AoS" || name == "SoA") {
    if (open != std::string_view::npos) {
      throw std::invalid_argument(fmt::format("layout '{}' takes no vector length", name));
    }
    return name == "AoS" ? LayoutKind::aos() : LayoutKind::soa();
  }
  if (name == "CSoA") return LayoutKind::csoa(vl);
  if (name == "CAoSoA") return LayoutKind::caosoa(vl);
  throw std::invalid_argument(fmt::format("unknown layout '{}'", text));
}

std::string to_string(LayoutKind kind) {
  switch (kind.tag) {
    case LayoutTag::AoS: return "AoS";
    case LayoutTag::SoA: return "SoA";
    case LayoutTag::CSoA: return fmt::format("CSoA({})", kind.vl);
    case LayoutTag::CAoSoA: return fmt::format("CAoSoA({})", kind.vl);
  }
  return "?";
}

std::int64_t LayoutIndexer::address(SiteCoord s, int pop) const {
  if (!geometry_.contains(s)) {
    throw std::out_of_range(fmt::format("site ({}, {}) outside {}x{} interior", s.x, s.y,
                                        geometry_.nx, geometry_.ny));
  }
  if (pop < 0 || pop >= q_) {
    throw std::out_of_range(fmt::format("population {} outside [0, {})", pop, q_));
  }
  return address_unchecked(s, pop);
}

LayoutIndexer make_indexer(LayoutKind kind, const LatticeGeometry& geometry, int q,
                           Padding padding) {
  if (q < 1) throw std::invalid_argument("population count must be positive");
  if (geometry.nx < 1 || geometry.ny < 1) throw std::invalid_argument("empty lattice");

  LayoutIndexer ix;
  ix.kind_ = kind;
  ix.geometry_ = geometry;
  ix.q_ = q;
  ix.padded_ny_ = geometry.ny;

  if (kind.clustered()) {
    const int vl = kind.vl;
    if (vl < 2 || (vl & (vl - 1)) != 0) {
      throw std::invalid_argument(
          fmt::format("vector length {} must be a power of two >= 2", vl));
    }
    if (geometry.ny % vl != 0) {
      if (padding == Padding::Disabled) {
        throw std::invalid_argument(fmt::format(
            "{} needs ny divisible by {} (ny = {}, padding disabled)", to_string(kind), vl,
            geometry.ny));
      }
      ix.padded_ny_ = (geometry.ny + vl - 1) / vl * vl;
    }
    ix.lane_stride_ = ix.padded_ny_ / vl;
  } else {
    if (kind.vl != 1) throw std::invalid_argument("AoS/SoA take no vector length");
    ix.lane_stride_ = geometry.ny;
  }

  const std::int64_t padded_sites = static_cast<std::int64_t>(geometry.nx) * ix.padded_ny_;
  ix.capacity_ = padded_sites * q;
  switch (kind.tag) {
    case LayoutTag::AoS: ix.pop_stride_ = 1; break;
    case LayoutTag::SoA:
    case LayoutTag::CSoA: ix.pop_stride_ = padded_sites; break;
    case LayoutTag::CAoSoA: ix.pop_stride_ = kind.vl; break;
  }
  return ix;
}

}  // namespace lbm
