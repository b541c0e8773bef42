#include "lbm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <omp.h>

namespace lbm {

BgkParams BgkParams::make(double tau) {
  if (!(tau > 0.5)) {
    throw std::invalid_argument(fmt::format("BGK relaxation time must exceed 0.5, got {}", tau));
  }
  return {tau};
}

SurrogateParams SurrogateParams::from_seed(int fma_per_pop, std::uint64_t seed) {
  if (fma_per_pop < 1) throw std::invalid_argument("surrogate needs at least one FMA per pop");
  std::mt19937_64 rng(seed);
  std::vector<double> coeffs(static_cast<std::size_t>(fma_per_pop) + 1);
  const std::size_t linear = coeffs.size() - 2;
  double rest = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k == linear) continue;
    coeffs[k] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    rest += std::abs(coeffs[k]);
  }
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k != linear && rest > 0.0) coeffs[k] *= 0.25 / rest;
  }
  coeffs[linear] = 0.75;
  return {fma_per_pop, std::move(coeffs)};
}

SurrogateParams SurrogateParams::from_coeffs(std::vector<double> coeffs) {
  if (coeffs.size() < 2) throw std::invalid_argument("surrogate needs at least two coefficients");
  const int f = static_cast<int>(coeffs.size()) - 1;
  return {f, std::move(coeffs)};
}

namespace {

constexpr int kMaxWeightedQ = 64;

// Splits [0, nx) into `workers` contiguous x ranges, one per OpenMP thread.
template <typename Fn>
void for_column_ranges(int nx, int workers, Fn&& fn) {
  if (workers <= 1) {
    fn(0, nx);
    return;
  }
  omp_set_dynamic(0);
#pragma omp parallel num_threads(workers)
  {
    const int t = omp_get_thread_num();
    const int n = omp_get_num_threads();
    const int x0 = static_cast<int>(static_cast<std::int64_t>(nx) * t / n);
    const int x1 = static_cast<int>(static_cast<std::int64_t>(nx) * (t + 1) / n);
    fn(x0, x1);
  }
}

void check_workers(int workers) {
  if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
}

template <int VL>
inline void copy_run(double* __restrict dst, const double* __restrict src) {
  for (int l = 0; l < VL; ++l) dst[l] = src[l];
}

template <int VL>
void propagate_caosoa_bulk(const double* __restrict src, double* __restrict dst,
                           const VelocitySet& set, int q, int lane_stride, int x, int r_lo,
                           int r_hi) {
  for (int r = r_lo; r < r_hi; ++r) {
    double* d = dst + (static_cast<std::int64_t>(x) * lane_stride + r) * q * VL;
    for (int p = 0; p < q; ++p) {
      const Velocity c = set[p];
      const std::int64_t k = static_cast<std::int64_t>(x - c.x) * lane_stride + (r - c.y);
      copy_run<VL>(d + p * VL, src + (k * q + p) * VL);
    }
  }
}

void propagate_caosoa_bulk_any(const double* __restrict src, double* __restrict dst,
                               const VelocitySet& set, int q, int lane_stride, int vl, int x,
                               int r_lo, int r_hi) {
  switch (vl) {
    case 2: return propagate_caosoa_bulk<2>(src, dst, set, q, lane_stride, x, r_lo, r_hi);
    case 4: return propagate_caosoa_bulk<4>(src, dst, set, q, lane_stride, x, r_lo, r_hi);
    case 8: return propagate_caosoa_bulk<8>(src, dst, set, q, lane_stride, x, r_lo, r_hi);
    case 16: return propagate_caosoa_bulk<16>(src, dst, set, q, lane_stride, x, r_lo, r_hi);
    default: break;
  }
  for (int r = r_lo; r < r_hi; ++r) {
    double* d = dst + (static_cast<std::int64_t>(x) * lane_stride + r) * q * vl;
    for (int p = 0; p < q; ++p) {
      const Velocity c = set[p];
      const std::int64_t k = static_cast<std::int64_t>(x - c.x) * lane_stride + (r - c.y);
      std::memcpy(d + p * vl, src + (k * q + p) * vl, sizeof(double) * vl);
    }
  }
}

void propagate_columns(const PopulationField& prv, PopulationField& nxt, const VelocitySet& set,
                       int x0, int x1) {
  const LayoutIndexer& ix = prv.indexer();
  const LatticeGeometry& g = prv.geometry();
  const int q = set.q();
  const int rx = set.reach_x();
  const int ry = set.reach_y();
  const double* __restrict src = prv.storage().data();
  double* __restrict dst = nxt.storage().data();
  const int bulk_x_lo = rx;
  const int bulk_x_hi = g.nx - rx;

  // Every layout map is x * x_step + ytab[y] + p * pop_stride.
  const std::int64_t x_step = ix.site_base({1, 0}) - ix.site_base({0, 0});
  std::vector<std::int64_t> ytab(static_cast<std::size_t>(g.ny));
  for (int y = 0; y < g.ny; ++y) ytab[static_cast<std::size_t>(y)] = ix.site_base({0, y});
  std::vector<int> cx(static_cast<std::size_t>(q)), cy(static_cast<std::size_t>(q));
  for (int p = 0; p < q; ++p) {
    cx[static_cast<std::size_t>(p)] = set[p].x;
    cy[static_cast<std::size_t>(p)] = set[p].y;
  }
  const double* halo = prv.halo_storage().data();
  const std::int64_t ps = ix.pop_stride();
  auto edge_site = [&](int x, int y) {
    const std::int64_t to = x * x_step + ytab[static_cast<std::size_t>(y)];
    for (int p = 0; p < q; ++p) {
      const int xs = x - cx[static_cast<std::size_t>(p)];
      const int ys = y - cy[static_cast<std::size_t>(p)];
      double v;
      if (static_cast<unsigned>(xs) < static_cast<unsigned>(g.nx) &&
          static_cast<unsigned>(ys) < static_cast<unsigned>(g.ny)) {
        v = src[xs * x_step + ytab[static_cast<std::size_t>(ys)] + p * ps];
      } else {
        v = halo[prv.halo_cell(xs, ys) * q + p];
      }
      dst[to + p * ps] = v;
    }
  };

  switch (ix.kind().tag) {
    case LayoutTag::AoS:
    case LayoutTag::SoA: {
      const int y_lo = std::min(ry, g.ny);
      const int y_hi = std::max(y_lo, g.ny - ry);
      const bool aos = ix.kind().tag == LayoutTag::AoS;
      std::vector<std::int64_t> aos_offset(static_cast<std::size_t>(q));
      for (int p = 0; p < q; ++p) {
        aos_offset[static_cast<std::size_t>(p)] =
            -(static_cast<std::int64_t>(set[p].x) * g.ny + set[p].y) * q + p;
      }
      const std::int64_t sites = g.sites();
      for (int x = x0; x < x1; ++x) {
        const bool bulk = x >= bulk_x_lo && x < bulk_x_hi;
        if (!bulk) {
          for (int y = 0; y < g.ny; ++y) edge_site(x, y);
          continue;
        }
        for (int y = 0; y < y_lo; ++y) edge_site(x, y);
        for (int y = y_hi; y < g.ny; ++y) edge_site(x, y);
        if (aos) {
          const std::int64_t* off = aos_offset.data();
          for (int y = y_lo; y < y_hi; ++y) {
            const std::int64_t base = (static_cast<std::int64_t>(x) * g.ny + y) * q;
            double* d = dst + base;
            const double* s = src + base;
            for (int p = 0; p < q; ++p) d[p] = s[off[p]];
          }
        } else {
          for (int p = 0; p < q; ++p) {
            const Velocity c = set[p];
            const std::int64_t to = p * sites + static_cast<std::int64_t>(x) * g.ny + y_lo;
            const std::int64_t from =
                p * sites + static_cast<std::int64_t>(x - c.x) * g.ny + (y_lo - c.y);
            std::memcpy(dst + to, src + from, sizeof(double) * static_cast<std::size_t>(y_hi - y_lo));
          }
        }
      }
      return;
    }
    case LayoutTag::CSoA:
    case LayoutTag::CAoSoA: {
      const int vl = ix.vl();
      const int lane_stride = ix.lane_stride();
      // Cluster rows whose every lane, and every lane's source, is a real
      // interior site in the same lane.
      const int r_lo = std::min(ry, lane_stride);
      const int r_hi = std::max(r_lo, std::min(lane_stride - ry, g.ny - (vl - 1) * lane_stride - ry));
      const std::int64_t pop_stride = ix.pop_stride();
      // Edge cluster row: a source row outside [0, lane_stride) sits in a
      // neighbouring lane.
      auto edge_row = [&](int x, int r) {
        double* drow = dst + x * x_step + ytab[static_cast<std::size_t>(r)];
        for (int p = 0; p < q; ++p) {
          const int xs = x - cx[static_cast<std::size_t>(p)];
          const int c_y = cy[static_cast<std::size_t>(p)];
          const int rs = r - c_y;
          const int shift = rs >= 0 ? rs / lane_stride : -((lane_stride - 1 - rs) / lane_stride);
          const int r_src = rs - shift * lane_stride;
          const double* srow = src + xs * x_step + ytab[static_cast<std::size_t>(r_src)] + p * ps;
          double* d = drow + p * ps;
          for (int l = 0, y = r; l < vl && y < g.ny; ++l, y += lane_stride) {
            const int ys = y - c_y;
            d[l] = static_cast<unsigned>(ys) < static_cast<unsigned>(g.ny)
                       ? srow[l + shift]
                       : halo[prv.halo_cell(xs, ys) * q + p];
          }
        }
      };
      for (int x = x0; x < x1; ++x) {
        if (x < bulk_x_lo || x >= bulk_x_hi) {
          for (int y = 0; y < g.ny; ++y) edge_site(x, y);
          continue;
        }
        const int rows = std::min(lane_stride, g.ny);
        for (int r = 0; r < rows; ++r) {
          if (r >= r_lo && r < r_hi) continue;
          edge_row(x, r);
        }
        if (r_hi <= r_lo) continue;
        if (ix.kind().tag == LayoutTag::CSoA) {
          const std::size_t run = static_cast<std::size_t>(r_hi - r_lo) * vl;
          for (int p = 0; p < q; ++p) {
            const Velocity c = set[p];
            const std::int64_t to =
                p * pop_stride + (static_cast<std::int64_t>(x) * lane_stride + r_lo) * vl;
            const std::int64_t from =
                p * pop_stride +
                (static_cast<std::int64_t>(x - c.x) * lane_stride + (r_lo - c.y)) * vl;
            std::memcpy(dst + to, src + from, sizeof(double) * run);
          }
        } else {
          propagate_caosoa_bulk_any(src, dst, set, q, lane_stride, vl, x, r_lo, r_hi);
        }
      }
      return;
    }
  }
}

struct BgkConstants {
  double omega;
  double inv_cs2;
  double half_inv_cs4;
  double half_inv_cs2;
};

// Per-site BGK on q values at base + p*stride. All layouts run this exact
// sequence of operations.
inline void bgk_site(double* f, std::int64_t stride, const VelocitySet& set,
                     std::span<const double> weights, const BgkConstants& k) {
  const int q = set.q();
  double local[kMaxWeightedQ];
  double rho = 0.0;
  double jx = 0.0;
  double jy = 0.0;
  for (int p = 0; p < q; ++p) {
    const double v = f[p * stride];
    local[p] = v;
    rho += v;
    jx += set[p].x * v;
    jy += set[p].y * v;
  }
  const double ux = jx / rho;
  const double uy = jy / rho;
  const double usq = ux * ux + uy * uy;
  for (int p = 0; p < q; ++p) {
    const double cu = set[p].x * ux + set[p].y * uy;
    const double feq =
        weights[static_cast<std::size_t>(p)] * rho *
        (1.0 + cu * k.inv_cs2 + cu * cu * k.half_inv_cs4 - usq * k.half_inv_cs2);
    f[p * stride] = local[p] - k.omega * (local[p] - feq);
  }
}

inline void horner_run(double* __restrict v, std::size_t n, std::span<const double> coeffs) {
  constexpr std::size_t kBlock = 32;
  const std::size_t degree = coeffs.size() - 1;
  const double* c = coeffs.data();
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) {
    double x[kBlock];
    double acc[kBlock];
    for (std::size_t j = 0; j < kBlock; ++j) {
      x[j] = v[i + j];
      acc[j] = c[0];
    }
    for (std::size_t k = 1; k <= degree; ++k) {
      for (std::size_t j = 0; j < kBlock; ++j) acc[j] = acc[j] * x[j] + c[k];
    }
    for (std::size_t j = 0; j < kBlock; ++j) v[i + j] = acc[j];
  }
  for (; i < n; ++i) {
    const double x = v[i];
    double acc = c[0];
    for (std::size_t k = 1; k <= degree; ++k) acc = acc * x + c[k];
    v[i] = acc;
  }
}

}  // namespace

void halo_exchange(PopulationField& field) {
  const LatticeGeometry& g = field.geometry();
  const int h = g.halo;
  if (h == 0) return;
  const LayoutIndexer& ix = field.indexer();
  const double* src = field.storage().data();
  double* halo = field.halo_storage().data();
  const int q = field.q();
  const std::int64_t stride = ix.pop_stride();
  auto wrap = [](int v, int n) { return ((v % n) + n) % n; };
  auto copy_cell = [&](int x, int y) {
    const std::int64_t base = ix.site_base({wrap(x, g.nx), wrap(y, g.ny)});
    double* dst = halo + field.halo_cell(x, y) * q;
    for (int p = 0; p < q; ++p) dst[p] = src[base + p * stride];
  };
  for (int x = -h; x < 0; ++x) {
    for (int y = -h; y < g.ny + h; ++y) copy_cell(x, y);
  }
  for (int x = g.nx; x < g.nx + h; ++x) {
    for (int y = -h; y < g.ny + h; ++y) copy_cell(x, y);
  }
  for (int x = 0; x < g.nx; ++x) {
    for (int y = -h; y < 0; ++y) copy_cell(x, y);
    for (int y = g.ny; y < g.ny + h; ++y) copy_cell(x, y);
  }
}

void propagate(const PopulationField& prv, PopulationField& nxt, const VelocitySet& set,
               int workers) {
  check_workers(workers);
  if (&prv == &nxt) throw std::invalid_argument("propagate source and target alias");
  if (!prv.same_shape(nxt)) {
    throw std::invalid_argument("propagate buffers differ in geometry, q or layout");
  }
  if (set.q() != prv.q()) {
    throw std::invalid_argument(
        fmt::format("velocity set has q={}, field has q={}", set.q(), prv.q()));
  }
  if (set.reach() > prv.geometry().halo) {
    throw std::invalid_argument(fmt::format("halo {} below stencil reach {}",
                                            prv.geometry().halo, set.reach()));
  }
  for_column_ranges(prv.geometry().nx, workers,
                    [&](int x0, int x1) { propagate_columns(prv, nxt, set, x0, x1); });
}

void check_collide_mode(const VelocitySet& set, const CollideMode& mode) {
  if (std::holds_alternative<BgkParams>(mode)) {
    if (!set.has_weights()) {
      throw std::invalid_argument(set.name() + " has no weights; BGK collision unavailable");
    }
    if (set.q() > kMaxWeightedQ) throw std::invalid_argument("BGK supports q <= 64");
    BgkParams::make(std::get<BgkParams>(mode).tau);
  } else if (const auto* s = std::get_if<SurrogateParams>(&mode)) {
    if (s->coeffs.size() != static_cast<std::size_t>(s->fma_per_pop) + 1) {
      throw std::invalid_argument("surrogate coefficient count must be F + 1");
    }
  }
}

void collide_bgk(PopulationField& field, const VelocitySet& set, const BgkParams& params,
                 int workers) {
  check_workers(workers);
  if (set.q() != field.q()) {
    throw std::invalid_argument(
        fmt::format("velocity set has q={}, field has q={}", set.q(), field.q()));
  }
  check_collide_mode(set, params);
  const double cs2 = *set.speed_of_sound_sq();
  const BgkConstants k{1.0 / params.tau, 1.0 / cs2, 1.0 / (2.0 * cs2 * cs2), 1.0 / (2.0 * cs2)};
  const auto weights = set.weights();
  const LayoutIndexer& ix = field.indexer();
  double* data = field.storage().data();
  const int ny = field.geometry().ny;
  for_column_ranges(field.geometry().nx, workers, [&](int x0, int x1) {
    for (int x = x0; x < x1; ++x) {
      for (int y = 0; y < ny; ++y) {
        bgk_site(data + ix.site_base({x, y}), ix.pop_stride(), set, weights, k);
      }
    }
  });
}

void collide_surrogate(PopulationField& field, const SurrogateParams& params, int workers) {
  check_workers(workers);
  if (params.coeffs.size() != static_cast<std::size_t>(params.fma_per_pop) + 1) {
    throw std::invalid_argument("surrogate coefficient count must be F + 1");
  }
  const LayoutIndexer& ix = field.indexer();
  double* data = field.storage().data();
  const int q = field.q();
  const std::int64_t ny = ix.padded_ny();
  const std::span<const double> coeffs = params.coeffs;
  // Each column x owns contiguous runs in every layout; padding rows are
  // evaluated too and never read back.
  for_column_ranges(field.geometry().nx, workers, [&](int x0, int x1) {
    if (x0 >= x1) return;
    switch (ix.kind().tag) {
      case LayoutTag::AoS:
      case LayoutTag::CAoSoA:
        horner_run(data + x0 * ny * q, static_cast<std::size_t>((x1 - x0) * ny * q), coeffs);
        break;
      case LayoutTag::SoA:
      case LayoutTag::CSoA:
        for (int p = 0; p < q; ++p) {
          horner_run(data + p * ix.pop_stride() + x0 * ny,
                     static_cast<std::size_t>((x1 - x0) * ny), coeffs);
        }
        break;
    }
  });
}

void collide(PopulationField& field, const VelocitySet& set, const CollideMode& mode,
             int workers) {
  if (const auto* bgk = std::get_if<BgkParams>(&mode)) {
    collide_bgk(field, set, *bgk, workers);
  } else if (const auto* s = std::get_if<SurrogateParams>(&mode)) {
    collide_surrogate(field, *s, workers);
  }
}

StepBuffers::StepBuffers(PopulationField initial)
    : a_(std::move(initial)),
      b_(a_.indexer(), a_.memory_target()),
      prv_(&a_),
      nxt_(&b_) {}

void step(StepBuffers& buffers, const VelocitySet& set, const CollideMode& mode, int workers) {
  halo_exchange(buffers.prv());
  propagate(buffers.prv(), buffers.nxt(), set, workers);
  collide(buffers.nxt(), set, mode, workers);
  buffers.swap();
}

}  // namespace lbm
