#include "lbm/reference.hpp"

#include <stdexcept>

namespace lbm::reference {

namespace {
int wrap(int v, int n) { return ((v % n) + n) % n; }
}  // namespace

std::vector<double> propagate(std::span<const double> in, const LatticeGeometry& g,
                              const VelocitySet& set) {
  const int q = set.q();
  if (in.size() != static_cast<std::size_t>(g.sites() * q)) {
    throw std::invalid_argument("reference propagate: size mismatch");
  }
  std::vector<double> out(in.size());
  for (int x = 0; x < g.nx; ++x) {
    for (int y = 0; y < g.ny; ++y) {
      for (int p = 0; p < q; ++p) {
        const int sx = wrap(x - set[p].x, g.nx);
        const int sy = wrap(y - set[p].y, g.ny);
        out[static_cast<std::size_t>((static_cast<std::int64_t>(x) * g.ny + y) * q + p)] =
            in[static_cast<std::size_t>((static_cast<std::int64_t>(sx) * g.ny + sy) * q + p)];
      }
    }
  }
  return out;
}

void collide_bgk(std::span<double> field, const LatticeGeometry& g, const VelocitySet& set,
                 const BgkParams& params) {
  const int q = set.q();
  const auto w = set.weights();
  const double cs2 = *set.speed_of_sound_sq();
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    double* f = field.data() + s * q;
    double rho = 0.0;
    double jx = 0.0;
    double jy = 0.0;
    for (int p = 0; p < q; ++p) {
      rho += f[p];
      jx += set[p].x * f[p];
      jy += set[p].y * f[p];
    }
    const double ux = jx / rho;
    const double uy = jy / rho;
    const double usq = ux * ux + uy * uy;
    for (int p = 0; p < q; ++p) {
      const double cu = set[p].x * ux + set[p].y * uy;
      const double feq = w[static_cast<std::size_t>(p)] * rho *
                         (1.0 + cu / cs2 + (cu * cu) / (2.0 * cs2 * cs2) - usq / (2.0 * cs2));
      f[p] = f[p] - (f[p] - feq) / params.tau;
    }
  }
}

void collide_surrogate(std::span<double> field, const SurrogateParams& params) {
  for (double& f : field) f = horner<double>(params.coeffs, f);
}

std::vector<double> step(std::span<const double> in, const LatticeGeometry& geometry,
                         const VelocitySet& set, const CollideMode& mode) {
  std::vector<double> out = propagate(in, geometry, set);
  if (const auto* bgk = std::get_if<BgkParams>(&mode)) {
    collide_bgk(out, geometry, set, *bgk);
  } else if (const auto* s = std::get_if<SurrogateParams>(&mode)) {
    collide_surrogate(out, *s);
  }
  return out;
}

}  // namespace lbm::reference
