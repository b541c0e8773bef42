#include "lbm/report/validate.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "lbm/energy/session.hpp"
#include "lbm/field.hpp"
#include "lbm/harness/experiment.hpp"
#include "lbm/kernels.hpp"
#include "lbm/reference.hpp"

namespace lbm::report {

namespace {

constexpr LayoutKind kLayouts[] = {LayoutKind::aos(), LayoutKind::soa(), LayoutKind::csoa(8),
                                   LayoutKind::caosoa(8)};

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename... Args>
void require(bool ok, fmt::format_string<Args...> f, Args&&... args) {
  if (!ok) throw Failure(fmt::format(f, std::forward<Args>(args)...));
}

SuiteResult timed(std::string id, std::string name, const std::function<std::string()>& body) {
  SuiteResult r;
  r.id = std::move(id);
  r.name = std::move(name);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.detail = body();
    r.passed = true;
  } catch (const std::exception& e) {
    r.detail = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

double logical_checksum(const LatticeGeometry& g, int q, std::span<const double> values) {
  PopulationField f(g, q, LayoutKind::aos());
  assign_logical(f, values);
  return field_checksum(f);
}

}  // namespace

SuiteResult suite_layout_equivalence() {
  return timed("1", "cross-layout equivalence", [] {
    const VelocitySet set = build_velocity_set(Model::D2Q37);
    const auto g = LatticeGeometry::make(32, 32, set.reach());
    const CollideMode mode = SurrogateParams::from_seed(64);
    for (std::uint64_t seed : {1, 2, 3}) {
      std::vector<double> ref =
          to_logical(init_field(g, set.q(), LayoutKind::aos(), RandomSeeded{seed}));
      for (int t = 0; t < 10; ++t) ref = reference::step(ref, g, set, mode);
      const double expected = logical_checksum(g, set.q(), ref);
      for (LayoutKind layout : kLayouts) {
        StepBuffers buf(init_field(g, set.q(), layout, RandomSeeded{seed}));
        for (int t = 0; t < 10; ++t) step(buf, set, mode);
        const double got = field_checksum(buf.prv());
        require(same_bits(got, expected), "seed {} layout {}: checksum {:.17g} != oracle {:.17g}",
                seed, to_string(layout), got, expected);
      }
    }
    return std::string("3 seeds x 4 layouts bitwise equal to the scalar oracle");
  });
}

SuiteResult suite_propagate_translation() {
  return timed("2", "propagate translation", [] {
    const VelocitySet set = build_velocity_set(Model::D2Q37);
    const int nx = 16, ny = 16, steps = 7;
    const auto g = LatticeGeometry::make(nx, ny, set.reach());
    const SiteCoord origin{3, 5};
    for (LayoutKind layout : kLayouts) {
      for (int p = 0; p < set.q(); ++p) {
        StepBuffers buf(init_field(g, set.q(), layout, Impulse{origin, p, 1.0}));
        for (int t = 0; t < steps; ++t) step(buf, set, NoCollide{});
        const auto c = set[p];
        const SiteCoord want{((origin.x + steps * c.x) % nx + nx) % nx,
                             ((origin.y + steps * c.y) % ny + ny) % ny};
        require(buf.prv().read(want, p) == 1.0 && field_checksum(buf.prv()) == 1.0,
                "layout {} velocity ({},{}) did not arrive at ({},{})", to_string(layout), c.x,
                c.y, want.x, want.y);
      }
    }
    return fmt::format("{} velocities x 4 layouts translate exactly after {} steps", set.q(),
                       steps);
  });
}

SuiteResult suite_bgk_conservation() {
  return timed("3", "BGK conservation", [] {
    const VelocitySet set = build_velocity_set(Model::D2Q9);
    const auto g = LatticeGeometry::make(64, 64, set.reach());
    const BgkParams params = BgkParams::make(0.8);

    auto totals = [&](const PopulationField& f) {
      std::array<long double, 3> t{};
      for (int x = 0; x < g.nx; ++x) {
        for (int y = 0; y < g.ny; ++y) {
          const Moments m = moments(f, set, {x, y});
          t[0] += m.density;
          t[1] += m.momentum[0];
          t[2] += m.momentum[1];
        }
      }
      return t;
    };
    StepBuffers buf(init_field(g, set.q(), LayoutKind::soa(), RandomSeeded{2024}));
    const auto before = totals(buf.prv());
    for (int t = 0; t < 200; ++t) step(buf, set, params);
    const auto after = totals(buf.prv());
    const double mass_drift = static_cast<double>(std::abs(after[0] - before[0]) / before[0]);
    const double mom_drift = static_cast<double>(
        std::max(std::abs(after[1] - before[1]), std::abs(after[2] - before[2])) / before[0]);
    require(mass_drift <= 1e-10, "mass drift {:.3e} > 1e-10", mass_drift);
    require(mom_drift <= 1e-10, "momentum drift {:.3e} > 1e-10", mom_drift);

    PopulationField eq(g, set.q(), LayoutKind::soa());
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> rho_d(0.9, 1.1), u_d(-0.05, 0.05);
    const double cs2 = *set.speed_of_sound_sq();
    for (int x = 0; x < g.nx; ++x) {
      for (int y = 0; y < g.ny; ++y) {
        const double rho = rho_d(rng), ux = u_d(rng), uy = u_d(rng);
        for (int p = 0; p < set.q(); ++p) {
          const double cu = set[p].x * ux + set[p].y * uy;
          const double uu = ux * ux + uy * uy;
          eq.write({x, y}, p,
                   set.weights()[static_cast<std::size_t>(p)] * rho *
                       (1.0 + cu / cs2 + cu * cu / (2.0 * cs2 * cs2) - uu / (2.0 * cs2)));
        }
      }
    }
    PopulationField relaxed = eq;
    collide_bgk(relaxed, set, params);
    double worst = 0.0;
    for (int x = 0; x < g.nx; ++x) {
      for (int y = 0; y < g.ny; ++y) {
        for (int p = 0; p < set.q(); ++p) {
          worst = std::max(worst, std::abs(relaxed.read({x, y}, p) - eq.read({x, y}, p)));
        }
      }
    }
    require(worst <= 1e-15, "equilibrium changed by {:.3e} > 1e-15", worst);
    return fmt::format("mass drift {:.2e}, momentum drift {:.2e}, equilibrium change {:.2e}",
                       mass_drift, mom_drift, worst);
  });
}

SuiteResult suite_energy_integration() {
  return timed("4", "energy integration", [] {
    using namespace energy;
    constexpr std::int64_t s = 1'000'000'000;
    std::string detail;
    for (std::uint64_t counter_max : {std::uint64_t{262'144'000'000}, std::uint64_t{300'000'000}}) {
      SyntheticPowerModel model;
      model.segments = {{2 * s, 50.0, 5.0}, {2 * s, 150.0, 10.0}};
      model.counter_max_uj = counter_max;
      auto clock = std::make_shared<VirtualClock>(0);
      SyntheticBackend backend(model, clock);
      const EnergyTrace trace =
          session_record(backend, 10.0, [&](const MarkFn&) { clock->advance(4 * s); });
      for (auto [domain, expected] : {std::pair{PowerDomain::Package, 400.0},
                                      std::pair{PowerDomain::Dram, 30.0}}) {
        const double e = interval_energy(trace, 0, 4 * s, domain);
        const double wraps = std::floor(expected * 1e6 / static_cast<double>(counter_max));
        const double tol = 1e-6 * wraps + 1e-15 * expected;
        require(std::abs(e - expected) <= tol, "{} over [0, 4 s] = {:.9f} J, expected {} J",
                to_string(domain), e, expected);
        detail += fmt::format("{}{} {:.6f} J ({} wraps)", detail.empty() ? "" : ", ",
                              to_string(domain), e, wraps);
      }
    }
    return detail;
  });
}

SuiteResult suite_metric_identities() {
  return timed("5", "metric identities", [] {
    using namespace harness;
    const double hand = propagate_bandwidth(37, 1'000'000, 100, 1'000'000'000);
    require(std::abs(hand - 59.2) <= 1e-12, "bandwidth hand value {:.15g} != 59.2", hand);
    int checked = 0;
    for (LayoutKind layout : {LayoutKind::aos(), LayoutKind::csoa(8)}) {
      for (Model model : {Model::D2Q37, Model::D2Q9}) {
        ExperimentConfig cfg;
        cfg.nx = 16;
        cfg.ny = 16;
        cfg.model = model;
        cfg.layout = layout;
        cfg.iterations = 5;
        cfg.warmup_iterations = 1;
        cfg.backend = BackendKind::Synthetic;
        cfg.sampler_period_ms = 5;
        cfg.collide_mode =
            model == Model::D2Q9 ? CollideChoice::bgk(0.8) : CollideChoice::surrogate(32);
        const RunRecord direct = run_experiment(cfg);
        const RunRecord r = record_from_json(nlohmann::json::parse(to_json(direct).dump()));
        require(r.config == cfg, "config echo differs after JSON round trip");
        const int q = build_velocity_set(model).q();
        for (const auto& k : r.kernels) {
          const double updates = static_cast<double>(cfg.sites()) * cfg.iterations;
          const double wall_s = static_cast<double>(k.wall_ns_total) * 1e-9;
          require(std::abs(k.e_s_joules - wall_s * k.p_avg_w_summed) <= 1e-9 * k.e_s_joules,
                  "{}: e_s != wall_s * p_avg", k.kernel);
          require(std::llround(k.ns_per_site * updates) == k.wall_ns_total,
                  "{}: ns_per_site * sites * iterations != wall_ns", k.kernel);
          require(std::abs(k.e_s_per_site_j * updates - k.e_s_joules) <= 1e-9 * k.e_s_joules,
                  "{}: per-site normalization", k.kernel);
          if (k.kernel == "propagate") {
            require(k.bandwidth_gbs.has_value() &&
                        std::abs(*k.bandwidth_gbs -
                                 propagate_bandwidth(q, cfg.sites(), cfg.iterations,
                                                     k.wall_ns_total)) <= 1e-12 * *k.bandwidth_gbs,
                    "propagate bandwidth mismatch");
          }
          ++checked;
        }
      }
    }
    return fmt::format("{} kernel records satisfy the identities; 59.2 GB/s hand value", checked);
  });
}

SuiteResult suite_thread_determinism() {
  return timed("7", "thread-count determinism", [] {
    const VelocitySet d2q37 = build_velocity_set(Model::D2Q37);
    const VelocitySet d2q9 = build_velocity_set(Model::D2Q9);
    const CollideMode surrogate = SurrogateParams::from_seed(90);
    const CollideMode bgk = BgkParams::make(0.8);
    int comparisons = 0;
    for (LayoutKind layout : kLayouts) {
      for (const auto* set : {&d2q37, &d2q9}) {
        const auto g = LatticeGeometry::make(32, 24, set->reach());
        const CollideMode& mode = set == &d2q9 ? bgk : surrogate;
        double prop_ref = 0.0, coll_ref = 0.0;
        for (int workers : {1, 2, 4}) {
          PopulationField a = init_field(g, set->q(), layout, RandomSeeded{77});
          PopulationField b(g, set->q(), layout);
          halo_exchange(a);
          propagate(a, b, *set, workers);
          const double prop = field_checksum(b);
          collide(b, *set, mode, workers);
          const double coll = field_checksum(b);
          if (workers == 1) {
            prop_ref = prop;
            coll_ref = coll;
            continue;
          }
          require(same_bits(prop, prop_ref) && same_bits(coll, coll_ref),
                  "{} {} differs between 1 and {} workers", set->name(), to_string(layout),
                  workers);
          comparisons += 2;
        }
      }
    }
    return fmt::format("{} kernel checksums identical across 1, 2, 4 workers", comparisons);
  });
}

std::vector<SuiteResult> run_validation(const std::function<void(const SuiteResult&)>& progress) {
  std::vector<SuiteResult> results;
  for (auto suite : {suite_layout_equivalence, suite_propagate_translation, suite_bgk_conservation,
                     suite_energy_integration, suite_metric_identities,
                     suite_thread_determinism}) {
    results.push_back(suite());
    if (progress) progress(results.back());
  }
  return results;
}

}  // namespace lbm::report
