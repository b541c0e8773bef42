#include "lbm/harness/experiment.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include <fmt/format.h>

#include "lbm/energy/session.hpp"
#include "lbm/errors.hpp"
#include "lbm/field.hpp"
#include "lbm/harness/affinity.hpp"
#include "lbm/kernels.hpp"

namespace lbm::harness {

using energy::PowerDomain;

double propagate_bandwidth(int q, std::int64_t sites, int iterations, std::int64_t wall_ns) {
  const double bytes = 2.0 * q * 8.0 * static_cast<double>(sites) * iterations;
  return bytes / static_cast<double>(wall_ns);
}

double propagate_bandwidth(const ExperimentConfig& cfg, std::int64_t wall_ns) {
  return propagate_bandwidth(build_velocity_set(cfg.model).q(), cfg.sites(), cfg.iterations,
                             wall_ns);
}

KernelMetrics kernel_metrics(const energy::EnergyTrace& trace, std::string_view kernel,
                             std::int64_t sites, int iterations, int q) {
  const auto start = trace.marker(fmt::format("{}:start", kernel));
  const auto stop = trace.marker(fmt::format("{}:stop", kernel));
  if (!start || !stop) {
    throw std::runtime_error(fmt::format("trace lacks the markers of kernel '{}'", kernel));
  }
  const std::int64_t wall = stop->t_ns - start->t_ns;
  if (wall <= 0) {
    throw std::runtime_error(fmt::format("kernel '{}' has an empty timed interval", kernel));
  }
  KernelMetrics m;
  m.kernel = std::string(kernel);
  m.sites = sites;
  m.iterations = iterations;
  m.wall_ns_total = m.wall_ns_min = m.wall_ns_max = wall;
  const double updates = static_cast<double>(sites) * iterations;
  m.ns_per_site = static_cast<double>(wall) / updates;
  const double wall_s = static_cast<double>(wall) * 1e-9;
  for (PowerDomain d : trace.domains) {
    const double p = energy::interval_energy(trace, start->t_ns, stop->t_ns, d) / wall_s;
    m.p_avg_w[d] = p;
    m.p_avg_w_summed += p;
    m.e_s_per_site_j_domain[d] = energy::energy_to_solution(wall_s, p) / updates;
  }
  m.e_s_joules = energy::energy_to_solution(wall_s, m.p_avg_w_summed);
  m.e_s_per_site_j = m.e_s_joules / updates;
  if (q > 0) m.bandwidth_gbs = propagate_bandwidth(q, sites, iterations, wall);
  return m;
}

std::unique_ptr<energy::Backend> open_configured_backend(const ExperimentConfig& cfg,
                                                         std::string* warning) {
  const energy::SyntheticSpec synthetic{
      energy::SyntheticPowerModel::constant(cfg.synthetic_package_w, cfg.synthetic_dram_w)};
  switch (cfg.backend) {
    case BackendKind::Rapl: return energy::open_backend(energy::RaplSpec{cfg.rapl_root});
    case BackendKind::Synthetic: return energy::open_backend(synthetic);
    case BackendKind::Auto:
      try {
        return energy::open_backend(energy::RaplSpec{cfg.rapl_root});
      } catch (const CapabilityError& e) {
        if (warning) *warning = fmt::format("rapl unavailable ({}); synthetic backend in use", e.what());
        return energy::open_backend(synthetic);
      }
  }
  throw std::invalid_argument("unknown backend kind");
}

namespace {

struct Repetition {
  std::vector<KernelMetrics> kernels;
  double checksum = 0.0;
};

void propagate_loop(StepBuffers& buf, const VelocitySet& set, int iterations, int workers) {
  for (int i = 0; i < iterations; ++i) {
    halo_exchange(buf.prv());
    propagate(buf.prv(), buf.nxt(), set, workers);
    buf.swap();
  }
}

void collide_loop(StepBuffers& buf, const VelocitySet& set, const CollideMode& mode,
                  int iterations, int workers) {
  for (int i = 0; i < iterations; ++i) collide(buf.prv(), set, mode, workers);
}

Repetition run_once(const ExperimentConfig& cfg, const VelocitySet& set,
                    const LatticeGeometry& geometry, const CollideMode& mode,
                    energy::Backend& backend, std::vector<std::string>& warnings) {
  const bool collides = !std::holds_alternative<NoCollide>(mode);
  StepBuffers buf(init_field(geometry, set.q(), cfg.layout, RandomSeeded{cfg.seed},
                             cfg.memory_target, cfg.padding_mode()));
  propagate_loop(buf, set, cfg.warmup_iterations, cfg.threads);
  if (collides) collide_loop(buf, set, mode, cfg.warmup_iterations, cfg.threads);

  const energy::EnergyTrace trace =
      energy::session_record(backend, cfg.sampler_period_ms, [&](const energy::MarkFn& mark) {
        mark("propagate:start");
        propagate_loop(buf, set, cfg.iterations, cfg.threads);
        mark("propagate:stop");
        if (collides) {
          mark("collide:start");
          collide_loop(buf, set, mode, cfg.iterations, cfg.threads);
          mark("collide:stop");
        }
      });
  if (trace.partial) warnings.push_back("energy trace partial: sampler failed during the run");
  for (const auto& flag : trace.flags) {
    if (std::find(warnings.begin(), warnings.end(), flag) == warnings.end()) {
      warnings.push_back(flag);
    }
  }

  Repetition rep;
  rep.kernels.push_back(kernel_metrics(trace, "propagate", cfg.sites(), cfg.iterations, set.q()));
  if (collides) rep.kernels.push_back(kernel_metrics(trace, "collide", cfg.sites(), cfg.iterations));
  rep.checksum = field_checksum(buf.prv());
  return rep;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg, energy::Backend* backend) {
  validate(cfg);
  check_memory_target(cfg.memory_target);

  RunRecord record;
  record.config = cfg;
  record.timestamp = utc_timestamp();
  record.machine = probe_machine();

  std::unique_ptr<energy::Backend> owned;
  if (backend == nullptr) {
    std::string warning;
    owned = open_configured_backend(cfg, &warning);
    if (!warning.empty()) record.warnings.push_back(warning);
    backend = owned.get();
  }
  record.backend = backend->name();
  const auto domains = backend->domains();
  record.machine.dram_available =
      std::find(domains.begin(), domains.end(), PowerDomain::Dram) != domains.end();

  if (cfg.pin) {
    try {
      record.affinity = to_json(pin_workers(cfg.threads));
      if (!record.affinity.at("honored").get<bool>()) {
        record.warnings.push_back(
            fmt::format("affinity: {}", record.affinity.at("note").get<std::string>()));
      }
    } catch (const std::exception& e) {
      record.affinity = {{"requested", cfg.threads}, {"honored", false}, {"note", e.what()}};
      record.warnings.push_back(fmt::format("affinity: {}", e.what()));
    }
  }

  const VelocitySet set = build_velocity_set(cfg.model);
  const LatticeGeometry geometry = LatticeGeometry::make(cfg.nx, cfg.ny, set.reach());
  const CollideMode mode = cfg.collide_mode.to_mode();

  std::vector<Repetition> reps;
  for (int r = 0; r < cfg.repetitions; ++r) {
    reps.push_back(run_once(cfg, set, geometry, mode, *backend, record.warnings));
  }
  record.checksum = reps.front().checksum;
  for (const auto& rep : reps) {
    if (std::bit_cast<std::uint64_t>(rep.checksum) !=
        std::bit_cast<std::uint64_t>(record.checksum)) {
      throw std::runtime_error("checksum differs between repetitions of one configuration");
    }
  }

  for (std::size_t k = 0; k < reps.front().kernels.size(); ++k) {
    std::vector<const KernelMetrics*> runs;
    for (const auto& rep : reps) runs.push_back(&rep.kernels[k]);
    std::stable_sort(runs.begin(), runs.end(), [](const auto* a, const auto* b) {
      return a->wall_ns_total < b->wall_ns_total;
    });
    KernelMetrics median = *runs[(runs.size() - 1) / 2];
    median.wall_ns_min = runs.front()->wall_ns_total;
    median.wall_ns_max = runs.back()->wall_ns_total;
    record.kernels.push_back(median);
  }
  return record;
}

std::vector<RunRecord> run_sweep(const SweepPlan& plan, const RecordSink& sink,
                                 energy::Backend* backend) {
  if (plan.size() == 0) throw std::invalid_argument("sweep plan is empty");
  std::vector<RunRecord> records;
  for (const ExperimentConfig& cfg : plan.combinations()) {
    RunRecord record;
    try {
      record = run_experiment(cfg, backend);
    } catch (const std::invalid_argument& e) {
      record.status = RunStatus::Skipped;
      record.reason = e.what();
    } catch (const CapabilityError& e) {
      record.status = RunStatus::Skipped;
      record.reason = e.what();
    } catch (const std::exception& e) {
      record.status = RunStatus::Error;
      record.reason = e.what();
    }
    if (record.status != RunStatus::Ok) {
      record.config = cfg;
      record.timestamp = utc_timestamp();
      record.machine = probe_machine();
    }
    if (sink) sink(record);
    records.push_back(std::move(record));
  }
  return records;
}

bool checksums_agree(const std::vector<RunRecord>& records) {
  using Key = std::tuple<std::uint64_t, Model, int, int, int, int, std::string>;
  std::map<Key, std::uint64_t> seen;
  for (const auto& r : records) {
    if (r.status != RunStatus::Ok) continue;
    const auto& c = r.config;
    const Key key{c.seed, c.model, c.nx, c.ny, c.iterations, c.warmup_iterations,
                  to_string(c.collide_mode)};
    const auto bits = std::bit_cast<std::uint64_t>(r.checksum);
    const auto [it, inserted] = seen.emplace(key, bits);
    if (!inserted && it->second != bits) return false;
  }
  return true;
}

}  // namespace lbm::harness
