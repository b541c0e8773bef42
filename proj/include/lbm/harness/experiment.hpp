#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "lbm/energy/backend.hpp"
#include "lbm/energy/trace.hpp"
#include "lbm/harness/config.hpp"
#include "lbm/harness/record.hpp"

namespace lbm::harness {

/// GB/s for a propagate run: one read and one write of every population value.
double propagate_bandwidth(int q, std::int64_t sites, int iterations, std::int64_t wall_ns);
double propagate_bandwidth(const ExperimentConfig& cfg, std::int64_t wall_ns);

/// Metrics of `kernel` from the interval between its "<kernel>:start" and
/// "<kernel>:stop" markers. `q` > 0 adds the propagate bandwidth.
KernelMetrics kernel_metrics(const energy::EnergyTrace& trace, std::string_view kernel,
                             std::int64_t sites, int iterations, int q = 0);

/// Opens the backend selected by cfg.backend. `auto` falls back to the
/// synthetic model when RAPL is missing and reports that through `warning`.
std::unique_ptr<energy::Backend> open_configured_backend(const ExperimentConfig& cfg,
                                                         std::string* warning = nullptr);

/// Runs warmup then cfg.repetitions timed repetitions (propagate loop, then
/// collide loop) and reports the median repetition per kernel. A caller
/// supplied backend replaces the configured one.
RunRecord run_experiment(const ExperimentConfig& cfg, energy::Backend* backend = nullptr);

using RecordSink = std::function<void(const RunRecord&)>;

/// Runs every combination in order. Invalid or unsupported combinations
/// become skipped records, failures become error records; each record is
/// handed to `sink` as soon as it exists.
std::vector<RunRecord> run_sweep(const SweepPlan& plan, const RecordSink& sink = {},
                                 energy::Backend* backend = nullptr);

/// True when all ok records with the same seed and model carry the same checksum.
bool checksums_agree(const std::vector<RunRecord>& records);

}  // namespace lbm::harness
