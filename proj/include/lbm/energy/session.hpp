#pragma once

#include <functional>
#include <string_view>

#include "lbm/energy/backend.hpp"
#include "lbm/energy/trace.hpp"

namespace lbm::energy {

/// Inserts a marker stamped with the backend clock. Safe to call from any
/// thread while the session runs.
using MarkFn = std::function<void(std::string_view label)>;

inline constexpr double kDefaultSamplePeriodMs = 50.0;

/// Samples every backend domain each `period_ms` on a separate thread while
/// `body` runs. One sample is taken right before and one right after the
/// body, so the trace always brackets it. A failing read stops sampling and
/// marks the trace partial; exceptions from `body` propagate after the
/// sampler has been stopped.
///
/// Throws std::invalid_argument unless 1 <= period_ms <= 1000.
EnergyTrace session_record(Backend& backend, double period_ms,
                           const std::function<void(const MarkFn& mark)>& body);

}  // namespace lbm::energy
