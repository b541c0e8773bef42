#include "lbm/energy/session.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace lbm::energy {

namespace {

class SampleSink {
 public:
  explicit SampleSink(EnergyTrace& trace) : trace_(trace) {}

  void add(const std::vector<CounterReading>& readings) {
    std::lock_guard lock(mutex_);
    for (const auto& r : readings) {
      auto it = last_.find(r.domain);
      // same-instant readings (virtual clocks, coarse timers) add nothing
      if (it != last_.end() && r.t_ns <= it->second) continue;
      last_[r.domain] = r.t_ns;
      trace_.samples.push_back({r.t_ns, r.domain, r.cumulative_uj});
    }
  }

 private:
  std::mutex mutex_;
  EnergyTrace& trace_;
  std::map<PowerDomain, std::int64_t> last_;
};

}  // namespace

EnergyTrace session_record(Backend& backend, double period_ms,
                           const std::function<void(const MarkFn& mark)>& body) {
  if (!(period_ms >= 1.0 && period_ms <= 1000.0)) {
    throw std::invalid_argument(fmt::format("sampling period {} ms outside [1, 1000]", period_ms));
  }
  const auto period_ns = static_cast<std::int64_t>(std::llround(period_ms * 1e6));
  Clock& clock = backend.clock();

  EnergyTrace trace;
  trace.domains = backend.domains();
  for (PowerDomain d : trace.domains) trace.counter_max_uj[d] = backend.counter_max_uj(d);
  if (!trace.has_domain(PowerDomain::Dram)) trace.flags.push_back("dram:unavailable");

  SampleSink sink(trace);
  std::mutex marker_mutex;
  std::vector<Marker> markers;
  bool partial = false;

  sink.add(backend.read());
  const std::int64_t start = clock.now_ns();

  clock.attach_sampler();
  std::jthread sampler([&](std::stop_token stop) {
    struct Detach {
      Clock& c;
      ~Detach() { c.detach_sampler(); }
    } detach{clock};
    std::int64_t next = start + period_ns;
    while (clock.sleep_until(next, stop)) {
      try {
        sink.add(backend.read());
      } catch (const std::exception&) {
        partial = true;
        return;
      }
      next += period_ns;
      const std::int64_t now = clock.now_ns();
      if (next <= now) next = now + period_ns;  // overran; skip missed ticks
    }
  });

  const MarkFn mark = [&](std::string_view label) {
    std::lock_guard lock(marker_mutex);
    markers.push_back({clock.now_ns(), std::string(label)});
  };

  try {
    body(mark);
  } catch (...) {
    sampler.request_stop();
    sampler.join();
    throw;
  }
  sampler.request_stop();
  sampler.join();

  if (!partial) {
    try {
      sink.add(backend.read());
    } catch (const std::exception&) {
      partial = true;
    }
  }
  trace.partial = partial;
  std::stable_sort(markers.begin(), markers.end(),
                   [](const Marker& a, const Marker& b) { return a.t_ns < b.t_ns; });
  trace.markers = std::move(markers);
  return trace;
}

}  // namespace lbm::energy
