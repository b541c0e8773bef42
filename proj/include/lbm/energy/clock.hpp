#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <stop_token>

namespace lbm::energy {

/// Time source for sampling sessions. Samples and markers of one session are
/// stamped by the same clock.
class Clock {
 public:
  virtual ~Clock() = default;

  [[nodiscard]] virtual std::int64_t now_ns() const = 0;

  /// Blocks until now_ns() >= deadline_ns. Returns false if `stop` was
  /// requested first.
  virtual bool sleep_until(std::int64_t deadline_ns, std::stop_token stop) = 0;

  /// Sampler threads bracket their lifetime with these so that a clock which
  /// drives time itself knows when a sampler may still want to run.
  virtual void attach_sampler() {}
  virtual void detach_sampler() noexcept {}
};

/// std::chrono::steady_clock.
class SteadyClock final : public Clock {
 public:
  [[nodiscard]] std::int64_t now_ns() const override;
  bool sleep_until(std::int64_t deadline_ns, std::stop_token stop) override;
};

/// Discrete-event clock for deterministic tests. Time moves only through
/// advance(); every sampler deadline passed on the way is honoured in order,
/// with now_ns() equal to that deadline while the sampler runs.
class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(std::int64_t start_ns = 0) : now_(start_ns) {}

  [[nodiscard]] std::int64_t now_ns() const override;
  bool sleep_until(std::int64_t deadline_ns, std::stop_token stop) override;
  void attach_sampler() override;
  void detach_sampler() noexcept override;

  void advance(std::int64_t dt_ns);

 private:
  mutable std::mutex mutex_;
  std::condition_variable_any cv_;
  std::int64_t now_;
  std::int64_t deadline_ = 0;
  bool sleeping_ = false;
  // a sampler is running and has not yet gone back to sleep
  bool awake_ = false;
};

}  // namespace lbm::energy
