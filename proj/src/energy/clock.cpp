#include "lbm/energy/clock.hpp"

#include <algorithm>
#include <chrono>

namespace lbm::energy {

std::int64_t SteadyClock::now_ns() const {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool SteadyClock::sleep_until(std::int64_t deadline_ns, std::stop_token stop) {
  std::mutex m;
  std::condition_variable_any cv;
  std::unique_lock lock(m);
  const std::chrono::steady_clock::time_point deadline{std::chrono::nanoseconds(deadline_ns)};
  cv.wait_until(lock, stop, deadline, [] { return false; });
  return !stop.stop_requested();
}

std::int64_t VirtualClock::now_ns() const {
  std::lock_guard lock(mutex_);
  return now_;
}

bool VirtualClock::sleep_until(std::int64_t deadline_ns, std::stop_token stop) {
  std::unique_lock lock(mutex_);
  sleeping_ = true;
  deadline_ = deadline_ns;
  awake_ = false;
  cv_.notify_all();
  const bool reached = cv_.wait(lock, stop, [&] { return now_ >= deadline_; });
  sleeping_ = false;
  awake_ = reached;
  cv_.notify_all();
  return reached;
}

void VirtualClock::attach_sampler() {
  std::lock_guard lock(mutex_);
  awake_ = true;
}

void VirtualClock::detach_sampler() noexcept {
  std::lock_guard lock(mutex_);
  sleeping_ = false;
  awake_ = false;
  cv_.notify_all();
}

void VirtualClock::advance(std::int64_t dt_ns) {
  std::unique_lock lock(mutex_);
  const std::int64_t target = now_ + std::max<std::int64_t>(dt_ns, 0);
  for (;;) {
    cv_.wait(lock, [&] { return !awake_; });
    if (sleeping_ && deadline_ <= target) {
      now_ = std::max(now_, deadline_);
      awake_ = true;
      cv_.notify_all();
      continue;
    }
    break;
  }
  now_ = target;
  cv_.notify_all();
}

}  // namespace lbm::energy
