#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace lbm {

/// Where population storage is placed. On a flat-mode many-core part the
/// high-bandwidth memory shows up as its own NUMA node.
struct MemoryTarget {
  enum class Kind { Default, NumaNode };
  Kind kind = Kind::Default;
  int node = -1;

  static MemoryTarget default_target() { return {}; }
  static MemoryTarget numa_node(int id) { return {Kind::NumaNode, id}; }

  friend bool operator==(const MemoryTarget&, const MemoryTarget&) = default;
};

/// "Default" or "NumaNode(<id>)".
MemoryTarget parse_memory_target(std::string_view text);
std::string to_string(MemoryTarget target);

/// Number of configured NUMA nodes (1 when libnuma reports NUMA unsupported).
int numa_node_count();

/// Throws std::runtime_error when the target cannot be honoured on this
/// machine. NumaNode targets are refused on single-node machines.
void check_memory_target(MemoryTarget target);

/// Zero-initialised array of doubles, 64-byte aligned, placed on the
/// requested memory target.
class AlignedBuffer {
 public:
  static constexpr std::size_t kAlignment = 64;

  AlignedBuffer() = default;
  AlignedBuffer(std::size_t count, MemoryTarget target = {});
  AlignedBuffer(const AlignedBuffer& other);
  AlignedBuffer(AlignedBuffer&& other) noexcept;
  AlignedBuffer& operator=(AlignedBuffer other) noexcept;
  ~AlignedBuffer();

  [[nodiscard]] double* data() { return data_; }
  [[nodiscard]] const double* data() const { return data_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::span<double> span() { return {data_, size_}; }
  [[nodiscard]] std::span<const double> span() const { return {data_, size_}; }
  [[nodiscard]] MemoryTarget target() const { return target_; }

  friend void swap(AlignedBuffer& a, AlignedBuffer& b) noexcept;

 private:
  void release() noexcept;

  double* data_ = nullptr;
  std::size_t size_ = 0;
  std::size_t bytes_ = 0;
  MemoryTarget target_;
};

}  // namespace lbm
