#include "lbm/memory.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>
#include <numa.h>

#include "lbm/errors.hpp"

namespace lbm {

MemoryTarget parse_memory_target(std::string_view text) {
  if (text == "Default") return MemoryTarget::default_target();
  constexpr std::string_view prefix = "NumaNode(";
  if (text.starts_with(prefix) && text.ends_with(')')) {
    std::string_view digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    int node = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), node);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && node >= 0) {
      return MemoryTarget::numa_node(node);
    }
  }
  throw std::invalid_argument(fmt::format("bad memory target '{}'", text));
}

std::string to_string(MemoryTarget target) {
  if (target.kind == MemoryTarget::Kind::Default) return "Default";
  return fmt::format("NumaNode({})", target.node);
}

int numa_node_count() {
  if (numa_available() < 0) return 1;
  return numa_num_configured_nodes();
}

void check_memory_target(MemoryTarget target) {
  if (target.kind == MemoryTarget::Kind::Default) return;
  const int nodes = numa_node_count();
  if (nodes < 2) {
    throw CapabilityError(fmt::format(
        "memory target {} refused: machine has a single NUMA node", to_string(target)));
  }
  if (target.node < 0 || target.node > numa_max_node()) {
    throw CapabilityError(
        fmt::format("memory target {} refused: no such node", to_string(target)));
  }
}

AlignedBuffer::AlignedBuffer(std::size_t count, MemoryTarget target)
    : size_(count), target_(target) {
  bytes_ = (count * sizeof(double) + kAlignment - 1) / kAlignment * kAlignment;
  if (bytes_ == 0) bytes_ = kAlignment;
  if (target.kind == MemoryTarget::Kind::NumaNode) {
    check_memory_target(target);
    // numa_alloc_onnode returns page-aligned, zeroed pages
    data_ = static_cast<double*>(numa_alloc_onnode(bytes_, target.node));
    if (data_ == nullptr) throw std::bad_alloc();
  } else {
    data_ = static_cast<double*>(std::aligned_alloc(kAlignment, bytes_));
    if (data_ == nullptr) throw std::bad_alloc();
    std::memset(data_, 0, bytes_);
  }
}

AlignedBuffer::AlignedBuffer(const AlignedBuffer& other)
    : AlignedBuffer(other.size_, other.target_) {
  if (size_ != 0) std::memcpy(data_, other.data_, size_ * sizeof(double));
}

AlignedBuffer::AlignedBuffer(AlignedBuffer&& other) noexcept
    : data_(std::exchange(other.data_, nullptr)),
      size_(std::exchange(other.size_, 0)),
      bytes_(std::exchange(other.bytes_, 0)),
      target_(other.target_) {}

AlignedBuffer& AlignedBuffer::operator=(AlignedBuffer other) noexcept {
  swap(*this, other);
  return *this;
}

AlignedBuffer::~AlignedBuffer() { release(); }

void AlignedBuffer::release() noexcept {
  if (data_ == nullptr) return;
  if (target_.kind == MemoryTarget::Kind::NumaNode) {
    numa_free(data_, bytes_);
  } else {
    std::free(data_);
  }
  data_ = nullptr;
}

void swap(AlignedBuffer& a, AlignedBuffer& b) noexcept {
  using std::swap;
  swap(a.data_, b.data_);
  swap(a.size_, b.size_);
  swap(a.bytes_, b.bytes_);
  swap(a.target_, b.target_);
}

}  // namespace lbm
