#pragma once

#include <stdexcept>

namespace lbm {

/// A required hardware or OS facility is missing on this machine.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lbm
