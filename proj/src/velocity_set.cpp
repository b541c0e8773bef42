#include "lbm/velocity_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace lbm {

VelocitySet::VelocitySet(std::string name, std::vector<Velocity> vectors,
                         std::optional<std::vector<double>> weights,
                         std::optional<double> speed_of_sound_sq)
    : name_(std::move(name)),
      vectors_(std::move(vectors)),
      weights_(std::move(weights)),
      cs2_(speed_of_sound_sq) {
  if (vectors_.empty()) {
    throw std::invalid_argument("velocity set has no vectors");
  }
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const Velocity c = vectors_[i];
    for (std::size_t j = i + 1; j < vectors_.size(); ++j) {
      if (vectors_[j] == c) {
        throw std::invalid_argument(fmt::format("duplicate velocity ({}, {})", c.x, c.y));
      }
    }
    const Velocity neg{-c.x, -c.y};
    if (std::find(vectors_.begin(), vectors_.end(), neg) == vectors_.end()) {
      throw std::invalid_argument(
          fmt::format("velocity set not closed under negation: ({}, {})", c.x, c.y));
    }
    reach_x_ = std::max(reach_x_, std::abs(c.x));
    reach_y_ = std::max(reach_y_, std::abs(c.y));
  }
  reach_ = std::max(reach_x_, reach_y_);

  if (weights_) {
    if (weights_->size() != vectors_.size()) {
      throw std::invalid_argument("weight count does not match velocity count");
    }
    double sum = 0.0;
    for (double w : *weights_) {
      if (!(w > 0.0)) throw std::invalid_argument("velocity weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-14) {
      throw std::invalid_argument(fmt::format("velocity weights sum to {:.17g}, expected 1", sum));
    }
    if (!cs2_ || !(*cs2_ > 0.0)) {
      throw std::invalid_argument("weighted velocity set needs a positive speed_of_sound_sq");
    }
  }
}

std::span<const double> VelocitySet::weights() const {
  if (!weights_) throw std::logic_error(name_ + " carries no weights");
  return *weights_;
}

namespace {

std::vector<Velocity> enumerate_shells(std::span<const int> shells) {
  std::vector<int> norms(shells.begin(), shells.end());
  std::sort(norms.begin(), norms.end());
  norms.erase(std::unique(norms.begin(), norms.end()), norms.end());

  std::vector<Velocity> out;
  for (int n : norms) {
    if (n < 0) throw std::invalid_argument(fmt::format("negative shell norm {}", n));
    const int r = static_cast<int>(std::sqrt(static_cast<double>(n))) + 1;
    std::size_t before = out.size();
    for (int x = -r; x <= r; ++x) {
      for (int y = -r; y <= r; ++y) {
        if (x * x + y * y == n) out.push_back({x, y});
      }
    }
    if (out.size() == before) {
      throw std::invalid_argument(fmt::format("shell norm {} is not a sum of two squares", n));
    }
  }
  if (out.empty()) throw std::invalid_argument("shell list produces no velocities");
  return out;
}

}  // namespace

VelocitySet build_velocity_set(std::span<const int> shells, std::string name) {
  return VelocitySet(std::move(name), enumerate_shells(shells));
}

VelocitySet build_velocity_set(Model model) {
  switch (model) {
    case Model::D2Q9: {
      constexpr int shells[] = {0, 1, 2};
      auto vectors = enumerate_shells(shells);
      std::vector<double> weights;
      weights.reserve(vectors.size());
      for (const Velocity& c : vectors) {
        switch (c.norm_sq()) {
          case 0: weights.push_back(4.0 / 9.0); break;
          case 1: weights.push_back(1.0 / 9.0); break;
          default: weights.push_back(1.0 / 36.0); break;
        }
      }
      return VelocitySet("D2Q9", std::move(vectors), std::move(weights), 1.0 / 3.0);
    }
    case Model::D2Q37: {
      constexpr int shells[] = {0, 1, 2, 4, 5, 8, 9, 10};
      return VelocitySet("D2Q37", enumerate_shells(shells));
    }
  }
  throw std::invalid_argument("unknown velocity model");
}

Model parse_model(std::string_view text) {
  if (text == "D2Q9") return Model::D2Q9;
  if (text == "D2Q37") return Model::D2Q37;
  throw std::invalid_argument(fmt::format("unknown model '{}'", text));
}

std::string to_string(Model model) { return model == Model::D2Q9 ? "D2Q9" : "D2Q37"; }

}  // namespace lbm
