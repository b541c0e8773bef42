#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "lbm/field.hpp"
#include "lbm/velocity_set.hpp"
#include "oracles.hpp"

using namespace lbm;

TEST_CASE("D2Q37 has 37 velocities from the eight shells") {
  const VelocitySet set = build_velocity_set(Model::D2Q37);
  CHECK(set.q() == 37);
  CHECK_FALSE(set.has_weights());
  CHECK(set.reach() == 3);

  // brute-force enumeration of the disk |c|^2 <= 10
  const auto disk = oracle::enumerate_disk(10);
  const int shells[] = {0, 1, 2, 4, 5, 8, 9, 10};
  const int expected_counts[] = {1, 4, 4, 4, 8, 4, 4, 8};
  int total = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(disk.at(shells[i]).size() == static_cast<std::size_t>(expected_counts[i]));
    total += static_cast<int>(disk.at(shells[i]).size());
    for (auto [x, y] : disk.at(shells[i])) {
      auto v = set.vectors();
      CHECK(std::find(v.begin(), v.end(), Velocity{x, y}) != v.end());
    }
  }
  CHECK(total == 37);
}

TEST_CASE("shell order does not change the set") {
  const int a[] = {10, 0, 5, 1, 9, 2, 8, 4};
  const VelocitySet shuffled = build_velocity_set(a);
  const VelocitySet d2q37 = build_velocity_set(Model::D2Q37);
  REQUIRE(shuffled.q() == d2q37.q());
  for (int p = 0; p < d2q37.q(); ++p) CHECK(shuffled[p] == d2q37[p]);
}

TEST_CASE("velocity sets sum to zero") {
  for (Model m : {Model::D2Q9, Model::D2Q37}) {
    const VelocitySet set = build_velocity_set(m);
    int sx = 0, sy = 0, zeros = 0;
    for (auto c : set.vectors()) {
      sx += c.x;
      sy += c.y;
      zeros += (c.x == 0 && c.y == 0);
    }
    CHECK(sx == 0);
    CHECK(sy == 0);
    CHECK(zeros == 1);
  }
}

TEST_CASE("D2Q9 weights") {
  const VelocitySet set = build_velocity_set(Model::D2Q9);
  CHECK(set.q() == 9);
  REQUIRE(set.has_weights());
  const auto w = set.weights();
  CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-14);
  CHECK(*set.speed_of_sound_sq() == doctest::Approx(1.0 / 3.0));
  // second moment isotropy: sum w c_a c_b = cs^2 delta_ab
  double xx = 0, yy = 0, xy = 0;
  for (int p = 0; p < 9; ++p) {
    xx += w[p] * set[p].x * set[p].x;
    yy += w[p] * set[p].y * set[p].y;
    xy += w[p] * set[p].x * set[p].y;
  }
  CHECK(xx == doctest::Approx(1.0 / 3.0));
  CHECK(yy == doctest::Approx(1.0 / 3.0));
  CHECK(xy == doctest::Approx(0.0));
}

TEST_CASE("custom shell errors") {
  const int bad[] = {3};
  CHECK_THROWS_AS(build_velocity_set(bad), std::invalid_argument);
  const int negative[] = {-1};
  CHECK_THROWS_AS(build_velocity_set(negative), std::invalid_argument);
  CHECK_THROWS_AS(build_velocity_set(std::span<const int>{}), std::invalid_argument);
  CHECK_THROWS_AS(parse_model("D3Q19"), std::invalid_argument);
  CHECK_THROWS_AS(VelocitySet("odd", {{1, 0}}), std::invalid_argument);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(LatticeGeometry::make(0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(LatticeGeometry::make(4, 4, -1), std::invalid_argument);
  CHECK(LatticeGeometry::make(4, 5, 3).sites() == 20);
}

TEST_CASE("init patterns") {
  const auto g = LatticeGeometry::make(4, 4, 3);
  SUBCASE("uniform") {
    auto f = init_field(g, 37, LayoutKind::aos(), Uniform{1.0});
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y)
        for (int p = 0; p < 37; ++p) CHECK(f.read({x, y}, p) == 1.0);
    CHECK(field_checksum(f) == 592.0);
  }
  SUBCASE("impulse") {
    auto f = init_field(g, 37, LayoutKind::csoa(4), Impulse{{2, 3}, 5, 7.0});
    CHECK(f.read({2, 3}, 5) == 7.0);
    CHECK(field_checksum(f) == 7.0);
    auto values = to_logical(f);
    CHECK(std::count(values.begin(), values.end(), 0.0) == 16 * 37 - 1);
  }
  SUBCASE("random is reproducible and layout blind") {
    auto a = init_field(g, 37, LayoutKind::aos(), RandomSeeded{42});
    auto b = init_field(g, 37, LayoutKind::caosoa(4), RandomSeeded{42});
    auto c = init_field(g, 37, LayoutKind::aos(), RandomSeeded{43});
    CHECK(std::bit_cast<std::uint64_t>(field_checksum(a)) ==
          std::bit_cast<std::uint64_t>(field_checksum(b)));
    CHECK(to_logical(a) == to_logical(b));
    CHECK(field_checksum(a) != field_checksum(c));
    for (double v : to_logical(a)) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
  SUBCASE("impulse outside the lattice") {
    CHECK_THROWS_AS(init_field(g, 9, LayoutKind::aos(), Impulse{{4, 0}, 0, 1.0}), std::out_of_range);
  }
}

TEST_CASE("moments") {
  const auto g = LatticeGeometry::make(4, 4, 1);
  const VelocitySet d2q9 = build_velocity_set(Model::D2Q9);
  SUBCASE("uniform field") {
    auto f = init_field(g, 9, LayoutKind::soa(), Uniform{1.0});
    const Moments m = moments(f, d2q9, {1, 2});
    CHECK(m.density == 9.0);
    CHECK(m.momentum[0] == 0.0);
    CHECK(m.momentum[1] == 0.0);
  }
  SUBCASE("impulse") {
    for (int p = 0; p < 9; ++p) {
      auto f = init_field(g, 9, LayoutKind::caosoa(2), Impulse{{3, 1}, p, 2.5});
      const Moments m = moments(f, d2q9, {3, 1});
      CHECK(m.density == 2.5);
      CHECK(m.momentum[0] == 2.5 * d2q9[p].x);
      CHECK(m.momentum[1] == 2.5 * d2q9[p].y);
    }
  }
  SUBCASE("random field against direct re-summation") {
    auto f = init_field(g, 9, LayoutKind::csoa(2), RandomSeeded{7});
    const auto values = to_logical(f);
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) {
        long double rho = 0, mx = 0, my = 0;
        for (int p = 0; p < 9; ++p) {
          const double v = values[(x * 4 + y) * 9 + p];
          rho += v;
          mx += d2q9[p].x * static_cast<long double>(v);
          my += d2q9[p].y * static_cast<long double>(v);
        }
        const Moments m = moments(f, d2q9, {x, y});
        CHECK(std::abs(m.density - static_cast<double>(rho)) <= 1e-15 * static_cast<double>(rho));
        CHECK(std::abs(m.momentum[0] - static_cast<double>(mx)) <= 1e-15 * static_cast<double>(rho));
        CHECK(std::abs(m.momentum[1] - static_cast<double>(my)) <= 1e-15 * static_cast<double>(rho));
      }
  }
  SUBCASE("q mismatch") {
    auto f = init_field(g, 37, LayoutKind::aos(), Uniform{1.0});
    CHECK_THROWS_AS(moments(f, d2q9, {0, 0}), std::invalid_argument);
  }
}

TEST_CASE("uniform moments vanish for any symmetric set") {
  const int shells[] = {0, 1, 4, 5, 25};
  const VelocitySet set = build_velocity_set(shells);
  const auto g = LatticeGeometry::make(3, 5, set.reach());
  auto f = init_field(g, set.q(), LayoutKind::aos(), Uniform{0.5});
  const Moments m = moments(f, set, {2, 4});
  CHECK(m.density == 0.5 * set.q());
  CHECK(m.momentum[0] == 0.0);
  CHECK(m.momentum[1] == 0.0);
}

TEST_CASE("checksum compensates") {
  const auto g = LatticeGeometry::make(1, 3, 0);
  PopulationField f(g, 1, LayoutKind::aos());
  f.write({0, 0}, 0, 1e16);
  f.write({0, 1}, 0, 1.0);
  f.write({0, 2}, 0, -1e16);
  CHECK(field_checksum(f) == 1.0);
}
