#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "lbm/energy/backend.hpp"
#include "lbm/energy/session.hpp"
#include "lbm/energy/trace.hpp"

using namespace lbm::energy;
namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kSecond = 1'000'000'000;

SyntheticPowerModel two_phase(std::uint64_t counter_max = 262'144'000'000) {
  SyntheticPowerModel m;
  m.segments = {{2 * kSecond, 50.0, 5.0}, {2 * kSecond, 150.0, 10.0}};
  m.counter_max_uj = counter_max;
  return m;
}

// Runs a virtual-clock session whose body lasts `duration_ns`.
EnergyTrace virtual_session(const SyntheticPowerModel& model, double period_ms,
                            std::int64_t duration_ns) {
  auto clock = std::make_shared<VirtualClock>(0);
  SyntheticBackend backend(model, clock);
  return session_record(backend, period_ms, [&](const MarkFn& mark) {
    mark("start");
    clock->advance(duration_ns);
    mark("stop");
  });
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

struct FakePowercap {
  fs::path root;
  explicit FakePowercap(const std::string& tag) {
    root = fs::temp_directory_path() / ("lbm_powercap_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~FakePowercap() { fs::remove_all(root); }
  void zone(const std::string& dir, const std::string& name, const std::string& energy,
            const std::string& max) {
    write_file(root / dir / "name", name + "\n");
    write_file(root / dir / "energy_uj", energy);
    write_file(root / dir / "max_energy_range_uj", max);
  }
};

class FailingBackend final : public Backend {
 public:
  explicit FailingBackend(int good_reads) : good_(good_reads) {}
  std::string name() const override { return "failing"; }
  std::vector<PowerDomain> domains() const override { return {PowerDomain::Package}; }
  std::uint64_t counter_max_uj(PowerDomain) const override { return 1000; }
  std::vector<CounterReading> read() override {
    if (good_-- <= 0) throw std::runtime_error("sensor gone");
    return {{PowerDomain::Package, clock_.now_ns(), 1}};
  }
  Clock& clock() override { return clock_; }

 private:
  int good_;
  SteadyClock clock_;
};

}  // namespace

TEST_CASE("synthetic backend counters") {
  auto clock = std::make_shared<VirtualClock>(0);
  SUBCASE("constant power") {
    SyntheticBackend b(SyntheticPowerModel::constant(100.0, 0.0), clock);
    const auto r0 = b.read();
    clock->advance(kSecond);
    const auto r1 = b.read();
    CHECK(r1[0].cumulative_uj - r0[0].cumulative_uj == 100'000'000);
    CHECK(r1[0].t_ns - r0[0].t_ns == kSecond);
  }
  SUBCASE("counter wraps at its range") {
    SyntheticPowerModel m = SyntheticPowerModel::constant(1000.0, 0.0);
    m.counter_max_uj = 262'144'000'000;  // reached after 262.144 s at 1 kW
    SyntheticBackend b(m, clock);
    clock->advance(262 * kSecond);
    const auto before = b.read()[0].cumulative_uj;
    clock->advance(kSecond);
    const auto after = b.read()[0].cumulative_uj;
    CHECK(before == 262'000'000'000);
    CHECK(after < before);
    CHECK(after == 263'000'000'000 - 262'144'000'000);
  }
  SUBCASE("no dram domain") {
    SyntheticPowerModel m = SyntheticPowerModel::constant(10.0, 0.0);
    m.has_dram = false;
    SyntheticBackend b(m, clock);
    CHECK(b.domains() == std::vector<PowerDomain>{PowerDomain::Package});
  }
  SUBCASE("model validation") {
    SyntheticPowerModel m;
    CHECK_THROWS_AS(SyntheticBackend(m, clock), std::invalid_argument);
    m.segments = {{0, 1.0, 1.0}};
    CHECK_THROWS_AS(SyntheticBackend(m, clock), std::invalid_argument);
    m.segments = {{10, -1.0, 1.0}};
    CHECK_THROWS_AS(SyntheticBackend(m, clock), std::invalid_argument);
  }
}

TEST_CASE("RAPL backend against a powercap tree") {
  SUBCASE("missing tree is a capability error") {
    CHECK_THROWS_AS(RaplBackend::open("/nonexistent/powercap"), CapabilityError);
    CHECK_THROWS_AS(open_backend(RaplSpec{"/nonexistent/powercap"}), CapabilityError);
  }
  SUBCASE("package and dram zones") {
    FakePowercap pc("single");
    pc.zone("intel-rapl:0", "package-0", "123456\n", "262143328850\n");
    pc.zone("intel-rapl:0:0", "core", "5\n", "262143328850\n");
    pc.zone("intel-rapl:0:1", "dram", "777\n", "65712999613\n");
    pc.zone("intel-rapl:1", "psys", "1\n", "10\n");
    auto clock = std::make_shared<VirtualClock>(42);
    auto b = RaplBackend::open(pc.root, clock);
    CHECK(b->domains() == std::vector<PowerDomain>{PowerDomain::Package, PowerDomain::Dram});
    CHECK(b->counter_max_uj(PowerDomain::Package) == 262143328850ULL);
    CHECK(b->counter_max_uj(PowerDomain::Dram) == 65712999613ULL);
    auto r = b->read();
    REQUIRE(r.size() == 2);
    CHECK(r[0].cumulative_uj == 123456);
    CHECK(r[0].t_ns == 42);
    CHECK(r[1].cumulative_uj == 777);
    write_file(pc.root / "intel-rapl:0" / "energy_uj", "123999\n");
    CHECK(b->read()[0].cumulative_uj == 123999);
    write_file(pc.root / "intel-rapl:0" / "energy_uj", "garbage\n");
    CHECK_THROWS_AS(b->read(), std::runtime_error);
  }
  SUBCASE("package only") {
    FakePowercap pc("pkgonly");
    pc.zone("intel-rapl:0", "package-0", "1\n", "100\n");
    auto b = RaplBackend::open(pc.root);
    CHECK(b->domains() == std::vector<PowerDomain>{PowerDomain::Package});
    CHECK_THROWS_AS((void)b->counter_max_uj(PowerDomain::Dram), std::invalid_argument);
  }
  SUBCASE("unreadable counters") {
    FakePowercap pc("bad");
    pc.zone("intel-rapl:0", "package-0", "not-a-number\n", "100\n");
    CHECK_THROWS_AS(RaplBackend::open(pc.root), CapabilityError);
  }
  SUBCASE("two sockets are unwrapped and summed") {
    FakePowercap pc("dual");
    pc.zone("intel-rapl:0", "package-0", "90\n", "100\n");
    pc.zone("intel-rapl:1", "package-1", "10\n", "100\n");
    auto b = RaplBackend::open(pc.root);
    CHECK(b->read()[0].cumulative_uj == 0);
    write_file(pc.root / "intel-rapl:0" / "energy_uj", "5\n");  // wrapped: +15
    write_file(pc.root / "intel-rapl:1" / "energy_uj", "30\n");  // +20
    CHECK(b->read()[0].cumulative_uj == 35);
  }
}

TEST_CASE("session sampling with the steady clock") {
  SyntheticBackend b(SyntheticPowerModel::constant(20.0, 2.0));
  const auto trace = session_record(b, 10.0, [](const MarkFn& mark) {
    mark("a");
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    mark("b");
  });
  CHECK_FALSE(trace.partial);
  int package = 0, dram = 0;
  for (const auto& s : trace.samples) (s.domain == PowerDomain::Package ? package : dram)++;
  CHECK(package >= 9);
  CHECK(dram >= 9);
  REQUIRE(trace.markers.size() == 2);
  CHECK(trace.markers[0].label == "a");
  CHECK(trace.markers[0].t_ns <= trace.markers[1].t_ns);
  CHECK(trace.first_ns(PowerDomain::Package) <= trace.markers[0].t_ns);
  CHECK(trace.last_ns(PowerDomain::Package) >= trace.markers[1].t_ns);
  CHECK_NOTHROW(trace.validate());
  const double p = average_power(trace, trace.markers[0].t_ns, trace.markers[1].t_ns,
                                 PowerDomain::Package);
  CHECK(p == doctest::Approx(20.0).epsilon(1e-3));
}

TEST_CASE("session arguments and failures") {
  SyntheticBackend b(SyntheticPowerModel::constant(1.0, 1.0));
  auto noop = [](const MarkFn&) {};
  CHECK_THROWS_AS(session_record(b, 0.5, noop), std::invalid_argument);
  CHECK_THROWS_AS(session_record(b, 1001.0, noop), std::invalid_argument);
  CHECK_THROWS_AS(session_record(b, 10.0, [](const MarkFn&) { throw std::logic_error("x"); }),
                  std::logic_error);

  FailingBackend failing(3);
  const auto trace = session_record(failing, 1.0, [](const MarkFn&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
  });
  CHECK(trace.partial);
}

TEST_CASE("virtual-clock samples equal the model integral exactly") {
  const auto model = two_phase();
  const auto trace = virtual_session(model, 10.0, 4 * kSecond);
  int n = 0;
  for (const auto& s : trace.samples) {
    const auto exact = static_cast<std::uint64_t>(std::floor(model.energy_uj(s.domain, s.t_ns)));
    CHECK(s.cumulative_uj == exact);
    CHECK(s.t_ns % (10 * 1'000'000) == 0);
    ++n;
  }
  CHECK(n == 2 * 401);
  CHECK(trace.markers.front().t_ns == 0);
  CHECK(trace.markers.back().t_ns == 4 * kSecond);
}

TEST_CASE("interval energy and average power") {
  const auto trace = virtual_session(two_phase(), 10.0, 4 * kSecond);
  CHECK(interval_energy(trace, 0, 2 * kSecond, PowerDomain::Package) == 100.0);
  CHECK(interval_energy(trace, kSecond, 3 * kSecond, PowerDomain::Package) == 200.0);
  CHECK(interval_energy(trace, 0, 4 * kSecond, PowerDomain::Package) == 400.0);
  CHECK(interval_energy(trace, 0, 4 * kSecond, PowerDomain::Dram) == 30.0);
  CHECK(average_power(trace, 0, 2 * kSecond, PowerDomain::Package) == 50.0);
  CHECK(average_power(trace, 0, 4 * kSecond, PowerDomain::Package) == 100.0);
  const PowerDomain both[] = {PowerDomain::Package, PowerDomain::Dram};
  const double summed = average_power(trace, 500'000'000, 3'700'000'000, both);
  const double separate = average_power(trace, 500'000'000, 3'700'000'000, PowerDomain::Package) +
                          average_power(trace, 500'000'000, 3'700'000'000, PowerDomain::Dram);
  CHECK(std::abs(summed - separate) <= 1e-12 * separate);

  CHECK_THROWS_AS(interval_energy(trace, 2, 1, PowerDomain::Package), std::invalid_argument);
  CHECK_THROWS_AS(interval_energy(trace, -1, 10, PowerDomain::Package), std::out_of_range);
  CHECK_THROWS_AS(interval_energy(trace, 0, 5 * kSecond, PowerDomain::Package), std::out_of_range);
}

TEST_CASE("counter wraps are corrected") {
  // 262144 J range at 150 W needs ~29 minutes; a 100 J range wraps during the run
  const auto wrapped = virtual_session(two_phase(150'000'000), 10.0, 4 * kSecond);
  bool decreased = false;
  std::uint64_t prev = 0;
  for (const auto& s : wrapped.samples) {
    if (s.domain != PowerDomain::Package) continue;
    decreased = decreased || s.cumulative_uj < prev;
    prev = s.cumulative_uj;
  }
  CHECK(decreased);
  CHECK(interval_energy(wrapped, 0, 4 * kSecond, PowerDomain::Package) == 400.0);
  CHECK(interval_energy(wrapped, kSecond, 3 * kSecond, PowerDomain::Package) == 200.0);
}

TEST_CASE("interval energy is additive and matches the exact integral on sample times") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    SyntheticPowerModel m;
    const int segments = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < segments; ++i) {
      m.segments.push_back({static_cast<std::int64_t>(1 + rng() % 50) * 10'000'000,
                            static_cast<double>(rng() % 300) + 0.37,
                            static_cast<double>(rng() % 30) + 0.11});
    }
    m.counter_max_uj = 5'000'000 + rng() % 50'000'000;
    const auto trace = virtual_session(m, 10.0, 3 * kSecond);
    const std::int64_t step = 10'000'000;
    const std::int64_t a = static_cast<std::int64_t>(rng() % 100) * step;
    const std::int64_t b = a + static_cast<std::int64_t>(1 + rng() % 100) * step;
    const std::int64_t c = b + static_cast<std::int64_t>(1 + rng() % 100) * step;
    for (PowerDomain d : {PowerDomain::Package, PowerDomain::Dram}) {
      const double whole = interval_energy(trace, a, c, d);
      const double parts = interval_energy(trace, a, b, d) + interval_energy(trace, b, c, d);
      CHECK(std::abs(whole - parts) <= 1e-9 * std::max(whole, 1.0));
      const long double exact = (m.energy_uj(d, c) - m.energy_uj(d, a)) * 1e-6L;
      // one microjoule of counter quantization
      CHECK(std::abs(whole - static_cast<double>(exact)) <= 1e-6 + 1e-12);
    }
  }
}

TEST_CASE("energy to solution") {
  CHECK(energy_to_solution(2.0, 100.0) == 200.0);
  CHECK(energy_to_solution(3.5, 0.0) == 0.0);
  CHECK_THROWS_AS(energy_to_solution(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(energy_to_solution(1.0, -1.0), std::invalid_argument);

  const auto trace = virtual_session(two_phase(), 10.0, 4 * kSecond);
  const auto t0 = trace.marker("start")->t_ns;
  const auto t1 = trace.marker("stop")->t_ns;
  const double t_s = static_cast<double>(t1 - t0) * 1e-9;
  const double e = interval_energy(trace, t0, t1, PowerDomain::Package);
  const double es = energy_to_solution(t_s, average_power(trace, t0, t1, PowerDomain::Package));
  CHECK(std::abs(es - e) <= 1e-3 * e);
}

TEST_CASE("trace json") {
  auto trace = virtual_session(two_phase(), 100.0, kSecond);
  const auto j = trace.to_json();
  CHECK(j.at("domains") == nlohmann::json::array({"package", "dram"}));
  CHECK(j.at("counter_max_uj").at("package") == 262'144'000'000ULL);
  CHECK(j.at("samples").at(0).size() == 3);
  CHECK(j.at("markers").at(0).at(1) == "start");
  CHECK(EnergyTrace::from_json(nlohmann::json::parse(j.dump())) == trace);

  auto bad = j;
  bad["samples"].push_back(nlohmann::json::array({0, "package", 1}));
  CHECK_THROWS_AS(EnergyTrace::from_json(bad), std::invalid_argument);
}
