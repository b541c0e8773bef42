#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "lbm/energy/clock.hpp"
#include "lbm/energy/session.hpp"
#include "lbm/field.hpp"
#include "lbm/harness/affinity.hpp"
#include "lbm/harness/config.hpp"
#include "lbm/harness/experiment.hpp"
#include "lbm/harness/toml.hpp"
#include "lbm/reference.hpp"

using namespace lbm;
using namespace lbm::harness;
using energy::PowerDomain;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.nx = 16;
  cfg.ny = 16;
  cfg.model = Model::D2Q37;
  cfg.iterations = 5;
  cfg.warmup_iterations = 2;
  cfg.collide_mode = CollideChoice::surrogate(16);
  cfg.backend = BackendKind::Synthetic;
  cfg.sampler_period_ms = 5;
  cfg.seed = 11;
  return cfg;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// Expected checksum from the scalar reference kernels on logical data.
double oracle_checksum(const ExperimentConfig& cfg) {
  const VelocitySet set = build_velocity_set(cfg.model);
  const auto geometry = LatticeGeometry::make(cfg.nx, cfg.ny, set.reach());
  std::vector<double> f = to_logical(
      init_field(geometry, set.q(), LayoutKind::aos(), RandomSeeded{cfg.seed}));
  const auto params = SurrogateParams::from_seed(cfg.collide_mode.fma_per_pop);
  auto phase = [&](int n) {
    for (int i = 0; i < n; ++i) f = reference::propagate(f, geometry, set);
    for (int i = 0; i < n; ++i) reference::collide_surrogate(f, params);
  };
  phase(cfg.warmup_iterations);
  phase(cfg.iterations);
  PopulationField out(geometry, set.q(), LayoutKind::aos());
  assign_logical(out, f);
  return field_checksum(out);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          (name + "_" + std::to_string(::getpid())))
      .string();
}

}  // namespace

TEST_CASE("toml subset") {
  const auto doc = parse_toml(R"toml(
# experiment
nx = 32          # trailing comment
ratio = 0.5
big = 1_000
name = "CSoA(8)"
raw = 'a\b'
flag = true
list = ["AoS", "SoA", ]
nums = [1, 2, 4]
)toml");
  CHECK(std::get<std::int64_t>(doc.at("nx").v) == 32);
  CHECK(std::get<double>(doc.at("ratio").v) == 0.5);
  CHECK(std::get<std::int64_t>(doc.at("big").v) == 1000);
  CHECK(std::get<std::string>(doc.at("name").v) == "CSoA(8)");
  CHECK(std::get<std::string>(doc.at("raw").v) == "a\\b");
  CHECK(std::get<bool>(doc.at("flag").v));
  CHECK(std::get<TomlArray>(doc.at("list").v).size() == 2);
  CHECK(std::get<TomlArray>(doc.at("nums").v).size() == 3);

  auto line_of = [](std::string_view text) {
    try {
      parse_toml(text);
    } catch (const TomlError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("a = 1\nb = \n") == 2);
  CHECK(line_of("a = 1\na = 2\n") == 2);
  CHECK(line_of("[table]\n") == 1);
  CHECK(line_of("x = \"open\n") == 1);
  CHECK(line_of("x = [[1]]\n") == 1);
  CHECK(line_of("x = 1 2\n") == 1);
  CHECK(line_of("x = 12abc\n") == 1);
}

TEST_CASE("config from toml") {
  const auto cfg = config_from_toml(parse_toml(R"toml(
nx = 48
ny = 40
model = "D2Q9"
layout = "CAoSoA(4)"
threads = 2
memory_target = "Default"
collide_mode = "Bgk(0.8)"
iterations = 7
warmup_iterations = 1
sampler_period_ms = 20
backend = "synthetic"
seed = 99
repetitions = 5
padding = false
pin = false
memory_mode = "flat"
synthetic_package_w = 120.5
synthetic_dram_w = 8
)toml"));
  CHECK(cfg.nx == 48);
  CHECK(cfg.ny == 40);
  CHECK(cfg.model == Model::D2Q9);
  CHECK(cfg.layout == LayoutKind::caosoa(4));
  CHECK(cfg.threads == 2);
  CHECK(cfg.collide_mode == CollideChoice::bgk(0.8));
  CHECK(cfg.sampler_period_ms == 20.0);
  CHECK(cfg.backend == BackendKind::Synthetic);
  CHECK(cfg.seed == 99);
  CHECK_FALSE(cfg.padding);
  CHECK(cfg.memory_mode == "flat");
  CHECK(cfg.synthetic_package_w == 120.5);
  CHECK_NOTHROW(validate(cfg));

  CHECK_THROWS_AS(config_from_toml(parse_toml("colour = 1\n")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_toml(parse_toml("nx = \"16\"\n")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_toml(parse_toml("threads = [1, 2]\n")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_toml(parse_toml("layout = \"Tiled\"\n")), std::invalid_argument);
}

TEST_CASE("collide choice strings") {
  CHECK(parse_collide("None") == CollideChoice::none());
  CHECK(parse_collide("Bgk(0.8)") == CollideChoice::bgk(0.8));
  CHECK(parse_collide("Surrogate(90)") == CollideChoice::surrogate(90));
  CHECK(to_string(CollideChoice::bgk(0.8)) == "Bgk(0.8)");
  CHECK(to_string(CollideChoice::surrogate(64)) == "Surrogate(64)");
  CHECK_THROWS_AS(parse_collide("Bgk(x)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_collide("Surrogate"), std::invalid_argument);
  CHECK_THROWS_AS(parse_collide("Trt(1)"), std::invalid_argument);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(validate(cfg));
  auto bad = [&](auto&& mutate) {
    ExperimentConfig c = cfg;
    mutate(c);
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
  };
  bad([](ExperimentConfig& c) { c.threads = 0; });
  bad([](ExperimentConfig& c) { c.iterations = 0; });
  bad([](ExperimentConfig& c) { c.warmup_iterations = -1; });
  bad([](ExperimentConfig& c) { c.repetitions = 2; });
  bad([](ExperimentConfig& c) { c.sampler_period_ms = 0.5; });
  bad([](ExperimentConfig& c) { c.nx = 0; });
  bad([](ExperimentConfig& c) { c.collide_mode = CollideChoice::bgk(0.8); });  // D2Q37 has no weights
  bad([](ExperimentConfig& c) { c.collide_mode = CollideChoice::bgk(0.4); c.model = Model::D2Q9; });
  bad([](ExperimentConfig& c) { c.layout = LayoutKind::csoa(8); c.ny = 20; c.padding = false; });
  bad([](ExperimentConfig& c) { c.layout = LayoutKind::csoa(3); });
}

TEST_CASE("config echo round trip") {
  std::mt19937_64 rng(5);
  const LayoutKind layouts[] = {LayoutKind::aos(), LayoutKind::soa(), LayoutKind::csoa(4),
                                LayoutKind::caosoa(16)};
  for (int i = 0; i < 50; ++i) {
    ExperimentConfig cfg;
    cfg.nx = 1 + static_cast<int>(rng() % 500);
    cfg.ny = 1 + static_cast<int>(rng() % 500);
    cfg.model = rng() % 2 ? Model::D2Q9 : Model::D2Q37;
    cfg.layout = layouts[rng() % 4];
    cfg.threads = 1 + static_cast<int>(rng() % 64);
    cfg.memory_target = rng() % 2 ? MemoryTarget::numa_node(static_cast<int>(rng() % 4))
                                  : MemoryTarget::default_target();
    cfg.collide_mode = rng() % 2 ? CollideChoice::bgk(0.5 + std::ldexp(double(rng() >> 11), -53))
                                 : CollideChoice::surrogate(static_cast<int>(rng() % 200));
    cfg.sampler_period_ms = 1.0 + static_cast<double>(rng() % 999) / 7.0;
    cfg.seed = rng();
    cfg.padding = rng() % 2;
    cfg.memory_mode = "cache";
    cfg.synthetic_package_w = std::ldexp(double(rng() >> 11), -45);
    const auto text = to_json(cfg).dump();
    CHECK(config_from_json(nlohmann::json::parse(text)) == cfg);
  }
}

TEST_CASE("sweep plan from toml") {
  const auto plan = plan_from_toml(parse_toml(R"toml(
nx = 16
ny = 16
layout = ["AoS", "SoA", "CSoA(8)", "CAoSoA(8)"]
threads = [1, 2]
)toml"));
  CHECK(plan.size() == 8);
  const auto combos = plan.combinations();
  REQUIRE(combos.size() == 8);
  CHECK(combos[0].layout == LayoutKind::aos());
  CHECK(combos[1].threads == 2);
  CHECK(combos[7].layout == LayoutKind::caosoa(8));
  CHECK(combos[7].nx == 16);
  CHECK(plan_from_toml(parse_toml("nx = 8\n")).size() == 1);
  CHECK_THROWS_AS(plan_from_toml(parse_toml("threads = []\n")), std::invalid_argument);
}

TEST_CASE("propagate bandwidth") {
  CHECK(propagate_bandwidth(37, 1'000'000, 100, 1'000'000'000) == doctest::Approx(59.2).epsilon(1e-15));
  CHECK(propagate_bandwidth(37, 4096, 20, 7'000'000) ==
        doctest::Approx(propagate_bandwidth(37, 4096, 40, 14'000'000)).epsilon(1e-15));
  const double ratio = propagate_bandwidth(9, 4096, 20, 7'000'000) /
                       propagate_bandwidth(37, 4096, 20, 7'000'000);
  CHECK(ratio == doctest::Approx(9.0 / 37.0).epsilon(1e-15));
  ExperimentConfig cfg;
  cfg.nx = 1000;
  cfg.ny = 1000;
  cfg.iterations = 100;
  CHECK(propagate_bandwidth(cfg, 1'000'000'000) == doctest::Approx(59.2).epsilon(1e-15));
}

TEST_CASE("kernel metrics from a trace") {
  auto clock = std::make_shared<energy::VirtualClock>(0);
  energy::SyntheticBackend backend(energy::SyntheticPowerModel::constant(100.0, 0.0), clock);
  const auto trace = energy::session_record(backend, 10.0, [&](const energy::MarkFn& mark) {
    mark("propagate:start");
    clock->advance(2'000'000'000);
    mark("propagate:stop");
  });
  const auto m = kernel_metrics(trace, "propagate", 1280 / 5, 5, 37);
  CHECK(m.wall_ns_total == 2'000'000'000);
  CHECK(m.e_s_joules == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(m.p_avg_w.at(PowerDomain::Package) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(m.p_avg_w.at(PowerDomain::Dram) == 0.0);
  CHECK(m.ns_per_site == 2e9 / 1280);
  CHECK(m.e_s_per_site_j * 1280 == doctest::Approx(m.e_s_joules).epsilon(1e-12));
  REQUIRE(m.bandwidth_gbs.has_value());
  CHECK(*m.bandwidth_gbs == doctest::Approx(2.0 * 37 * 8 * 1280 / 2e9).epsilon(1e-15));
  CHECK_THROWS_AS(kernel_metrics(trace, "collide", 256, 5), std::runtime_error);
}

TEST_CASE("run_experiment metric identities and checksum oracle") {
  const ExperimentConfig cfg = small_config();
  const RunRecord r = run_experiment(cfg);
  CHECK(r.status == RunStatus::Ok);
  CHECK(r.backend == "synthetic");
  CHECK(r.config == cfg);
  CHECK(r.machine.dram_available);
  REQUIRE(r.kernels.size() == 2);
  for (const auto& k : r.kernels) {
    CHECK(k.sites == 256);
    CHECK(k.iterations == 5);
    CHECK(std::llround(k.ns_per_site * 1280.0) == k.wall_ns_total);
    CHECK(k.ns_per_site == static_cast<double>(k.wall_ns_total) / 1280.0);
    const double wall_s = static_cast<double>(k.wall_ns_total) * 1e-9;
    CHECK(std::abs(k.e_s_joules - wall_s * k.p_avg_w_summed) <= 1e-9 * k.e_s_joules);
    CHECK(std::abs(k.e_s_per_site_j * 1280.0 - k.e_s_joules) <= 1e-9 * k.e_s_joules);
    CHECK(k.p_avg_w_summed == doctest::Approx(110.0).epsilon(0.05));
    CHECK(k.wall_ns_min <= k.wall_ns_total);
    CHECK(k.wall_ns_total <= k.wall_ns_max);
  }
  CHECK(r.kernel("propagate")->bandwidth_gbs.has_value());
  CHECK_FALSE(r.kernel("collide")->bandwidth_gbs.has_value());
  CHECK(same_bits(r.checksum, oracle_checksum(cfg)));

  const RunRecord back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(back.config == r.config);
  CHECK(back.kernels == r.kernels);
  CHECK(same_bits(back.checksum, r.checksum));
  CHECK(back.warnings == r.warnings);
}

TEST_CASE("run_experiment is thread-count invariant") {
  ExperimentConfig cfg = small_config();
  cfg.layout = LayoutKind::csoa(8);
  const double one = run_experiment(cfg).checksum;
  cfg.threads = 4;
  const RunRecord four = run_experiment(cfg);
  CHECK(same_bits(one, four.checksum));
}

TEST_CASE("run_experiment without collision") {
  ExperimentConfig cfg = small_config();
  cfg.collide_mode = CollideChoice::none();
  const RunRecord r = run_experiment(cfg);
  REQUIRE(r.kernels.size() == 1);
  CHECK(r.kernels[0].kernel == "propagate");
}

TEST_CASE("run_experiment errors") {
  ExperimentConfig cfg = small_config();
  cfg.memory_target = MemoryTarget::numa_node(numa_node_count() + 3);
  CHECK_THROWS_AS(run_experiment(cfg), CapabilityError);
  cfg = small_config();
  cfg.threads = 0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.backend = BackendKind::Rapl;
  cfg.rapl_root = "/nonexistent/powercap";
  CHECK_THROWS_AS(run_experiment(cfg), CapabilityError);
  cfg.backend = BackendKind::Auto;
  const RunRecord r = run_experiment(cfg);
  CHECK(r.backend == "synthetic");
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("run_sweep") {
  SweepPlan plan;
  plan.base = small_config();
  plan.base.iterations = 3;
  plan.layouts = {LayoutKind::aos(), LayoutKind::soa(), LayoutKind::csoa(8),
                  LayoutKind::caosoa(8)};
  plan.threads = {1, 2};
  plan.memory_targets = {MemoryTarget::default_target()};

  const std::string path = temp_path("lbm_sweep.jsonl");
  std::filesystem::remove(path);
  int streamed = 0;
  const auto records = run_sweep(plan, [&](const RunRecord& r) {
    append_jsonl(path, r);
    ++streamed;
  });
  CHECK(records.size() == 8);
  CHECK(streamed == 8);
  for (const auto& r : records) {
    CHECK(r.status == RunStatus::Ok);
    CHECK(same_bits(r.checksum, records[0].checksum));
  }
  CHECK(checksums_agree(records));

  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const RunRecord r = record_from_json(nlohmann::json::parse(line));
    CHECK(same_bits(r.checksum, records[static_cast<std::size_t>(lines)].checksum));
    ++lines;
  }
  CHECK(lines == 8);
  std::filesystem::remove(path);

  const auto again = run_sweep(plan);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(same_bits(again[i].checksum, records[i].checksum));
  }
}

TEST_CASE("run_sweep skips invalid combinations") {
  SweepPlan plan;
  plan.base = small_config();
  plan.base.ny = 20;
  plan.base.padding = false;
  plan.layouts = {LayoutKind::aos(), LayoutKind::csoa(8), LayoutKind::soa()};
  plan.threads = {1};
  plan.memory_targets = {MemoryTarget::default_target(),
                         MemoryTarget::numa_node(numa_node_count() + 1)};
  const auto records = run_sweep(plan);
  REQUIRE(records.size() == 6);
  int ok = 0, skipped = 0;
  for (const auto& r : records) {
    if (r.status == RunStatus::Ok) ++ok;
    if (r.status == RunStatus::Skipped) {
      ++skipped;
      CHECK_FALSE(r.reason.empty());
      CHECK(r.kernels.empty());
    }
  }
  CHECK(ok == 2);
  CHECK(skipped == 4);
  CHECK(records[2].config.layout == LayoutKind::csoa(8));
  CHECK(records[2].status == RunStatus::Skipped);
  CHECK(checksums_agree(records));

  RunRecord tampered = records[0];
  tampered.checksum += 1.0;
  CHECK_FALSE(checksums_agree({records[0], tampered}));
  CHECK_THROWS_AS(run_sweep(SweepPlan{}), std::invalid_argument);
}

TEST_CASE("placement order fills physical cores first") {
  // two packages, two cores each, two SMT siblings per core
  std::vector<CpuTopology> cpus;
  for (int cpu = 0; cpu < 8; ++cpu) cpus.push_back({cpu, cpu % 4 / 2, cpu % 2});
  const auto order = placement_order(cpus);
  CHECK(order == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  std::vector<CpuTopology> siblings = {{0, 0, 0}, {1, 0, 0}, {2, 0, 1}, {3, 0, 1}};
  CHECK(placement_order(siblings) == std::vector<int>{0, 2, 1, 3});
}

TEST_CASE("pin_workers") {
  CHECK_THROWS_AS(pin_workers(0), std::invalid_argument);
  const auto one = pin_workers(1);
  CHECK(one.requested == 1);
  CHECK(one.planned.size() == 1);
  CHECK(one.honored);
  CHECK(one.achieved == one.planned);
  const int cpus = static_cast<int>(allowed_cpus().size());
  try {
    pin_workers(cpus + 1);
    FAIL("oversubscription accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("oversubscription refused") != std::string::npos);
  }
  if (cpus >= 4) {
    const auto four = pin_workers(4);
    CHECK(four.honored);
    std::vector<int> distinct = four.achieved;
    std::sort(distinct.begin(), distinct.end());
    CHECK(std::unique(distinct.begin(), distinct.end()) == distinct.end());
  }
}
