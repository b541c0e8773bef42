#include "lbm/energy/backend.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include <fmt/format.h>

namespace lbm::energy {

std::string to_string(PowerDomain domain) {
  return domain == PowerDomain::Package ? "package" : "dram";
}

PowerDomain parse_domain(std::string_view text) {
  if (text == "package") return PowerDomain::Package;
  if (text == "dram") return PowerDomain::Dram;
  throw std::invalid_argument(fmt::format("unknown power domain '{}'", text));
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return ss.str();
}

std::uint64_t read_decimal(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr == text.data() || (ptr != end && *ptr != '\n')) {
    throw std::runtime_error(fmt::format("{}: not a decimal counter", path.string()));
  }
  return value;
}

std::uint64_t unwrap_delta(std::uint64_t prev, std::uint64_t raw, std::uint64_t max_uj) {
  return raw >= prev ? raw - prev : raw + (max_uj - prev);
}

std::uint64_t domain_value(std::vector<RaplBackend::Zone>& zones) {
  if (zones.size() == 1) {
    zones.front().last_raw = read_decimal(zones.front().energy_file);
    return zones.front().last_raw;
  }
  std::uint64_t total = 0;
  for (auto& z : zones) {
    const std::uint64_t raw = read_decimal(z.energy_file);
    z.unwrapped += unwrap_delta(z.last_raw, raw, z.max_uj);
    z.last_raw = raw;
    total += z.unwrapped;
  }
  return total;
}

constexpr std::uint64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

}  // namespace

std::unique_ptr<RaplBackend> RaplBackend::open(const std::filesystem::path& root,
                                               std::shared_ptr<Clock> clock) {
#ifndef __linux__
  (void)root;
  (void)clock;
  throw CapabilityError("RAPL powercap interface requires Linux");
#else
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw CapabilityError(fmt::format("RAPL unavailable: {} not found", root.string()));
  }
  std::unique_ptr<RaplBackend> backend(new RaplBackend());
  backend->clock_ = clock ? std::move(clock) : std::make_shared<SteadyClock>();

  static const std::regex package_re(R"(intel-rapl:(\d+))");
  static const std::regex sub_re(R"(intel-rapl:(\d+):(\d+))");
  std::vector<std::filesystem::path> entries;
  for (const auto& entry : std::filesystem::directory_iterator(root, ec)) {
    entries.push_back(entry.path());
  }
  std::sort(entries.begin(), entries.end());

  std::string problems;
  for (const auto& path : entries) {
    const std::string base = path.filename().string();
    const bool is_package = std::regex_match(base, package_re);
    const bool is_sub = std::regex_match(base, sub_re);
    if (!is_package && !is_sub) continue;
    std::string zone_name;
    try {
      zone_name = read_text(path / "name");
    } catch (const std::exception&) {
      continue;
    }
    const bool want = is_package ? zone_name.starts_with("package")
                                 : zone_name.find("dram") != std::string::npos;
    if (!want) continue;
    try {
      Zone z;
      z.energy_file = path / "energy_uj";
      z.max_uj = read_decimal(path / "max_energy_range_uj");
      z.last_raw = read_decimal(z.energy_file);
      (is_package ? backend->package_ : backend->dram_).push_back(std::move(z));
    } catch (const std::exception& e) {
      problems += fmt::format(" {};", e.what());
    }
  }
  if (backend->package_.empty()) {
    throw CapabilityError(fmt::format("RAPL unavailable: no readable package zone under {}{}",
                                      root.string(), problems));
  }
  return backend;
#endif
}

std::vector<PowerDomain> RaplBackend::domains() const {
  if (dram_.empty()) return {PowerDomain::Package};
  return {PowerDomain::Package, PowerDomain::Dram};
}

std::uint64_t RaplBackend::counter_max_uj(PowerDomain domain) const {
  const auto& zones = domain == PowerDomain::Package ? package_ : dram_;
  if (zones.empty()) throw std::invalid_argument("domain not provided by this backend");
  return zones.size() == 1 ? zones.front().max_uj : kUnbounded;
}

std::vector<CounterReading> RaplBackend::read() {
  const std::int64_t t = clock_->now_ns();
  std::vector<CounterReading> out;
  out.push_back({PowerDomain::Package, t, domain_value(package_)});
  if (!dram_.empty()) out.push_back({PowerDomain::Dram, t, domain_value(dram_)});
  return out;
}

SyntheticPowerModel SyntheticPowerModel::constant(double package_w, double dram_w) {
  SyntheticPowerModel m;
  m.segments.push_back({1'000'000'000, package_w, dram_w});
  return m;
}

void SyntheticPowerModel::validate() const {
  if (segments.empty()) throw std::invalid_argument("synthetic power model has no segments");
  for (const auto& s : segments) {
    if (s.duration_ns <= 0) throw std::invalid_argument("segment durations must be positive");
    if (!(s.package_w >= 0.0) || !(s.dram_w >= 0.0)) {
      throw std::invalid_argument("segment powers must be non-negative");
    }
  }
  if (counter_max_uj == 0) throw std::invalid_argument("counter range must be positive");
}

long double SyntheticPowerModel::energy_uj(PowerDomain domain, std::int64_t t_ns) const {
  // W * ns = 1e-3 uJ
  long double total = 0.0L;
  std::int64_t remaining = std::max<std::int64_t>(t_ns, 0);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const double w = domain == PowerDomain::Package ? s.package_w : s.dram_w;
    const bool last = i + 1 == segments.size();
    const std::int64_t span = last ? remaining : std::min(remaining, s.duration_ns);
    total += static_cast<long double>(w) * static_cast<long double>(span) / 1000.0L;
    remaining -= span;
    if (remaining == 0) break;
  }
  return total;
}

SyntheticBackend::SyntheticBackend(SyntheticPowerModel model, std::shared_ptr<Clock> clock)
    : model_(std::move(model)),
      clock_(clock ? std::move(clock) : std::make_shared<SteadyClock>()),
      epoch_(clock_->now_ns()) {
  model_.validate();
}

std::vector<PowerDomain> SyntheticBackend::domains() const {
  if (!model_.has_dram) return {PowerDomain::Package};
  return {PowerDomain::Package, PowerDomain::Dram};
}

std::uint64_t SyntheticBackend::counter_at(PowerDomain domain, std::int64_t t_ns) const {
  const long double e = std::floor(model_.energy_uj(domain, t_ns - epoch_));
  return static_cast<std::uint64_t>(std::fmod(e, static_cast<long double>(model_.counter_max_uj)));
}

std::vector<CounterReading> SyntheticBackend::read() {
  const std::int64_t t = clock_->now_ns();
  std::vector<CounterReading> out;
  for (PowerDomain d : domains()) out.push_back({d, t, counter_at(d, t)});
  return out;
}

std::unique_ptr<Backend> open_backend(const BackendSpec& spec, std::shared_ptr<Clock> clock) {
  if (const auto* rapl = std::get_if<RaplSpec>(&spec)) {
    return RaplBackend::open(rapl->root, std::move(clock));
  }
  return std::make_unique<SyntheticBackend>(std::get<SyntheticSpec>(spec).model, std::move(clock));
}

}  // namespace lbm::energy
