#include "lbm/energy/trace.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace lbm::energy {

namespace {

struct Series {
  std::vector<std::int64_t> t;
  std::vector<long double> uj;  // unwrapped, relative to the first sample
};

Series unwrapped_series(const EnergyTrace& trace, PowerDomain domain) {
  if (!trace.has_domain(domain)) {
    throw std::invalid_argument(fmt::format("trace has no {} samples", to_string(domain)));
  }
  const auto max_it = trace.counter_max_uj.find(domain);
  if (max_it == trace.counter_max_uj.end()) {
    throw std::invalid_argument(fmt::format("trace has no {} counter range", to_string(domain)));
  }
  const std::uint64_t modulus = max_it->second;
  Series s;
  std::uint64_t prev = 0;
  long double total = 0.0L;
  for (const auto& sample : trace.samples) {
    if (sample.domain != domain) continue;
    if (!s.t.empty()) {
      const std::uint64_t raw = sample.cumulative_uj;
      total += static_cast<long double>(raw >= prev ? raw - prev : raw + (modulus - prev));
    }
    prev = sample.cumulative_uj;
    s.t.push_back(sample.t_ns);
    s.uj.push_back(total);
  }
  if (s.t.empty()) {
    throw std::invalid_argument(fmt::format("trace has no {} samples", to_string(domain)));
  }
  return s;
}

long double cumulative_at(const Series& s, std::int64_t t) {
  auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
  if (it == s.t.end()) return s.uj.back();  // t == last sample
  const auto i = static_cast<std::size_t>(it - s.t.begin());
  if (i == 0) return s.uj.front();
  const long double t0 = static_cast<long double>(s.t[i - 1]);
  const long double t1 = static_cast<long double>(s.t[i]);
  const long double frac = (static_cast<long double>(t) - t0) / (t1 - t0);
  return s.uj[i - 1] + (s.uj[i] - s.uj[i - 1]) * frac;
}

}  // namespace

bool EnergyTrace::has_domain(PowerDomain d) const {
  return std::find(domains.begin(), domains.end(), d) != domains.end();
}

std::optional<Marker> EnergyTrace::marker(std::string_view label) const {
  for (const auto& m : markers) {
    if (m.label == label) return m;
  }
  return std::nullopt;
}

std::int64_t EnergyTrace::first_ns(PowerDomain domain) const {
  for (const auto& s : samples) {
    if (s.domain == domain) return s.t_ns;
  }
  throw std::invalid_argument(fmt::format("trace has no {} samples", to_string(domain)));
}

std::int64_t EnergyTrace::last_ns(PowerDomain domain) const {
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    if (it->domain == domain) return it->t_ns;
  }
  throw std::invalid_argument(fmt::format("trace has no {} samples", to_string(domain)));
}

void EnergyTrace::validate() const {
  std::map<PowerDomain, std::int64_t> last;
  for (const auto& s : samples) {
    if (!has_domain(s.domain)) throw std::invalid_argument("sample for undeclared domain");
    auto it = last.find(s.domain);
    if (it != last.end() && s.t_ns <= it->second) {
      throw std::invalid_argument("sample timestamps must strictly increase per domain");
    }
    last[s.domain] = s.t_ns;
    auto max_it = counter_max_uj.find(s.domain);
    if (max_it == counter_max_uj.end() || s.cumulative_uj > max_it->second) {
      throw std::invalid_argument("sample counter outside its range");
    }
  }
  for (std::size_t i = 1; i < markers.size(); ++i) {
    if (markers[i].t_ns < markers[i - 1].t_ns) {
      throw std::invalid_argument("markers must be time ordered");
    }
  }
}

nlohmann::json EnergyTrace::to_json() const {
  nlohmann::json j;
  j["domains"] = nlohmann::json::array();
  for (PowerDomain d : domains) j["domains"].push_back(to_string(d));
  j["counter_max_uj"] = nlohmann::json::object();
  for (const auto& [d, max] : counter_max_uj) j["counter_max_uj"][to_string(d)] = max;
  j["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    j["samples"].push_back(nlohmann::json::array({s.t_ns, to_string(s.domain), s.cumulative_uj}));
  }
  j["markers"] = nlohmann::json::array();
  for (const auto& m : markers) j["markers"].push_back(nlohmann::json::array({m.t_ns, m.label}));
  j["partial"] = partial;
  j["flags"] = flags;
  return j;
}

EnergyTrace EnergyTrace::from_json(const nlohmann::json& j) {
  EnergyTrace t;
  for (const auto& d : j.at("domains")) t.domains.push_back(parse_domain(d.get<std::string>()));
  for (const auto& [name, max] : j.at("counter_max_uj").items()) {
    t.counter_max_uj[parse_domain(name)] = max.get<std::uint64_t>();
  }
  for (const auto& s : j.at("samples")) {
    t.samples.push_back({s.at(0).get<std::int64_t>(), parse_domain(s.at(1).get<std::string>()),
                         s.at(2).get<std::uint64_t>()});
  }
  for (const auto& m : j.at("markers")) {
    t.markers.push_back({m.at(0).get<std::int64_t>(), m.at(1).get<std::string>()});
  }
  t.partial = j.value("partial", false);
  t.flags = j.value("flags", std::vector<std::string>{});
  t.validate();
  return t;
}

double interval_energy(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                       PowerDomain domain) {
  if (t0_ns >= t1_ns) throw std::invalid_argument("interval must have t0 < t1");
  const Series s = unwrapped_series(trace, domain);
  if (t0_ns < s.t.front() || t1_ns > s.t.back()) {
    throw std::out_of_range(fmt::format("interval [{}, {}] ns outside sampled span [{}, {}] ns",
                                        t0_ns, t1_ns, s.t.front(), s.t.back()));
  }
  return static_cast<double>((cumulative_at(s, t1_ns) - cumulative_at(s, t0_ns)) * 1e-6L);
}

double interval_energy(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                       std::span<const PowerDomain> domains) {
  double total = 0.0;
  for (PowerDomain d : domains) total += interval_energy(trace, t0_ns, t1_ns, d);
  return total;
}

double average_power(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                     PowerDomain domain) {
  return interval_energy(trace, t0_ns, t1_ns, domain) / (static_cast<double>(t1_ns - t0_ns) * 1e-9);
}

double average_power(const EnergyTrace& trace, std::int64_t t0_ns, std::int64_t t1_ns,
                     std::span<const PowerDomain> domains) {
  double total = 0.0;
  for (PowerDomain d : domains) total += average_power(trace, t0_ns, t1_ns, d);
  return total;
}

double energy_to_solution(double t_s, double p_avg) {
  if (!(t_s > 0.0)) throw std::invalid_argument("time-to-solution must be positive");
  if (!(p_avg >= 0.0)) throw std::invalid_argument("average power must be non-negative");
  return t_s * p_avg;
}

}  // namespace lbm::energy
