#include "lbm/harness/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace lbm::harness {

CollideMode CollideChoice::to_mode() const {
  switch (kind) {
    case Kind::None: return NoCollide{};
    case Kind::Bgk: return BgkParams::make(tau);
    case Kind::Surrogate: return SurrogateParams::from_seed(fma_per_pop);
  }
  return NoCollide{};
}

namespace {

std::string_view argument(std::string_view text, std::string_view name) {
  if (!text.starts_with(name) || text.size() < name.size() + 2 || text[name.size()] != '(' ||
      text.back() != ')') {
    throw std::invalid_argument(fmt::format("invalid collide mode '{}'", text));
  }
  return text.substr(name.size() + 1, text.size() - name.size() - 2);
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  T value{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument(fmt::format("invalid number '{}' in {}", s, what));
  }
  return value;
}

}  // namespace

CollideChoice parse_collide(std::string_view text) {
  if (text == "None") return CollideChoice::none();
  if (text.starts_with("Bgk")) {
    return CollideChoice::bgk(parse_number<double>(argument(text, "Bgk"), "Bgk"));
  }
  if (text.starts_with("Surrogate")) {
    return CollideChoice::surrogate(
        parse_number<int>(argument(text, "Surrogate"), "Surrogate"));
  }
  throw std::invalid_argument(fmt::format("invalid collide mode '{}'", text));
}

std::string to_string(const CollideChoice& choice) {
  switch (choice.kind) {
    case CollideChoice::Kind::None: return "None";
    case CollideChoice::Kind::Bgk: return fmt::format("Bgk({})", choice.tau);
    case CollideChoice::Kind::Surrogate: return fmt::format("Surrogate({})", choice.fma_per_pop);
  }
  return "None";
}

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "auto") return BackendKind::Auto;
  if (text == "rapl") return BackendKind::Rapl;
  if (text == "synthetic") return BackendKind::Synthetic;
  throw std::invalid_argument(fmt::format("invalid backend '{}'", text));
}

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Auto: return "auto";
    case BackendKind::Rapl: return "rapl";
    case BackendKind::Synthetic: return "synthetic";
  }
  return "auto";
}

void validate(const ExperimentConfig& cfg) {
  auto require = [](bool ok, std::string_view what) {
    if (!ok) throw std::invalid_argument(fmt::format("invalid config: {}", what));
  };
  require(cfg.nx >= 1 && cfg.ny >= 1, "nx and ny must be >= 1");
  require(cfg.threads >= 1, "threads must be >= 1");
  require(cfg.iterations >= 1, "iterations must be >= 1");
  require(cfg.warmup_iterations >= 0, "warmup_iterations must be >= 0");
  require(cfg.repetitions >= 3, "repetitions must be >= 3");
  require(cfg.sampler_period_ms >= 1.0 && cfg.sampler_period_ms <= 1000.0,
          "sampler_period_ms must lie in [1, 1000]");
  require(cfg.synthetic_package_w >= 0.0 && cfg.synthetic_dram_w >= 0.0,
          "synthetic wattages must be >= 0");
  require(cfg.memory_target.kind == MemoryTarget::Kind::Default || cfg.memory_target.node >= 0,
          "memory_target node must be >= 0");

  const VelocitySet set = build_velocity_set(cfg.model);
  const LatticeGeometry geometry = LatticeGeometry::make(cfg.nx, cfg.ny, set.reach());
  (void)make_indexer(cfg.layout, geometry, set.q(), cfg.padding_mode());
  check_collide_mode(set, cfg.collide_mode.to_mode());
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {
      {"nx", cfg.nx},
      {"ny", cfg.ny},
      {"model", to_string(cfg.model)},
      {"layout", to_string(cfg.layout)},
      {"threads", cfg.threads},
      {"memory_target", to_string(cfg.memory_target)},
      {"collide_mode", to_string(cfg.collide_mode)},
      {"iterations", cfg.iterations},
      {"warmup_iterations", cfg.warmup_iterations},
      {"sampler_period_ms", cfg.sampler_period_ms},
      {"backend", to_string(cfg.backend)},
      {"seed", cfg.seed},
      {"repetitions", cfg.repetitions},
      {"padding", cfg.padding},
      {"pin", cfg.pin},
      {"memory_mode", cfg.memory_mode},
      {"rapl_root", cfg.rapl_root},
      {"synthetic_package_w", cfg.synthetic_package_w},
      {"synthetic_dram_w", cfg.synthetic_dram_w},
  };
}

namespace {

// One setter per field, shared by the JSON and TOML readers.
struct Field {
  enum class Type { Int, UInt, Float, Bool, String };
  Type type;
  std::function<void(ExperimentConfig&, const nlohmann::json&)> set;
};

const std::map<std::string, Field, std::less<>>& fields() {
  using T = Field::Type;
  using J = nlohmann::json;
  static const std::map<std::string, Field, std::less<>> table = {
      {"nx", {T::Int, [](ExperimentConfig& c, const J& v) { c.nx = v.get<int>(); }}},
      {"ny", {T::Int, [](ExperimentConfig& c, const J& v) { c.ny = v.get<int>(); }}},
      {"model", {T::String,
                 [](ExperimentConfig& c, const J& v) {
                   c.model = parse_model(v.get<std::string>());
                 }}},
      {"layout", {T::String,
                  [](ExperimentConfig& c, const J& v) {
                    c.layout = parse_layout(v.get<std::string>());
                  }}},
      {"threads", {T::Int, [](ExperimentConfig& c, const J& v) { c.threads = v.get<int>(); }}},
      {"memory_target", {T::String,
                         [](ExperimentConfig& c, const J& v) {
                           c.memory_target = parse_memory_target(v.get<std::string>());
                         }}},
      {"collide_mode", {T::String,
                        [](ExperimentConfig& c, const J& v) {
                          c.collide_mode = parse_collide(v.get<std::string>());
                        }}},
      {"iterations",
       {T::Int, [](ExperimentConfig& c, const J& v) { c.iterations = v.get<int>(); }}},
      {"warmup_iterations",
       {T::Int, [](ExperimentConfig& c, const J& v) { c.warmup_iterations = v.get<int>(); }}},
      {"sampler_period_ms",
       {T::Float,
        [](ExperimentConfig& c, const J& v) { c.sampler_period_ms = v.get<double>(); }}},
      {"backend", {T::String,
                   [](ExperimentConfig& c, const J& v) {
                     c.backend = parse_backend_kind(v.get<std::string>());
                   }}},
      {"seed", {T::UInt, [](ExperimentConfig& c, const J& v) { c.seed = v.get<std::uint64_t>(); }}},
      {"repetitions",
       {T::Int, [](ExperimentConfig& c, const J& v) { c.repetitions = v.get<int>(); }}},
      {"padding", {T::Bool, [](ExperimentConfig& c, const J& v) { c.padding = v.get<bool>(); }}},
      {"pin", {T::Bool, [](ExperimentConfig& c, const J& v) { c.pin = v.get<bool>(); }}},
      {"memory_mode",
       {T::String,
        [](ExperimentConfig& c, const J& v) { c.memory_mode = v.get<std::string>(); }}},
      {"rapl_root",
       {T::String, [](ExperimentConfig& c, const J& v) { c.rapl_root = v.get<std::string>(); }}},
      {"synthetic_package_w",
       {T::Float,
        [](ExperimentConfig& c, const J& v) { c.synthetic_package_w = v.get<double>(); }}},
      {"synthetic_dram_w",
       {T::Float,
        [](ExperimentConfig& c, const J& v) { c.synthetic_dram_w = v.get<double>(); }}},
  };
  return table;
}

bool type_matches(Field::Type type, const nlohmann::json& v) {
  switch (type) {
    case Field::Type::Int: return v.is_number_integer();
    case Field::Type::UInt: return v.is_number_unsigned() || (v.is_number_integer() && v >= 0);
    case Field::Type::Float: return v.is_number();
    case Field::Type::Bool: return v.is_boolean();
    case Field::Type::String: return v.is_string();
  }
  return false;
}

void set_field(ExperimentConfig& cfg, std::string_view key, const nlohmann::json& v) {
  const auto it = fields().find(key);
  if (it == fields().end()) {
    throw std::invalid_argument(fmt::format("unknown config key '{}'", key));
  }
  if (!type_matches(it->second.type, v)) {
    throw std::invalid_argument(fmt::format("config key '{}' has the wrong type", key));
  }
  it->second.set(cfg, v);
}

nlohmann::json toml_to_json(const TomlValue& value) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, TomlArray>) {
          nlohmann::json arr = nlohmann::json::array();
          for (const auto& item : x) arr.push_back(toml_to_json(item));
          return arr;
        } else {
          return x;
        }
      },
      value.v);
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) set_field(cfg, key, value);
  return cfg;
}

ExperimentConfig config_from_toml(const TomlDocument& doc) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : doc) {
    if (value.is_array()) {
      throw std::invalid_argument(
          fmt::format("config key '{}' is an array; arrays are only valid in a sweep", key));
    }
    set_field(cfg, key, toml_to_json(value));
  }
  return cfg;
}

SweepPlan plan_from_toml(const TomlDocument& doc) {
  SweepPlan plan;
  TomlDocument scalars;
  auto axis = [&](std::string_view key, auto&& convert) {
    const auto it = doc.find(key);
    if (it == doc.end()) return false;
    const TomlArray items = it->second.is_array() ? std::get<TomlArray>(it->second.v)
                                                  : TomlArray{it->second};
    if (items.empty()) throw std::invalid_argument(fmt::format("sweep axis '{}' is empty", key));
    for (const auto& item : items) {
      ExperimentConfig scratch;
      set_field(scratch, key, toml_to_json(item));
      convert(scratch);
    }
    return true;
  };
  const bool has_layouts =
      axis("layout", [&](const ExperimentConfig& c) { plan.layouts.push_back(c.layout); });
  const bool has_threads =
      axis("threads", [&](const ExperimentConfig& c) { plan.threads.push_back(c.threads); });
  const bool has_targets = axis("memory_target", [&](const ExperimentConfig& c) {
    plan.memory_targets.push_back(c.memory_target);
  });
  for (const auto& [key, value] : doc) {
    if (key != "layout" && key != "threads" && key != "memory_target") scalars.emplace(key, value);
  }
  plan.base = config_from_toml(scalars);
  if (!has_layouts) plan.layouts.push_back(plan.base.layout);
  if (!has_threads) plan.threads.push_back(plan.base.threads);
  if (!has_targets) plan.memory_targets.push_back(plan.base.memory_target);
  return plan;
}

std::vector<ExperimentConfig> SweepPlan::combinations() const {
  std::vector<ExperimentConfig> out;
  out.reserve(size());
  for (const LayoutKind& layout : layouts) {
    for (int t : threads) {
      for (const MemoryTarget& target : memory_targets) {
        ExperimentConfig cfg = base;
        cfg.layout = layout;
        cfg.threads = t;
        cfg.memory_target = target;
        out.push_back(cfg);
      }
    }
  }
  return out;
}

}  // namespace lbm::harness
