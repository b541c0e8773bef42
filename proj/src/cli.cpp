#include "lbm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "lbm/energy/backend.hpp"
#include "lbm/errors.hpp"
#include "lbm/harness/experiment.hpp"
#include "lbm/harness/machine.hpp"
#include "lbm/harness/toml.hpp"
#include "lbm/memory.hpp"
#include "lbm/report/records_io.hpp"
#include "lbm/report/render.hpp"
#include "lbm/report/validate.hpp"

namespace lbm {

namespace {

struct Options {
  bool json = false;
  std::string rapl_root{energy::RaplBackend::kDefaultRoot};
  std::string config;
  std::string out;
  std::vector<std::string> in;
  std::string csv;
  std::string svg;
  std::string kernel = "propagate";
};

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
}

int probe(const Options& opt) {
  const harness::MachineInfo machine = harness::probe_machine();
  std::vector<energy::PowerDomain> domains;
  std::string rapl_note;
  try {
    domains = energy::RaplBackend::open(opt.rapl_root)->domains();
  } catch (const CapabilityError& e) {
    rapl_note = e.what();
  }
  auto has = [&](energy::PowerDomain d) {
    return std::find(domains.begin(), domains.end(), d) != domains.end();
  };
  std::vector<int> nodes;
  for (int n = 0; n < machine.numa_nodes; ++n) nodes.push_back(n);
  if (opt.json) {
    nlohmann::json j = {{"package", has(energy::PowerDomain::Package)},
                        {"dram", has(energy::PowerDomain::Dram)},
                        {"synthetic", true},
                        {"numa_nodes", nodes},
                        {"logical_cpus", machine.logical_cpus},
                        {"cpu_model", machine.cpu_model}};
    if (!rapl_note.empty()) j["rapl_note"] = rapl_note;
    std::cout << j.dump() << '\n';
    return kExitOk;
  }
  auto state = [](bool ok) { return ok ? "available" : "unavailable"; };
  std::cout << fmt::format("package: {}, synthetic: available\n",
                           state(has(energy::PowerDomain::Package)));
  std::cout << fmt::format("dram: {}\n", state(has(energy::PowerDomain::Dram)));
  if (!rapl_note.empty()) std::cout << fmt::format("rapl: {}\n", rapl_note);
  std::cout << fmt::format("numa nodes: {} ({})\n", nodes.size(), fmt::join(nodes, ","));
  std::cout << fmt::format("logical cpus: {}\n", machine.logical_cpus);
  std::cout << fmt::format("cpu: {}\n", machine.cpu_model);
  return kExitOk;
}

int run(const Options& opt) {
  const auto cfg = harness::config_from_toml(harness::load_toml(opt.config));
  const harness::RunRecord record = harness::run_experiment(cfg);
  if (!opt.out.empty()) harness::append_jsonl(opt.out, record);
  std::cout << harness::to_json(record).dump() << '\n';
  return kExitOk;
}

int sweep(const Options& opt) {
  const auto plan = harness::plan_from_toml(harness::load_toml(opt.config));
  std::size_t done = 0;
  const auto records = harness::run_sweep(plan, [&](const harness::RunRecord& r) {
    if (!opt.out.empty()) harness::append_jsonl(opt.out, r);
    ++done;
    std::cerr << fmt::format("[{}/{}] {} threads={} {}: {}{}\n", done, plan.size(),
                             to_string(r.config.layout), r.config.threads,
                             to_string(r.config.memory_target), harness::to_string(r.status),
                             r.reason.empty() ? "" : " (" + r.reason + ")");
  });
  int errors = 0;
  for (const auto& r : records) errors += r.status == harness::RunStatus::Error;
  if (opt.out.empty()) {
    for (const auto& r : records) std::cout << harness::to_json(r).dump() << '\n';
  }
  std::cout << report::render_table(records);
  if (!harness::checksums_agree(records)) {
    throw Failure("checksums disagree across sweep combinations");
  }
  if (errors > 0) throw Failure(fmt::format("{} sweep combination(s) failed", errors));
  return kExitOk;
}

int report_cmd(const Options& opt) {
  std::vector<report::NamedRecords> sets;
  for (const auto& path : opt.in) {
    sets.emplace_back(std::filesystem::path(path).stem().string(), report::load_records(path));
  }
  if (sets.size() > 1) {
    std::cout << report::render_comparison(sets);
    return kExitOk;
  }
  const auto& records = sets.front().second;
  bool wrote = false;
  if (!opt.csv.empty()) {
    write_file(opt.csv, report::render_csv(records));
    wrote = true;
  }
  if (!opt.svg.empty()) {
    write_file(opt.svg, report::render_energy_chart(records, opt.kernel));
    wrote = true;
  }
  if (!wrote) std::cout << report::render_table(records);
  return kExitOk;
}

int validate(const Options& opt) {
  bool all = true;
  nlohmann::json results = nlohmann::json::array();
  report::run_validation([&](const report::SuiteResult& r) {
    all = all && r.passed;
    if (opt.json) {
      results.push_back({{"suite", r.id}, {"name", r.name}, {"passed", r.passed},
                         {"detail", r.detail}, {"seconds", r.seconds}});
    } else {
      std::cout << fmt::format("{} [{}] {} ({:.2f} s): {}\n", r.passed ? "PASS" : "FAIL", r.id,
                               r.name, r.seconds, r.detail)
                << std::flush;
    }
  });
  if (opt.json) std::cout << results.dump() << '\n';
  if (!all) throw Failure("validation failed");
  return kExitOk;
}

void report_error(const Options& opt, std::string_view kind, std::string_view message,
                  int code) {
  if (opt.json) {
    std::cerr << nlohmann::json{{"error", message}, {"kind", kind}, {"exit_code", code}}.dump()
              << '\n';
  } else {
    std::cerr << fmt::format("lbmbench: {}\n", message);
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Lattice Boltzmann energy benchmark"};
  app.require_subcommand(1);
  app.add_flag("--json", opt.json, "Machine-readable output; errors as JSON on stderr");

  auto* probe_cmd = app.add_subcommand("probe", "List power domains and NUMA nodes");
  probe_cmd->add_option("--rapl-root", opt.rapl_root, "powercap sysfs root");

  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  run_cmd->add_option("--config", opt.config, "Experiment config (TOML)")->required();
  run_cmd->add_option("--out", opt.out, "Append the record to this JSONL file");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a layout x threads x memory sweep");
  sweep_cmd->add_option("--config", opt.config, "Sweep config (TOML)")->required();
  sweep_cmd->add_option("--out", opt.out, "Append records to this JSONL file");

  auto* report_sub = app.add_subcommand("report", "Render records as table, CSV or SVG");
  report_sub->add_option("--in", opt.in, "Record file(s); several files are compared")
      ->required();
  report_sub->add_option("--csv", opt.csv, "Write CSV here");
  report_sub->add_option("--svg", opt.svg, "Write stacked energy chart here");
  report_sub->add_option("--kernel", opt.kernel, "Kernel for the chart")
      ->check(CLI::IsMember({"propagate", "collide"}));

  auto* validate_cmd = app.add_subcommand("validate", "Run the correctness suites");

  for (auto* sub : {probe_cmd, run_cmd, sweep_cmd, report_sub, validate_cmd}) {
    sub->add_flag("--json", opt.json, "Machine-readable output; errors as JSON on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(opt, "usage", e.what(), kExitFailure);
    return kExitFailure;
  }

  try {
    if (*probe_cmd) return probe(opt);
    if (*run_cmd) return run(opt);
    if (*sweep_cmd) return sweep(opt);
    if (*report_sub) return report_cmd(opt);
    if (*validate_cmd) return validate(opt);
  } catch (const CapabilityError& e) {
    report_error(opt, "capability", e.what(), kExitCapability);
    return kExitCapability;
  } catch (const std::invalid_argument& e) {
    report_error(opt, "invalid", e.what(), kExitFailure);
    return kExitFailure;
  } catch (const std::exception& e) {
    report_error(opt, "failure", e.what(), kExitFailure);
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace lbm
