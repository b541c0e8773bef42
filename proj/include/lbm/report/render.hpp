#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lbm/harness/record.hpp"

namespace lbm::report {

/// One row per (ok record, kernel).
struct ReportRow {
  std::string layout;
  int threads = 0;
  std::string memory_target;
  std::string kernel;
  double ns_per_site = 0.0;
  std::optional<double> p_avg_w_pkg;
  std::optional<double> p_avg_w_dram;
  double e_s_per_site = 0.0;
  std::optional<double> bandwidth_gbs;
};

/// Rows stably ordered by layout, threads, kernel (propagate before collide).
std::vector<ReportRow> report_rows(const std::vector<harness::RunRecord>& records);

inline constexpr std::string_view kCsvHeader =
    "layout,threads,memory_target,kernel,ns_per_site,p_avg_w_pkg,p_avg_w_dram,e_s_per_site,"
    "bandwidth_gbs";

/// Header plus one line per row; numbers as %.16e, absent values empty.
std::string render_csv(const std::vector<harness::RunRecord>& records);

/// Fixed-width text table of the same rows.
std::string render_table(const std::vector<harness::RunRecord>& records);

/// Grouped stacked bars of energy per site: one group per layout, one bar per
/// thread count (and memory target), package at the bottom, DRAM on top.
/// Throws std::invalid_argument when no ok record has `kernel`.
std::string render_energy_chart(const std::vector<harness::RunRecord>& records,
                                std::string_view kernel);

/// Scales joules to an SI prefix: {factor, prefix} with value/factor in [1, 1000)
/// for the largest value, e.g. {1e-9, "n"}.
std::pair<double, std::string> si_scale(double max_value);

struct ComparisonEntry {
  std::string set;
  double best_e_s_per_site = 0.0;
  std::string config;  // configuration of the best record
  double ratio = 1.0;  // relative to the first set
};

struct ComparisonRow {
  std::string kernel;
  std::vector<ComparisonEntry> entries;
};

using NamedRecords = std::pair<std::string, std::vector<harness::RunRecord>>;

/// Best energy per site per kernel and set. Kernels must be shared by all
/// sets; throws std::invalid_argument when none is.
std::vector<ComparisonRow> compare_records(const std::vector<NamedRecords>& sets);
std::string render_comparison(const std::vector<NamedRecords>& sets);

}  // namespace lbm::report
