#include "lbm/report/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace lbm::report {

using energy::PowerDomain;
using harness::KernelMetrics;
using harness::RunRecord;
using harness::RunStatus;

namespace {

int kernel_rank(std::string_view kernel) {
  if (kernel == "propagate") return 0;
  if (kernel == "collide") return 1;
  return 2;
}

auto row_key(const RunRecord& r, const KernelMetrics& k) {
  return std::make_tuple(static_cast<int>(r.config.layout.tag), r.config.layout.vl,
                         r.config.threads, kernel_rank(k.kernel), k.kernel);
}

std::optional<double> domain_value(const std::map<PowerDomain, double>& m, PowerDomain d) {
  const auto it = m.find(d);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

struct Entry {
  const RunRecord* record;
  const KernelMetrics* kernel;
};

std::vector<Entry> sorted_entries(const std::vector<RunRecord>& records) {
  std::vector<Entry> entries;
  for (const auto& r : records) {
    if (r.status != RunStatus::Ok) continue;
    for (const auto& k : r.kernels) entries.push_back({&r, &k});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return row_key(*a.record, *a.kernel) < row_key(*b.record, *b.kernel);
  });
  return entries;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string number(double v) { return fmt::format("{:.16e}", v); }
std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<ReportRow> report_rows(const std::vector<RunRecord>& records) {
  std::vector<ReportRow> rows;
  for (const auto& [r, k] : sorted_entries(records)) {
    ReportRow row;
    row.layout = to_string(r->config.layout);
    row.threads = r->config.threads;
    row.memory_target = to_string(r->config.memory_target);
    row.kernel = k->kernel;
    row.ns_per_site = k->ns_per_site;
    row.p_avg_w_pkg = domain_value(k->p_avg_w, PowerDomain::Package);
    row.p_avg_w_dram = domain_value(k->p_avg_w, PowerDomain::Dram);
    row.e_s_per_site = k->e_s_per_site_j;
    row.bandwidth_gbs = k->bandwidth_gbs;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_csv(const std::vector<RunRecord>& records) {
  std::string out(kCsvHeader);
  out += "\r\n";
  for (const auto& row : report_rows(records)) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\r\n", csv_field(row.layout), row.threads,
                       csv_field(row.memory_target), csv_field(row.kernel),
                       number(row.ns_per_site), number(row.p_avg_w_pkg),
                       number(row.p_avg_w_dram), number(row.e_s_per_site),
                       number(row.bandwidth_gbs));
  }
  return out;
}

std::string render_table(const std::vector<RunRecord>& records) {
  auto opt = [](const std::optional<double>& v, std::string_view spec) {
    return v ? fmt::format(fmt::runtime(spec), *v) : std::string("-");
  };
  std::string out = fmt::format("{:<12} {:>7} {:<12} {:<10} {:>12} {:>10} {:>10} {:>12} {:>10}\n",
                                "layout", "threads", "memory", "kernel", "ns/site", "P_pkg W",
                                "P_dram W", "E_s J/site", "GB/s");
  for (const auto& row : report_rows(records)) {
    out += fmt::format("{:<12} {:>7} {:<12} {:<10} {:>12.4f} {:>10} {:>10} {:>12.4e} {:>10}\n",
                       row.layout, row.threads, row.memory_target, row.kernel, row.ns_per_site,
                       opt(row.p_avg_w_pkg, "{:.2f}"), opt(row.p_avg_w_dram, "{:.2f}"),
                       row.e_s_per_site, opt(row.bandwidth_gbs, "{:.2f}"));
  }
  return out;
}

std::pair<double, std::string> si_scale(double max_value) {
  static const std::pair<double, const char*> prefixes[] = {
      {1.0, ""}, {1e-3, "m"}, {1e-6, "µ"}, {1e-9, "n"}, {1e-12, "p"}, {1e-15, "f"}};
  if (!(max_value > 0.0)) return {1.0, ""};
  for (const auto& [factor, prefix] : prefixes) {
    if (max_value >= factor) return {factor, prefix};
  }
  return {1e-15, "f"};
}

std::string render_energy_chart(const std::vector<RunRecord>& records, std::string_view kernel) {
  struct Bar {
    std::string label;
    double package = 0.0;
    std::optional<double> dram;
    double total = 0.0;
  };
  std::vector<std::pair<std::string, std::vector<Bar>>> groups;
  std::set<std::string> targets;
  for (const auto& [r, k] : sorted_entries(records)) {
    if (k->kernel == kernel) targets.insert(to_string(r->config.memory_target));
  }
  bool missing_dram = false;
  for (const auto& [r, k] : sorted_entries(records)) {
    if (k->kernel != kernel) continue;
    const std::string layout = to_string(r->config.layout);
    if (groups.empty() || groups.back().first != layout) groups.push_back({layout, {}});
    Bar bar;
    bar.label = fmt::format("{}t", r->config.threads);
    if (targets.size() > 1) bar.label += " " + to_string(r->config.memory_target);
    const auto pkg = domain_value(k->e_s_per_site_j_domain, PowerDomain::Package);
    bar.dram = domain_value(k->e_s_per_site_j_domain, PowerDomain::Dram);
    bar.package = pkg ? *pkg : k->e_s_per_site_j - bar.dram.value_or(0.0);
    if (!bar.dram) missing_dram = true;
    bar.total = bar.package + bar.dram.value_or(0.0);
    groups.back().second.push_back(bar);
  }
  if (groups.empty()) {
    throw std::invalid_argument(fmt::format("no records for kernel '{}'", kernel));
  }

  double max_total = 0.0;
  std::size_t bars = 0;
  for (const auto& g : groups) {
    for (const auto& b : g.second) {
      if (b.package < 0.0 || b.dram.value_or(0.0) < 0.0) {
        throw std::invalid_argument("negative energy in record");
      }
      max_total = std::max(max_total, b.total);
      ++bars;
    }
  }
  const auto [factor, prefix] = si_scale(max_total);
  const double top_value = max_total > 0.0 ? max_total / factor : 1.0;

  constexpr double left = 90, top = 50, plot_h = 300, bar_w = 28, bar_gap = 6, group_gap = 36;
  const double plot_w =
      static_cast<double>(bars) * (bar_w + bar_gap) + static_cast<double>(groups.size()) * group_gap;
  const double width = left + plot_w + 170;
  const double height = top + plot_h + 80;
  const double base = top + plot_h;
  auto y_of = [&](double joules) { return joules / factor / top_value * plot_h; };

  std::string svg;
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"20\" font-size=\"14\">Energy per site, {}</text>\n",
                     left, xml_escape(kernel));
  svg += fmt::format(
      "<text x=\"16\" y=\"{:.1f}\" transform=\"rotate(-90 16 {:.1f})\" "
      "text-anchor=\"middle\">Energy [{}J/site]</text>\n",
      top + plot_h / 2, top + plot_h / 2, prefix);
  for (int t = 0; t <= 4; ++t) {
    const double v = top_value * t / 4.0;
    const double y = base - plot_h * t / 4.0;
    svg += fmt::format(
        "<line x1=\"{:.1f}\" y1=\"{:.3f}\" x2=\"{:.1f}\" y2=\"{:.3f}\" stroke=\"#ccc\"/>\n", left,
        y, left + plot_w, y);
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.3f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, y + 4, v);
  }
  svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"#000\"/>\n",
                     left, top, base);
  svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{2:.1f}\" x2=\"{1:.1f}\" y2=\"{2:.1f}\" stroke=\"#000\"/>\n",
                     left, left + plot_w, base);

  double x = left + group_gap / 2;
  for (const auto& [layout, group_bars] : groups) {
    const double group_start = x;
    for (const auto& b : group_bars) {
      const double h_pkg = y_of(b.package);
      svg += fmt::format(
          "<rect class=\"package\" x=\"{:.3f}\" y=\"{:.6f}\" width=\"{:.1f}\" height=\"{:.6f}\" "
          "fill=\"#3b6ea5\" data-joules-per-site=\"{:.16e}\"/>\n",
          x, base - h_pkg, bar_w, h_pkg, b.package);
      if (b.dram) {
        const double h_dram = y_of(*b.dram);
        svg += fmt::format(
            "<rect class=\"dram\" x=\"{:.3f}\" y=\"{:.6f}\" width=\"{:.1f}\" height=\"{:.6f}\" "
            "fill=\"#e08a2c\" data-joules-per-site=\"{:.16e}\"/>\n",
            x, base - h_pkg - h_dram, bar_w, h_dram, *b.dram);
      }
      svg += fmt::format(
          "<text class=\"bar-label\" x=\"{:.3f}\" y=\"{:.1f}\" text-anchor=\"middle\" "
          "data-total=\"{:.16e}\">{}</text>\n",
          x + bar_w / 2, base + 14, b.total, xml_escape(b.label));
      x += bar_w + bar_gap;
    }
    svg += fmt::format(
        "<text class=\"group-label\" x=\"{:.3f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
        (group_start + x - bar_gap) / 2, base + 32, xml_escape(layout));
    x += group_gap;
  }

  const double lx = left + plot_w + 20;
  svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"12\" height=\"12\" fill=\"#3b6ea5\"/>\n", lx, top);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">Package</text>\n", lx + 18, top + 10);
  svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"12\" height=\"12\" fill=\"#e08a2c\"/>\n", lx, top + 20);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">DRAM</text>\n", lx + 18, top + 30);
  if (missing_dram) {
    svg += fmt::format(
        "<text class=\"note\" x=\"{:.1f}\" y=\"{:.1f}\">DRAM energy unavailable:</text>\n", lx,
        top + 54);
    svg += fmt::format(
        "<text class=\"note\" x=\"{:.1f}\" y=\"{:.1f}\">package-only bars</text>\n", lx, top + 68);
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<ComparisonRow> compare_records(const std::vector<NamedRecords>& sets) {
  if (sets.empty()) throw std::invalid_argument("no record sets to compare");
  std::vector<std::map<std::string, Entry>> best(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (const auto& [r, k] : sorted_entries(sets[s].second)) {
      auto it = best[s].find(k->kernel);
      if (it == best[s].end() || k->e_s_per_site_j < it->second.kernel->e_s_per_site_j) {
        best[s][k->kernel] = {r, k};
      }
    }
  }
  std::vector<std::string> kernels;
  for (const auto& [kernel, entry] : best[0]) {
    bool shared = true;
    for (const auto& b : best) shared = shared && b.contains(kernel);
    if (shared) kernels.push_back(kernel);
  }
  if (kernels.empty()) throw std::invalid_argument("record sets share no kernel");
  std::stable_sort(kernels.begin(), kernels.end(), [](const auto& a, const auto& b) {
    return kernel_rank(a) < kernel_rank(b);
  });

  std::vector<ComparisonRow> rows;
  for (const auto& kernel : kernels) {
    ComparisonRow row{kernel, {}};
    const double reference = best[0].at(kernel).kernel->e_s_per_site_j;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const Entry& e = best[s].at(kernel);
      const auto& c = e.record->config;
      row.entries.push_back(
          {sets[s].first, e.kernel->e_s_per_site_j,
           fmt::format("layout={} threads={} memory_target={}", to_string(c.layout), c.threads,
                       to_string(c.memory_target)),
           e.kernel->e_s_per_site_j / reference});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_comparison(const std::vector<NamedRecords>& sets) {
  std::string out = fmt::format("{:<10} {:<16} {:>14} {:>8}  {}\n", "kernel", "set",
                                "E_s J/site", "ratio", "best config");
  for (const auto& row : compare_records(sets)) {
    for (const auto& e : row.entries) {
      out += fmt::format("{:<10} {:<16} {:>14.6e} {:>8.4f}  {}\n", row.kernel, e.set,
                         e.best_e_s_per_site, e.ratio, e.config);
    }
  }
  return out;
}

}  // namespace lbm::report
