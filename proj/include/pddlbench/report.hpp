#pragma once
// Aggregates episode records into the benchmark's headline metrics and
// renders them as tables (text/markdown/CSV) and figures (SVG).
//
// Metric definitions:
//   SR  (success rate)      100 * solved / problems_total
//   PL  (plan length)       mean plan length over episodes that produced a
//                           plan (no-plan episodes are excluded)
//   Ac  (executed actions)  mean longest executable prefix, same denominator
//   Execution fidelity      100 * overall Ac / overall PL
// Overall (MEAN) values are micro-averages across all of a planner's
// episodes, not averages of the per-domain means.  Mean planning time is
// taken over all episodes, including no-plan ones.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pddlbench/runner.hpp"
#include "pddlbench/util.hpp"

namespace pddlbench {

// ---------------------------------------------------------------------------
// Aggregation

struct MetricAccumulator {
  int problems_total = 0;
  int solved = 0;
  int failed = 0;
  int no_plan = 0;
  long long plan_length_sum = 0;
  long long executed_sum = 0;
  double time_sum = 0.0;

  int evaluable() const { return problems_total - no_plan; }
  double success_rate() const {
    return problems_total == 0 ? 0.0 : 100.0 * solved / problems_total;
  }
  std::optional<double> mean_plan_length() const {
    if (evaluable() == 0) return std::nullopt;
    return static_cast<double>(plan_length_sum) / evaluable();
  }
  std::optional<double> mean_executed() const {
    if (evaluable() == 0) return std::nullopt;
    return static_cast<double>(executed_sum) / evaluable();
  }
  std::optional<double> execution_fidelity() const {
    if (evaluable() == 0 || plan_length_sum == 0) return std::nullopt;
    return 100.0 * executed_sum / plan_length_sum;
  }
  double mean_time() const { return problems_total == 0 ? 0.0 : time_sum / problems_total; }

  void add(const MetricAccumulator& o) {
    problems_total += o.problems_total;
    solved += o.solved;
    failed += o.failed;
    no_plan += o.no_plan;
    plan_length_sum += o.plan_length_sum;
    executed_sum += o.executed_sum;
    time_sum += o.time_sum;
  }
};

struct PlannerSummary {
  std::string planner;
  std::map<std::string, MetricAccumulator> by_domain;
  MetricAccumulator overall;
};

struct ReportData {
  std::vector<PlannerSummary> planners;     // in first-appearance order
  std::vector<std::string> domains;         // union, lexicographic
  // Outcome per (planner, domain, problem); problems per domain are the union
  // seen in the log, lexicographic.
  std::map<std::string, std::vector<std::string>> problems_by_domain;
  std::map<std::string, std::string> outcome_grid;  // key: planner|domain|problem

  static std::string grid_key(const std::string& planner, const std::string& domain,
                              const std::string& problem) {
    return planner + '\x1f' + domain + '\x1f' + problem;
  }
};

// Validates one record's internal consistency before it is counted.
inline void check_record_consistency(const EpisodeRecord& r) {
  std::string where = r.planner + "/" + r.domain + "/" + r.problem;
  std::optional<Outcome> outcome = parse_outcome(r.outcome);
  if (!outcome) throw IoError(where + ": unknown outcome \"" + r.outcome + "\"");
  switch (*outcome) {
    case Outcome::success:
      if (!r.plan_length || !r.executed_actions)
        throw IoError(where + ": success record is missing plan_length/executed_actions");
      if (*r.executed_actions != *r.plan_length)
        throw IoError(where + ": success record with executed_actions != plan_length");
      break;
    case Outcome::failure:
      if (!r.plan_length || !r.executed_actions)
        throw IoError(where + ": failure record is missing plan_length/executed_actions");
      if (*r.executed_actions > *r.plan_length)
        throw IoError(where + ": executed_actions exceeds plan_length");
      break;
    case Outcome::no_plan:
      if (r.plan_length || r.executed_actions)
        throw IoError(where + ": no_plan record carries plan_length/executed_actions");
      if (!r.failure_reason) throw IoError(where + ": no_plan record without a reason");
      break;
  }
  if (r.plan_length && *r.plan_length < 0) throw IoError(where + ": negative plan_length");
  if (r.executed_actions && *r.executed_actions < 0)
    throw IoError(where + ": negative executed_actions");
}

// Builds the aggregate view of a results log.  A duplicate
// (planner, domain, problem) is an error: the caller must first narrow the
// log to a single run (e.g. by run id) for the metrics to be well defined.
inline ReportData build_report(const std::vector<EpisodeRecord>& records) {
  ReportData data;
  std::map<std::string, std::size_t> planner_index;
  std::set<std::string> domain_set;
  std::map<std::string, std::set<std::string>> problem_sets;

  for (const EpisodeRecord& r : records) {
    check_record_consistency(r);
    std::string key = ReportData::grid_key(r.planner, r.domain, r.problem);
    if (!data.outcome_grid.emplace(key, r.outcome).second)
      throw IoError("duplicate episode for " + r.planner + "/" + r.domain + "/" + r.problem +
                    "; narrow the log to one run id");

    auto [it, inserted] = planner_index.emplace(r.planner, data.planners.size());
    if (inserted) data.planners.push_back(PlannerSummary{r.planner, {}, {}});
    PlannerSummary& summary = data.planners[it->second];

    MetricAccumulator& acc = summary.by_domain[r.domain];
    ++acc.problems_total;
    acc.time_sum += r.planning_time_s;
    switch (*parse_outcome(r.outcome)) {
      case Outcome::success:
        ++acc.solved;
        acc.plan_length_sum += *r.plan_length;
        acc.executed_sum += *r.executed_actions;
        break;
      case Outcome::failure:
        ++acc.failed;
        acc.plan_length_sum += *r.plan_length;
        acc.executed_sum += *r.executed_actions;
        break;
      case Outcome::no_plan:
        ++acc.no_plan;
        break;
    }

    domain_set.insert(r.domain);
    problem_sets[r.domain].insert(r.problem);
  }

  if (data.planners.empty()) throw IoError("results log contains no episodes");

  for (PlannerSummary& summary : data.planners)
    for (const auto& [domain, acc] : summary.by_domain) summary.overall.add(acc);
  data.domains.assign(domain_set.begin(), domain_set.end());
  for (const std::string& d : data.domains)
    data.problems_by_domain[d].assign(problem_sets[d].begin(), problem_sets[d].end());
  return data;
}

// ---------------------------------------------------------------------------
// Rendering helpers

namespace detail {

inline std::string opt_fixed(const std::optional<double>& v, int decimals,
                             const std::string& missing = "-") {
  return v ? fmt_fixed(*v, decimals) : missing;
}

inline std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline const MetricAccumulator* find_domain(const PlannerSummary& p, const std::string& domain) {
  auto it = p.by_domain.find(domain);
  return it == p.by_domain.end() ? nullptr : &it->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Summary table (the wide SR/PL/Ac grid with a MEAN block)

inline std::string render_summary_csv(const ReportData& data) {
  std::ostringstream out;
  out << "planner";
  for (const std::string& d : data.domains) out << "," << d << "_sr," << d << "_pl," << d << "_ac";
  out << ",mean_sr,mean_pl,mean_ac\n";
  for (const PlannerSummary& p : data.planners) {
    out << detail::csv_quote(p.planner);
    for (const std::string& d : data.domains) {
      const MetricAccumulator* acc = detail::find_domain(p, d);
      if (!acc) {
        out << ",,,";
        continue;
      }
      out << "," << fmt_fixed(acc->success_rate(), 4) << ","
          << detail::opt_fixed(acc->mean_plan_length(), 4, "") << ","
          << detail::opt_fixed(acc->mean_executed(), 4, "");
    }
    out << "," << fmt_fixed(p.overall.success_rate(), 4) << ","
        << detail::opt_fixed(p.overall.mean_plan_length(), 4, "") << ","
        << detail::opt_fixed(p.overall.mean_executed(), 4, "") << "\n";
  }
  return out.str();
}

namespace detail {

// Shared row loop for the text and markdown summary layouts.
template <typename CellFn>
inline void summary_cells(const ReportData& data, const PlannerSummary& p, CellFn&& cell) {
  for (const std::string& d : data.domains) {
    const MetricAccumulator* acc = find_domain(p, d);
    cell(acc ? fmt_fixed(acc->success_rate(), 1) : "-",
         acc ? opt_fixed(acc->mean_plan_length(), 1) : "-",
         acc ? opt_fixed(acc->mean_executed(), 1) : "-");
  }
  cell(fmt_fixed(p.overall.success_rate(), 1), opt_fixed(p.overall.mean_plan_length(), 1),
       opt_fixed(p.overall.mean_executed(), 1));
}

}  // namespace detail

inline std::string render_summary_markdown(const ReportData& data) {
  std::ostringstream out;
  out << "| Planner |";
  for (const std::string& d : data.domains) out << " " << d << " SR | PL | Ac |";
  out << " MEAN SR | PL | Ac |\n|---|";
  for (std::size_t i = 0; i < (data.domains.size() + 1) * 3; ++i) out << "---|";
  out << "\n";
  for (const PlannerSummary& p : data.planners) {
    out << "| " << p.planner << " |";
    detail::summary_cells(data, p,
                          [&](const std::string& sr, const std::string& pl,
                              const std::string& ac) { out << " " << sr << " | " << pl << " | " << ac << " |"; });
    out << "\n";
  }
  return out.str();
}

inline std::string render_summary_text(const ReportData& data) {
  constexpr std::size_t kCell = 7;
  std::size_t name_width = 8;
  for (const PlannerSummary& p : data.planners) name_width = std::max(name_width, p.planner.size());

  std::ostringstream out;
  out << detail::pad_right("Planner", name_width);
  for (const std::string& d : data.domains) out << " | " << detail::pad_left(d, 3 * kCell + 2);
  out << " | " << detail::pad_left("MEAN", 3 * kCell + 2) << "\n";
  out << detail::pad_right("", name_width);
  for (std::size_t i = 0; i < data.domains.size() + 1; ++i)
    out << " | " << detail::pad_left("SR", kCell) << detail::pad_left("PL", kCell + 1)
        << detail::pad_left("Ac", kCell + 1);
  out << "\n" << std::string(name_width + (data.domains.size() + 1) * (3 * kCell + 5), '-') << "\n";
  for (const PlannerSummary& p : data.planners) {
    out << detail::pad_right(p.planner, name_width);
    detail::summary_cells(data, p,
                          [&](const std::string& sr, const std::string& pl, const std::string& ac) {
                            out << " | " << detail::pad_left(sr, kCell)
                                << detail::pad_left(pl, kCell + 1)
                                << detail::pad_left(ac, kCell + 1);
                          });
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Long-form CSVs

inline std::string render_domain_csv(const ReportData& data) {
  std::ostringstream out;
  out << "planner,domain,problems,solved,failed,no_plan,success_rate,mean_plan_length,"
         "mean_executed_actions,mean_planning_time_s\n";
  for (const PlannerSummary& p : data.planners)
    for (const std::string& d : data.domains) {
      const MetricAccumulator* acc = detail::find_domain(p, d);
      if (!acc) continue;
      out << detail::csv_quote(p.planner) << "," << d << "," << acc->problems_total << ","
          << acc->solved << "," << acc->failed << "," << acc->no_plan << ","
          << fmt_fixed(acc->success_rate(), 4) << ","
          << detail::opt_fixed(acc->mean_plan_length(), 4, "") << ","
          << detail::opt_fixed(acc->mean_executed(), 4, "") << ","
          << fmt_fixed(acc->mean_time(), 4) << "\n";
    }
  return out.str();
}

inline std::string render_time_csv(const ReportData& data) {
  std::ostringstream out;
  out << "planner,mean_planning_time_s,episodes\n";
  for (const PlannerSummary& p : data.planners)
    out << detail::csv_quote(p.planner) << "," << fmt_fixed(p.overall.mean_time(), 4) << ","
        << p.overall.problems_total << "\n";
  return out.str();
}

inline std::string render_time_markdown(const ReportData& data) {
  std::ostringstream out;
  out << "| Planner | Mean planning time (s) |\n|---|---|\n";
  for (const PlannerSummary& p : data.planners)
    out << "| " << p.planner << " | " << fmt_fixed(p.overall.mean_time(), 2) << " |\n";
  return out.str();
}

inline std::string render_fidelity_csv(const ReportData& data) {
  std::ostringstream out;
  out << "planner,overall_plan_length,overall_executed_actions,execution_fidelity_pct\n";
  for (const PlannerSummary& p : data.planners)
    out << detail::csv_quote(p.planner) << ","
        << detail::opt_fixed(p.overall.mean_plan_length(), 4, "") << ","
        << detail::opt_fixed(p.overall.mean_executed(), 4, "") << ","
        << detail::opt_fixed(p.overall.execution_fidelity(), 4, "") << "\n";
  return out.str();
}

inline std::string render_success_csv(const ReportData& data) {
  std::ostringstream out;
  out << "planner,success_rate_pct,solved,problems\n";
  for (const PlannerSummary& p : data.planners)
    out << detail::csv_quote(p.planner) << "," << fmt_fixed(p.overall.success_rate(), 4) << ","
        << p.overall.solved << "," << p.overall.problems_total << "\n";
  return out.str();
}

inline std::string render_grid_csv(const ReportData& data) {
  std::ostringstream out;
  out << "planner,domain,problem,outcome\n";
  for (const PlannerSummary& p : data.planners)
    for (const std::string& d : data.domains)
      for (const std::string& prob : data.problems_by_domain.at(d)) {
        auto it = data.outcome_grid.find(ReportData::grid_key(p.planner, d, prob));
        if (it == data.outcome_grid.end()) continue;
        out << detail::csv_quote(p.planner) << "," << d << "," << prob << "," << it->second
            << "\n";
      }
  return out.str();
}

// ---------------------------------------------------------------------------
// Figures

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Scatter of overall plan length (x) against executed actions (y); a planner
// whose plans execute end to end sits on the dashed y = x line.
inline std::string render_fidelity_svg(const ReportData& data) {
  constexpr double kW = 640, kH = 480, kMargin = 60;
  double max_axis = 1.0;
  for (const PlannerSummary& p : data.planners) {
    if (auto pl = p.overall.mean_plan_length()) max_axis = std::max(max_axis, *pl);
    if (auto ac = p.overall.mean_executed()) max_axis = std::max(max_axis, *ac);
  }
  max_axis *= 1.1;
  auto x = [&](double v) { return kMargin + (kW - 2 * kMargin) * v / max_axis; };
  auto y = [&](double v) { return kH - kMargin - (kH - 2 * kMargin) * v / max_axis; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(max_axis) << "\" y2=\""
      << y(0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(0) << "\" y2=\""
      << y(max_axis) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(max_axis) << "\" y2=\""
      << y(max_axis) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 14
      << "\" text-anchor=\"middle\">mean plan length (PL)</text>\n";
  out << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kH / 2 << ")\">mean executed actions (Ac)</text>\n";
  for (const PlannerSummary& p : data.planners) {
    auto pl = p.overall.mean_plan_length();
    auto ac = p.overall.mean_executed();
    if (!pl || !ac) continue;
    out << "<circle cx=\"" << x(*pl) << "\" cy=\"" << y(*ac)
        << "\" r=\"5\" fill=\"#1565c0\" fill-opacity=\"0.8\"/>\n";
    out << "<text x=\"" << x(*pl) + 8 << "\" y=\"" << y(*ac) + 4 << "\">"
        << detail::svg_escape(p.planner) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string render_success_svg(const ReportData& data) {
  constexpr double kBarH = 22, kGap = 8, kLeft = 220, kRight = 70, kTop = 30;
  double width = kLeft + 400 + kRight;
  double height = kTop + data.planners.size() * (kBarH + kGap) + 20;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"18\">overall success rate (%)</text>\n";
  double row = kTop;
  for (const PlannerSummary& p : data.planners) {
    double sr = p.overall.success_rate();
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << row + kBarH - 6
        << "\" text-anchor=\"end\">" << detail::svg_escape(p.planner) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << row << "\" width=\"" << 4.0 * sr
        << "\" height=\"" << kBarH << "\" fill=\"#1565c0\"/>\n";
    out << "<text x=\"" << kLeft + 4.0 * sr + 6 << "\" y=\"" << row + kBarH - 6 << "\">"
        << fmt_fixed(sr, 1) << "</text>\n";
    row += kBarH + kGap;
  }
  out << "</svg>\n";
  return out.str();
}

// One row per planner, one square per problem, grouped by domain:
// green success, red failure, gray no plan.
inline std::string render_grid_svg(const ReportData& data) {
  constexpr double kCell = 14, kGap = 2, kGroupGap = 14, kLeft = 220, kTop = 46;
  std::size_t total_cols = 0;
  for (const std::string& d : data.domains) total_cols += data.problems_by_domain.at(d).size();
  double width = kLeft + total_cols * (kCell + kGap) + data.domains.size() * kGroupGap + 40;
  double height = kTop + data.planners.size() * (kCell + kGap) + 20;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  double gx = kLeft;
  for (const std::string& d : data.domains) {
    double group_width = data.problems_by_domain.at(d).size() * (kCell + kGap);
    out << "<text x=\"" << gx + group_width / 2 << "\" y=\"" << kTop - 10
        << "\" text-anchor=\"middle\">" << d << "</text>\n";
    gx += group_width + kGroupGap;
  }
  double row = kTop;
  for (const PlannerSummary& p : data.planners) {
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << row + kCell - 3
        << "\" text-anchor=\"end\">" << detail::svg_escape(p.planner) << "</text>\n";
    double col = kLeft;
    for (const std::string& d : data.domains) {
      for (const std::string& prob : data.problems_by_domain.at(d)) {
        auto it = data.outcome_grid.find(ReportData::grid_key(p.planner, d, prob));
        std::string fill = "white";
        if (it != data.outcome_grid.end()) {
          if (it->second == "success") fill = "#2e7d32";
          else if (it->second == "failure") fill = "#c62828";
          else fill = "#9e9e9e";
        }
        out << "<rect x=\"" << col << "\" y=\"" << row << "\" width=\"" << kCell
            << "\" height=\"" << kCell << "\" fill=\"" << fill
            << "\" stroke=\"#eeeeee\"/>\n";
        col += kCell + kGap;
      }
      col += kGroupGap;
    }
    row += kCell + kGap;
  }
  out << "</svg>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Emission

struct ReportFiles {
  std::filesystem::path summary_csv, summary_md;
  std::filesystem::path domain_csv;
  std::filesystem::path time_csv, time_md;
  std::filesystem::path fidelity_csv, fidelity_svg;
  std::filesystem::path success_csv, success_svg;
  std::filesystem::path grid_csv, grid_svg;
};

inline ReportFiles emit_report(const ReportData& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  ReportFiles files;
  auto emit = [&](std::filesystem::path& slot, const char* name, const std::string& content) {
    slot = out_dir / name;
    write_file(slot, content);
  };
  emit(files.summary_csv, "summary_table.csv", render_summary_csv(data));
  emit(files.summary_md, "summary_table.md", render_summary_markdown(data));
  emit(files.domain_csv, "domain_summaries.csv", render_domain_csv(data));
  emit(files.time_csv, "planning_time.csv", render_time_csv(data));
  emit(files.time_md, "planning_time.md", render_time_markdown(data));
  emit(files.fidelity_csv, "fidelity_scatter.csv", render_fidelity_csv(data));
  emit(files.fidelity_svg, "fidelity_scatter.svg", render_fidelity_svg(data));
  emit(files.success_csv, "success_rate.csv", render_success_csv(data));
  emit(files.success_svg, "success_rate.svg", render_success_svg(data));
  emit(files.grid_csv, "outcome_grid.csv", render_grid_csv(data));
  emit(files.grid_svg, "outcome_grid.svg", render_grid_svg(data));
  return files;
}

}  // namespace pddlbench
