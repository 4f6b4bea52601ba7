#pragma once
// Synthesizes a results log whose aggregate metrics reproduce the published
// benchmark table for ten planners over five domains.
//
// The table prints SR/PL/Ac rounded to one decimal (MEAN to two), so many
// integer outcomes are consistent with it.  For each planner this generator
// enumerates, per domain, every integer plan-length/executed-step sum inside
// the cell's rounding window, then picks the combination whose micro-averaged
// MEAN column and execution-fidelity value sit closest to the published
// numbers.  Episodes realizing those sums are then materialized, with
// successes assigned the smallest plan lengths (executed == planned) and one
// failure episode absorbing the remainders.  Any cell or MEAN window that
// cannot be hit makes the generator throw rather than emit a log that only
// approximates the table.
//
// Published per-cell no-plan counts exist only for the classical planner
// (two tidybot problems); all other cells are realized with every episode
// producing a plan, which is one consistent reading of the table.

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "pddlbench/runner.hpp"

namespace pddlbench::test {

struct PublishedCell {
  double sr, pl, ac;
};

struct PublishedRow {
  const char* planner;
  PublishedCell cell[5];
  PublishedCell mean;
  double planning_time_s;  // published for the LLMs; synthetic constant for FD
  double fidelity;         // figure caption value; < 0 when not captioned
};

inline constexpr int kFixtureProblemCounts[5] = {14, 20, 20, 20, 19};
inline constexpr const char* kFixtureDomains[5] = {"barman", "blocks", "elevator", "satellite",
                                                   "tidybot"};

inline const std::vector<PublishedRow>& published_rows() {
  static const std::vector<PublishedRow> rows = {
      {"Fast Downward",
       {{100.0, 98.7, 98.7}, {100.0, 26.9, 26.9}, {100.0, 10.4, 10.4}, {100.0, 40.0, 40.0},
        {89.5, 39.5, 39.5}},
       {97.85, 39.56, 39.56},
       1.37,
       100.0},
      {"Claude Sonnet 3.5",
       {{0.0, 14.6, 3.9}, {45.0, 19.6, 14.1}, {100.0, 10.3, 10.3}, {45.0, 23.6, 23.1},
        {5.3, 14.8, 2.7}},
       {41.94, 16.69, 11.34},
       14.22,
       67.9},
      {"Claude Sonnet 3.7",
       {{0.0, 96.9, 10.6}, {80.0, 21.6, 19.6}, {100.0, 9.6, 9.6}, {85.0, 40.1, 34.6},
        {5.3, 36.0, 3.5}},
       {58.06, 37.26, 16.02},
       28.90,
       -1.0},
      {"Claude Sonnet 3.7 Thinking",
       {{7.1, 99.9, 20.9}, {100.0, 20.0, 20.0}, {100.0, 9.3, 9.3}, {85.0, 47.8, 44.7},
        {5.3, 36.1, 4.3}},
       {63.44, 38.98, 19.92},
       112.61,
       51.1},
      {"Gemini 2 Flash",
       {{0.0, 41.8, 1.4}, {10.0, 20.5, 8.8}, {90.0, 14.5, 13.9}, {5.0, 31.0, 3.2},
        {5.3, 34.6, 2.4}},
       {23.66, 27.53, 6.28},
       15.13,
       22.8},
      {"Gemini 2 Flash Thinking",
       {{0.0, 90.0, 4.4}, {40.0, 19.3, 13.0}, {100.0, 15.1, 15.1}, {25.0, 55.2, 21.4},
        {0.0, 30.7, 3.6}},
       {35.48, 39.08, 12.02},
       22.02,
       -1.0},
      {"Llama 405B Instruct",
       {{0.0, 48.9, 4.1}, {5.0, 17.4, 6.0}, {15.0, 9.7, 1.4}, {5.0, 38.1, 3.9},
        {0.0, 20.1, 2.5}},
       {5.38, 25.46, 3.55},
       27.08,
       13.9},
      {"Llama DeepSeek R1",
       {{7.1, 54.9, 12.4}, {90.0, 18.4, 17.2}, {100.0, 10.1, 10.1}, {40.0, 32.1, 25.4},
        {5.3, 17.2, 3.3}},
       {51.61, 24.77, 13.86},
       160.15,
       55.9},
      {"GPT-o3 mini",
       {{0.0, 95.9, 7.6}, {100.0, 18.5, 18.5}, {100.0, 9.7, 9.7}, {65.0, 65.0, 46.7},
        {5.3, 34.3, 6.3}},
       {58.06, 41.48, 18.53},
       98.61,
       -1.0},
      {"GPT-o1",
       {{28.6, 78.8, 44.6}, {100.0, 19.3, 19.3}, {100.0, 10.9, 10.9}, {70.0, 32.2, 27.1},
        {5.3, 4.5, 0.9}},
       {63.44, 26.18, 19.22},
       140.51,
       73.4}};
  return rows;
}

namespace fixture_detail {

// Integers s for which s/den, rounded half-up to one decimal, prints as v.
inline std::vector<int> window_ints(double v, int den) {
  std::vector<int> out;
  double lo = (v - 0.05) * den;
  double hi = (v + 0.05) * den;
  for (int s = std::max(0, static_cast<int>(std::ceil(lo - 1e-6))); s <= hi + 1e-6; ++s)
    if (std::abs(static_cast<double>(s) / den - v) <= 0.05 + 1e-9) out.push_back(s);
  return out;
}

inline int solved_for(double sr, int total) {
  int best = 0;
  double best_dev = 1e9;
  for (int s = 0; s <= total; ++s) {
    double dev = std::abs(100.0 * s / total - sr);
    if (dev < best_dev) {
      best_dev = dev;
      best = s;
    }
  }
  if (best_dev > 0.05 + 1e-9)
    throw std::runtime_error("no integer solved count reproduces SR " + std::to_string(sr) +
                             " over " + std::to_string(total));
  return best;
}

struct CellSolution {
  int total = 0;
  int solved = 0;
  int no_plan = 0;
  int pl_sum = 0;
  int ac_sum = 0;
};

}  // namespace fixture_detail

// Per-planner integer realization of the table row.
inline std::vector<fixture_detail::CellSolution> solve_row(const PublishedRow& row) {
  using fixture_detail::CellSolution;
  using fixture_detail::window_ints;

  struct CellChoices {
    CellSolution base;
    std::vector<std::pair<int, int>> sums;  // feasible (pl_sum, ac_sum) pairs
  };

  std::vector<CellChoices> cells(5);
  int den_total = 0;
  for (int d = 0; d < 5; ++d) {
    CellChoices& c = cells[d];
    c.base.total = kFixtureProblemCounts[d];
    c.base.no_plan = (std::string(row.planner) == "Fast Downward" && d == 4) ? 2 : 0;
    c.base.solved = fixture_detail::solved_for(row.cell[d].sr, c.base.total);
    int den = c.base.total - c.base.no_plan;
    den_total += den;

    std::vector<int> pl_wins = window_ints(row.cell[d].pl, den);
    std::vector<int> ac_wins = window_ints(row.cell[d].ac, den);
    for (int sp : pl_wins)
      for (int sa : ac_wins) {
        if (sa > sp) continue;
        if (c.base.solved == den && sa != sp) continue;  // full success: Ac == PL exactly
        c.sums.emplace_back(sp, sa);
      }
    if (c.sums.empty())
      throw std::runtime_error(std::string(row.planner) + "/" + kFixtureDomains[d] +
                               ": no integer sums reproduce the printed PL/Ac cell");
  }

  // Exhaustive product search for the combination closest to the MEAN column
  // (and the captioned fidelity value, when there is one).
  std::vector<std::size_t> pick(5, 0), best_pick;
  double best_score = 1e18;
  std::vector<std::size_t> idx(5, 0);
  while (true) {
    long long pl_total = 0, ac_total = 0;
    for (int d = 0; d < 5; ++d) {
      pl_total += cells[d].sums[idx[d]].first;
      ac_total += cells[d].sums[idx[d]].second;
    }
    double mean_pl = static_cast<double>(pl_total) / den_total;
    double mean_ac = static_cast<double>(ac_total) / den_total;
    double score = std::abs(mean_pl - row.mean.pl) + std::abs(mean_ac - row.mean.ac);
    if (row.fidelity >= 0.0 && pl_total > 0)
      score += 0.5 * std::abs(100.0 * ac_total / pl_total - row.fidelity);
    if (score < best_score) {
      best_score = score;
      best_pick = idx;
    }
    int d = 0;
    while (d < 5 && ++idx[d] == cells[d].sums.size()) idx[d++] = 0;
    if (d == 5) break;
  }

  long long pl_total = 0, ac_total = 0;
  int solved_total = 0, n_total = 0;
  std::vector<CellSolution> solution;
  for (int d = 0; d < 5; ++d) {
    CellSolution s = cells[d].base;
    s.pl_sum = cells[d].sums[best_pick[d]].first;
    s.ac_sum = cells[d].sums[best_pick[d]].second;
    solution.push_back(s);
    pl_total += s.pl_sum;
    ac_total += s.ac_sum;
    solved_total += s.solved;
    n_total += s.total;
  }

  auto check = [&](double got, double want, double tol, const char* what) {
    if (std::abs(got - want) > tol)
      throw std::runtime_error(std::string(row.planner) + ": best achievable " + what + " " +
                               std::to_string(got) + " misses published " + std::to_string(want));
  };
  check(100.0 * solved_total / n_total, row.mean.sr, 0.05 + 1e-9, "MEAN SR");
  check(static_cast<double>(pl_total) / den_total, row.mean.pl, 0.05 + 1e-9, "MEAN PL");
  check(static_cast<double>(ac_total) / den_total, row.mean.ac, 0.05 + 1e-9, "MEAN Ac");
  if (row.fidelity >= 0.0)
    check(100.0 * ac_total / pl_total, row.fidelity, 0.1 + 1e-9, "execution fidelity");
  return solution;
}

// Materializes the full synthetic results log, one record per episode.
inline std::vector<EpisodeRecord> generate_published_table_records() {
  std::vector<EpisodeRecord> records;
  for (const PublishedRow& row : published_rows()) {
    std::vector<fixture_detail::CellSolution> cells = solve_row(row);
    for (int d = 0; d < 5; ++d) {
      const fixture_detail::CellSolution& cell = cells[d];
      int den = cell.total - cell.no_plan;
      int fail = den - cell.solved;

      // Successes take the smallest plan lengths (one action each, or an even
      // split when every episode succeeded); failures absorb the rest.
      std::vector<int> pl(den, 0), ac(den, 0);
      if (fail == 0) {
        for (int i = 0; i < den; ++i) pl[i] = cell.pl_sum / den + (i < cell.pl_sum % den ? 1 : 0);
        ac = pl;
      } else {
        int per_success = cell.ac_sum >= cell.solved ? 1 : 0;
        for (int i = 0; i < cell.solved; ++i) pl[i] = ac[i] = per_success;
        int rem_pl = cell.pl_sum - per_success * cell.solved;
        int rem_ac = cell.ac_sum - per_success * cell.solved;
        if (rem_pl < 0 || rem_ac < 0 || rem_ac > rem_pl)
          throw std::runtime_error("episode construction underflow");
        for (int i = 0; i < fail; ++i)
          pl[cell.solved + i] = rem_pl / fail + (i < rem_pl % fail ? 1 : 0);
        for (int i = 0; i < fail && rem_ac > 0; ++i) {
          ac[cell.solved + i] = std::min(pl[cell.solved + i], rem_ac);
          rem_ac -= ac[cell.solved + i];
        }
        if (rem_ac != 0) throw std::runtime_error("executed steps do not fit under plan lengths");
      }

      for (int i = 0; i < cell.total; ++i) {
        EpisodeRecord r;
        r.planner = row.planner;
        r.domain = kFixtureDomains[d];
        char name[16];
        std::snprintf(name, sizeof name, "p%02d", i + 1);
        r.problem = name;
        r.planning_time_s = row.planning_time_s;
        r.timestamp = "2025-03-01T00:00:00Z";
        r.run_id = "published";
        if (i >= den) {
          r.outcome = "no_plan";
          r.failure_reason = "no_solution_found";
        } else if (i < cell.solved) {
          r.outcome = "success";
          r.plan_length = pl[i];
          r.executed_actions = ac[i];
        } else {
          r.outcome = "failure";
          r.plan_length = pl[i];
          r.executed_actions = ac[i];
          r.failure_reason =
              ac[i] < pl[i] ? "precondition_violation" : "goal_not_satisfied";
        }
        records.push_back(std::move(r));
      }
    }
  }
  return records;
}

inline void write_fixture_log(const std::filesystem::path& path) {
  std::string out;
  for (const EpisodeRecord& r : generate_published_table_records()) out += r.to_json().dump() + "\n";
  write_file(path, out);
}

}  // namespace pddlbench::test
