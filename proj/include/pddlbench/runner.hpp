#pragma once
// Campaign orchestration: enumerate benchmark sets, obtain a plan for every
// (planner, problem) pair, validate it, and append one JSONL record per
// episode.  Records are written with a single O_APPEND write each so a killed
// campaign leaves at worst one torn final line, which resume tolerates.

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pddlbench/pddl.hpp"
#include "pddlbench/plan_io.hpp"
#include "pddlbench/planners.hpp"
#include "pddlbench/util.hpp"
#include "pddlbench/validate.hpp"
#include "pddlbench/world.hpp"

namespace pddlbench {

// ---------------------------------------------------------------------------
// Benchmark discovery

struct BenchmarkSet {
  std::string name;  // directory name, used as the domain label in records
  std::filesystem::path domain_file;
  std::vector<std::filesystem::path> problem_files;  // sorted by filename
};

// Scans `root` for benchmark sets laid out as <root>/<domain>/domain.pddl
// plus one or more problem files.  Domains come back in lexicographic order.
inline std::vector<BenchmarkSet> load_benchmark_sets(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError("benchmark root is not a directory: " + root.string());

  std::vector<BenchmarkSet> sets;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    BenchmarkSet set;
    set.name = entry.path().filename().string();
    set.domain_file = entry.path() / "domain.pddl";
    if (!fs::is_regular_file(set.domain_file))
      throw IoError("benchmark set has no domain.pddl: " + entry.path().string());
    for (const auto& file : fs::directory_iterator(entry.path())) {
      if (!file.is_regular_file()) continue;
      const fs::path& p = file.path();
      if (p.extension() == ".pddl" && p.filename() != "domain.pddl")
        set.problem_files.push_back(p);
    }
    if (set.problem_files.empty())
      throw IoError("benchmark set has no problem files: " + entry.path().string());
    std::sort(set.problem_files.begin(), set.problem_files.end());
    sets.push_back(std::move(set));
  }
  std::sort(sets.begin(), sets.end(),
            [](const BenchmarkSet& a, const BenchmarkSet& b) { return a.name < b.name; });
  if (sets.empty()) throw IoError("no benchmark sets under " + root.string());
  return sets;
}

// ---------------------------------------------------------------------------
// Episode records (one JSONL line per planner/problem attempt)

struct EpisodeRecord {
  std::string planner;
  std::string domain;
  std::string problem;  // problem file stem, e.g. "p01"
  std::string outcome;  // "success" | "failure" | "no_plan"
  std::optional<std::string> failure_reason;
  std::optional<int> plan_length;
  std::optional<int> executed_actions;
  double planning_time_s = 0.0;
  std::string timestamp;
  std::optional<std::string> raw_digest;
  std::string run_id;

  // Identity under which resume deduplicates episodes.
  std::string key() const {
    return planner + '\x1f' + domain + '\x1f' + problem + '\x1f' + run_id;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["planner"] = planner;
    j["domain"] = domain;
    j["problem"] = problem;
    j["outcome"] = outcome;
    j["failure_reason"] = failure_reason ? nlohmann::json(*failure_reason) : nlohmann::json(nullptr);
    j["plan_length"] = plan_length ? nlohmann::json(*plan_length) : nlohmann::json(nullptr);
    j["executed_actions"] =
        executed_actions ? nlohmann::json(*executed_actions) : nlohmann::json(nullptr);
    j["planning_time_s"] = planning_time_s;
    j["timestamp"] = timestamp;
    j["raw_digest"] = raw_digest ? nlohmann::json(*raw_digest) : nlohmann::json(nullptr);
    j["run_id"] = run_id;
    return j;
  }
};

inline EpisodeRecord episode_from_json(const nlohmann::json& j) {
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw IoError(std::string("record is missing \"") + key + "\"");
    return *it;
  };
  auto opt_string = [&](const char* key) -> std::optional<std::string> {
    const nlohmann::json& v = require(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) throw IoError(std::string("\"") + key + "\" must be a string or null");
    return v.get<std::string>();
  };
  auto opt_int = [&](const char* key) -> std::optional<int> {
    const nlohmann::json& v = require(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number_integer()) throw IoError(std::string("\"") + key + "\" must be an integer or null");
    return v.get<int>();
  };
  auto str = [&](const char* key) {
    const nlohmann::json& v = require(key);
    if (!v.is_string()) throw IoError(std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
  };

  EpisodeRecord r;
  r.planner = str("planner");
  r.domain = str("domain");
  r.problem = str("problem");
  r.outcome = str("outcome");
  if (!parse_outcome(r.outcome)) throw IoError("unknown outcome label: " + r.outcome);
  r.failure_reason = opt_string("failure_reason");
  r.plan_length = opt_int("plan_length");
  r.executed_actions = opt_int("executed_actions");
  const nlohmann::json& t = require("planning_time_s");
  if (!t.is_number()) throw IoError("\"planning_time_s\" must be a number");
  r.planning_time_s = t.get<double>();
  r.timestamp = str("timestamp");
  r.raw_digest = opt_string("raw_digest");
  r.run_id = str("run_id");
  return r;
}

// Strict results-log reader: any malformed line is an error.
inline std::vector<EpisodeRecord> load_results_log(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::vector<EpisodeRecord> records;
  std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      records.push_back(episode_from_json(nlohmann::json::parse(lines[i])));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return records;
}

struct ResultsLogScan {
  std::vector<EpisodeRecord> records;
  std::uintmax_t valid_bytes = 0;  // offset just past the last well-formed line
  bool torn_tail = false;          // file ends in a line that does not parse
};

// Crash-tolerant reader used by resume: a malformed *final* line (torn by a
// kill mid-write) is reported via `torn_tail` so the caller can truncate it;
// malformed interior lines are still an error.
inline ResultsLogScan scan_results_log(const std::filesystem::path& path) {
  std::string text = read_file(path);
  ResultsLogScan scan;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    bool has_newline = nl != std::string::npos;
    std::string line = text.substr(pos, has_newline ? nl - pos : std::string::npos);
    std::size_t end = has_newline ? nl + 1 : text.size();
    ++line_no;
    if (!trim(line).empty()) {
      try {
        scan.records.push_back(episode_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        if (end >= text.size()) {
          scan.torn_tail = true;
          return scan;
        }
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = end;
    scan.valid_bytes = pos;
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Campaign configuration

struct PlannerSpec {
  std::variant<LlmPlannerConfig, FdPlannerConfig> config;

  const std::string& display_name() const {
    if (const auto* llm = std::get_if<LlmPlannerConfig>(&config)) return llm->display_name;
    return std::get<FdPlannerConfig>(config).display_name;
  }
};

struct CampaignConfig {
  std::string run_id;
  std::filesystem::path benchmarks_dir;
  std::filesystem::path output_dir;
  int threads = 1;
  std::optional<int> max_problems_per_domain;
  std::vector<std::string> domain_filter;  // empty means all
  std::vector<PlannerSpec> planners;       // first-appearance order
};

inline CampaignConfig campaign_config_from_json(const nlohmann::json& j,
                                                const std::filesystem::path& base_dir) {
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string("campaign config is missing \"") + key + "\"");
    return *it;
  };
  auto resolve = [&](const std::filesystem::path& p) {
    return p.is_absolute() ? p : base_dir / p;
  };

  CampaignConfig c;
  c.run_id = require("runId").get<std::string>();
  if (c.run_id.empty()) throw ConfigError("\"runId\" must be non-empty");
  c.benchmarks_dir = resolve(require("benchmarksDir").get<std::string>());
  c.output_dir = resolve(require("outputDir").get<std::string>());
  if (j.contains("threads")) {
    c.threads = j.at("threads").get<int>();
    if (c.threads < 1 || c.threads > 64) throw ConfigError("\"threads\" must be in [1, 64]");
  }
  if (j.contains("maxProblemsPerDomain")) {
    int cap = j.at("maxProblemsPerDomain").get<int>();
    if (cap < 1) throw ConfigError("\"maxProblemsPerDomain\" must be positive");
    c.max_problems_per_domain = cap;
  }
  if (j.contains("domains"))
    for (const auto& d : j.at("domains")) c.domain_filter.push_back(d.get<std::string>());

  const nlohmann::json& planners = require("planners");
  if (!planners.is_array() || planners.empty())
    throw ConfigError("\"planners\" must be a non-empty array");
  for (const auto& p : planners) {
    std::string type = p.value("type", "");
    if (type == "llm")
      c.planners.push_back({llm_config_from_json(p)});
    else if (type == "fd")
      c.planners.push_back({fd_config_from_json(p)});
    else
      throw ConfigError("planner \"type\" must be \"llm\" or \"fd\"");
  }
  std::set<std::string> seen;
  for (const auto& p : c.planners)
    if (!seen.insert(p.display_name()).second)
      throw ConfigError("duplicate planner displayName: " + p.display_name());
  return c;
}

// ---------------------------------------------------------------------------
// Outcome mapping

// Consulted only when a response carries no JSON plan object at all; an
// apology with no plan attached is treated as a refusal to plan.
inline bool looks_like_refusal(const std::string& raw) {
  static const char* kMarkers[] = {"i cannot",       "i can't",      "i am unable",
                                   "i'm unable",     "unable to",    "cannot assist",
                                   "cannot help",    "can't assist", "can't help",
                                   "i won't",        "i will not",   "sorry"};
  std::string lower = to_lower(raw);
  for (const char* marker : kMarkers)
    if (lower.find(marker) != std::string::npos) return true;
  return false;
}

// Reason label for a planner response that produced no decodable plan.
inline std::string classify_no_plan(const PlannerResponse& response) {
  if (response.error_kind != PlannerErrorKind::none)
    return std::string(to_string(response.error_kind));
  if (response.truncated) return "truncated";
  if (response.decode_error) {
    switch (response.decode_error->kind) {
      case PlanDecodeErrorKind::truncated:
        return "truncated";
      case PlanDecodeErrorKind::no_json_object:
        return looks_like_refusal(response.raw_text) ? "refusal" : "unparseable";
      case PlanDecodeErrorKind::schema_violation:
        return "unparseable";
    }
  }
  return "unparseable";
}

// Builds the episode record for one planner response, validating the plan
// against the world model when one was decoded.
inline EpisodeRecord make_episode_record(const std::string& planner_name,
                                         const std::string& domain_label,
                                         const std::string& problem_stem,
                                         const std::string& run_id, const Domain& domain,
                                         const Problem& problem,
                                         const PlannerResponse& response) {
  EpisodeRecord r;
  r.planner = planner_name;
  r.domain = domain_label;
  r.problem = problem_stem;
  r.run_id = run_id;
  r.planning_time_s = response.latency_seconds;
  r.timestamp = iso8601_utc_now();
  if (!response.raw_text.empty()) r.raw_digest = sha256_hex(response.raw_text);

  if (response.plan) {
    TraceResult trace = validate_plan(domain, problem, *response.plan);
    r.outcome = to_string(trace.outcome);
    if (trace.failure_reason) r.failure_reason = to_string(*trace.failure_reason);
    r.plan_length = trace.plan_length;
    r.executed_actions = trace.executed_actions;
  } else {
    r.outcome = to_string(Outcome::no_plan);
    r.failure_reason = classify_no_plan(response);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Campaign execution

struct CampaignResult {
  int episodes_run = 0;
  int episodes_skipped = 0;  // already present in the log for this run id
  std::filesystem::path log_path;
  std::vector<EpisodeRecord> new_records;
};

namespace detail {

// Content-addressed storage for raw planner output; returns the digest.
// Write-to-temp plus rename keeps concurrent writers of the same blob safe.
inline std::string store_raw_blob(const std::filesystem::path& raw_dir, const std::string& text) {
  namespace fs = std::filesystem;
  std::string digest = sha256_hex(text);
  fs::path final_path = raw_dir / (digest + ".txt");
  if (fs::exists(final_path)) return digest;
  fs::path tmp = raw_dir / (digest + ".tmp." + std::to_string(::getpid()) + "." +
                            std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
  write_file(tmp, text);
  fs::rename(tmp, final_path);
  return digest;
}

struct EpisodeTask {
  const PlannerSpec* planner;
  std::size_t set_index;
  std::size_t problem_index;
};

}  // namespace detail

inline CampaignResult run_campaign(const CampaignConfig& config, std::ostream* progress = nullptr) {
  namespace fs = std::filesystem;

  std::vector<BenchmarkSet> sets = load_benchmark_sets(config.benchmarks_dir);
  if (!config.domain_filter.empty()) {
    std::vector<BenchmarkSet> filtered;
    for (const std::string& wanted : config.domain_filter) {
      auto it = std::find_if(sets.begin(), sets.end(),
                             [&](const BenchmarkSet& s) { return s.name == wanted; });
      if (it == sets.end()) throw ConfigError("campaign selects unknown domain: " + wanted);
      filtered.push_back(*it);
    }
    std::sort(filtered.begin(), filtered.end(),
              [](const BenchmarkSet& a, const BenchmarkSet& b) { return a.name < b.name; });
    sets = std::move(filtered);
  }
  if (config.max_problems_per_domain)
    for (BenchmarkSet& set : sets)
      if (static_cast<int>(set.problem_files.size()) > *config.max_problems_per_domain)
        set.problem_files.resize(static_cast<std::size_t>(*config.max_problems_per_domain));

  // Parse everything up front: a broken input file should abort the campaign
  // before any planner traffic happens.
  std::vector<Domain> domains(sets.size());
  std::vector<std::vector<Problem>> problems(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    try {
      domains[i] = parse_domain_text(read_file(sets[i].domain_file));
    } catch (const ParseError& e) {
      throw ParseError(e.kind, e.line, e.col,
                       e.detail + " (" + sets[i].domain_file.string() + ")");
    }
    for (const fs::path& p : sets[i].problem_files) {
      try {
        problems[i].push_back(parse_problem_text(read_file(p), domains[i]));
      } catch (const ParseError& e) {
        throw ParseError(e.kind, e.line, e.col, e.detail + " (" + p.string() + ")");
      }
    }
  }

  fs::create_directories(config.output_dir);
  fs::path raw_dir = config.output_dir / "raw";
  fs::create_directories(raw_dir);
  CampaignResult result;
  result.log_path = config.output_dir / "results.jsonl";

  std::set<std::string> done;
  if (fs::exists(result.log_path)) {
    ResultsLogScan scan = scan_results_log(result.log_path);
    if (scan.torn_tail) fs::resize_file(result.log_path, scan.valid_bytes);
    for (const EpisodeRecord& r : scan.records) done.insert(r.key());
  }

  std::vector<detail::EpisodeTask> tasks;
  for (const PlannerSpec& planner : config.planners)
    for (std::size_t i = 0; i < sets.size(); ++i)
      for (std::size_t k = 0; k < sets[i].problem_files.size(); ++k) {
        EpisodeRecord probe;
        probe.planner = planner.display_name();
        probe.domain = sets[i].name;
        probe.problem = sets[i].problem_files[k].stem().string();
        probe.run_id = config.run_id;
        if (done.count(probe.key())) {
          ++result.episodes_skipped;
          continue;
        }
        tasks.push_back({&planner, i, k});
      }

  int log_fd = ::open(result.log_path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (log_fd < 0) throw IoError("cannot open results log: " + result.log_path.string());

  std::mutex io_mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const detail::EpisodeTask& task = tasks[idx];
      const BenchmarkSet& set = sets[task.set_index];
      const fs::path& problem_file = set.problem_files[task.problem_index];
      try {
        PlannerResponse response;
        if (const auto* llm = std::get_if<LlmPlannerConfig>(&task.planner->config)) {
          PromptPair prompt =
              build_prompt(read_file(set.domain_file), read_file(problem_file));
          response = request_llm_plan(*llm, prompt.system_text, prompt.user_text);
        } else {
          response = run_fast_downward(std::get<FdPlannerConfig>(task.planner->config),
                                       set.domain_file, problem_file);
        }
        if (!response.raw_text.empty()) detail::store_raw_blob(raw_dir, response.raw_text);

        EpisodeRecord record = make_episode_record(
            task.planner->display_name(), set.name, problem_file.stem().string(),
            config.run_id, domains[task.set_index],
            problems[task.set_index][task.problem_index], response);

        std::string line = record.to_json().dump() + "\n";
        std::lock_guard<std::mutex> lock(io_mu);
        if (::write(log_fd, line.data(), line.size()) != static_cast<ssize_t>(line.size()))
          throw IoError("short write to results log");
        ++result.episodes_run;
        result.new_records.push_back(std::move(record));
        if (progress) {
          const EpisodeRecord& r = result.new_records.back();
          *progress << "[" << r.planner << "] " << r.domain << "/" << r.problem << " -> "
                    << r.outcome << (r.failure_reason ? " (" + *r.failure_reason + ")" : "")
                    << "\n";
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(io_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(tasks.size());  // stop handing out work
        return;
      }
    }
  };

  std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.threads), std::max<std::size_t>(tasks.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  ::close(log_fd);
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

}  // namespace pddlbench
