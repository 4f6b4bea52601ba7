// Command-line front end: validate plans, obtain plans from the classical or
// LLM planners, run benchmark campaigns, and render metric reports.
//
// Exit codes:
//   0  success (plan valid / plan found / command completed)
//   1  plan simulated but invalid, or goal not satisfied
//   2  no usable plan (decode failure, refusal, search exhausted)
//   3  input error (unreadable/ill-formed PDDL, config, log, or usage)
//   4  environment error (auth, timeout, planner binary missing or crashed)

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "pddlbench/pddl.hpp"
#include "pddlbench/planners.hpp"
#include "pddlbench/report.hpp"
#include "pddlbench/runner.hpp"
#include "pddlbench/validate.hpp"

namespace {

using namespace pddlbench;
namespace fs = std::filesystem;

constexpr int kExitValid = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNoPlan = 2;
constexpr int kExitInputError = 3;
constexpr int kExitEnvError = 4;

struct GlobalOpts {
  std::string output = "text";
  bool quiet = false;

  bool json() const { return output == "json"; }
};

nlohmann::json load_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

int exit_code_for_planner_error(PlannerErrorKind kind) {
  switch (kind) {
    case PlannerErrorKind::no_solution_found:
      return kExitNoPlan;
    case PlannerErrorKind::transport:
    case PlannerErrorKind::auth:
    case PlannerErrorKind::timeout:
    case PlannerErrorKind::binary_not_found:
    case PlannerErrorKind::subprocess_failure:
      return kExitEnvError;
    case PlannerErrorKind::none:
      break;
  }
  return kExitValid;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string domain, problem, plan;
  std::string format = "json";
};

int cmd_validate(const ValidateArgs& args, const GlobalOpts& opts) {
  Domain dom = parse_domain_text(read_file(args.domain));
  Problem prob = parse_problem_text(read_file(args.problem), dom);
  std::string plan_text = read_file(args.plan);
  PlanTextFormat format =
      args.format == "sas" ? PlanTextFormat::sas_plan : PlanTextFormat::json_schema;

  TraceResult trace = validate_plan_text(dom, prob, plan_text, format);
  if (opts.json()) {
    std::cout << trace.to_json().dump(2) << "\n";
  } else if (!opts.quiet) {
    std::cout << "outcome: " << to_string(trace.outcome) << "\n";
    if (trace.failure_reason)
      std::cout << "failure reason: " << to_string(*trace.failure_reason) << "\n";
    if (!trace.no_plan_reason.empty())
      std::cout << "no plan: " << trace.no_plan_reason << "\n";
    std::cout << "plan length: " << trace.plan_length << "\n";
    std::cout << "executed actions: " << trace.executed_actions << "\n";
    if (trace.failure_step) std::cout << "failure step: " << *trace.failure_step + 1 << "\n";
    if (!trace.failure_detail.empty()) std::cout << "detail: " << trace.failure_detail << "\n";
  }
  switch (trace.outcome) {
    case Outcome::success:
      return kExitValid;
    case Outcome::failure:
      return kExitInvalid;
    case Outcome::no_plan:
      return kExitNoPlan;
  }
  return kExitValid;
}

// ---------------------------------------------------------------------------
// solve-fd / solve-llm

struct SolveFdArgs {
  std::string domain, problem;
  std::string config;
  std::string binary;
  std::string alias;
  int time_limit = 0;  // 0: keep config default
  std::string plan_out;
};

int report_planner_failure(const PlannerResponse& r, const GlobalOpts& opts) {
  std::string reason = classify_no_plan(r);
  std::cerr << "pddlbench: no plan: " << reason;
  if (!r.error_detail.empty()) std::cerr << " (" << r.error_detail << ")";
  std::cerr << "\n";
  if (opts.json()) {
    nlohmann::ordered_json j;
    j["plan"] = nullptr;
    j["no_plan_reason"] = reason;
    j["latency_seconds"] = r.latency_seconds;
    j["attempts"] = r.attempts;
    std::cout << j.dump(2) << "\n";
  }
  if (r.error_kind != PlannerErrorKind::none) return exit_code_for_planner_error(r.error_kind);
  return kExitNoPlan;
}

int cmd_solve_fd(const SolveFdArgs& args, const GlobalOpts& opts) {
  FdPlannerConfig config;
  if (!args.config.empty()) config = fd_config_from_json(load_json_file(args.config));
  if (!args.binary.empty()) config.binary_path = args.binary;
  if (!args.alias.empty()) config.alias = args.alias;
  if (args.time_limit > 0) config.time_limit_seconds = args.time_limit;

  // Parse locally first so unsupported PDDL is an input error, not a planner one.
  Domain dom = parse_domain_text(read_file(args.domain));
  parse_problem_text(read_file(args.problem), dom);

  PlannerResponse r = run_fast_downward(config, args.domain, args.problem);
  if (!r.plan) return report_planner_failure(r, opts);

  std::string sas = print_sas_plan(*r.plan);
  if (!args.plan_out.empty()) write_file(args.plan_out, sas);
  if (opts.json()) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(encode_plan_json(*r.plan));
    j["latency_seconds"] = r.latency_seconds;
    std::cout << j.dump(2) << "\n";
  } else if (!opts.quiet) {
    std::cout << sas;
  }
  return kExitValid;
}

struct SolveLlmArgs {
  std::string domain, problem;
  std::string config;
  std::string plan_out;
};

int cmd_solve_llm(const SolveLlmArgs& args, const GlobalOpts& opts) {
  LlmPlannerConfig config = llm_config_from_json(load_json_file(args.config));
  std::string domain_text = read_file(args.domain);
  std::string problem_text = read_file(args.problem);
  parse_problem_text(problem_text, parse_domain_text(domain_text));

  PromptPair prompt = build_prompt(domain_text, problem_text);
  PlannerResponse r = request_llm_plan(config, prompt.system_text, prompt.user_text);
  if (!r.plan) return report_planner_failure(r, opts);

  std::string encoded = encode_plan_json(*r.plan);
  if (!args.plan_out.empty()) write_file(args.plan_out, encoded);
  if (opts.json()) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(encoded);
    j["latency_seconds"] = r.latency_seconds;
    j["attempts"] = r.attempts;
    std::cout << j.dump(2) << "\n";
  } else if (!opts.quiet) {
    std::cout << print_sas_plan(*r.plan);
  }
  return kExitValid;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string config;
  int threads = 0;  // 0: keep config value
};

int cmd_bench(const BenchArgs& args, const GlobalOpts& opts) {
  fs::path config_path = args.config;
  CampaignConfig config =
      campaign_config_from_json(load_json_file(config_path),
                                config_path.has_parent_path() ? config_path.parent_path() : ".");
  if (args.threads > 0) config.threads = args.threads;

  CampaignResult result = run_campaign(config, opts.quiet ? nullptr : &std::cerr);
  if (opts.json()) {
    nlohmann::ordered_json j;
    j["episodes_run"] = result.episodes_run;
    j["episodes_skipped"] = result.episodes_skipped;
    j["results_log"] = result.log_path.string();
    std::cout << j.dump(2) << "\n";
  } else if (!opts.quiet) {
    std::cout << "episodes run: " << result.episodes_run
              << ", skipped: " << result.episodes_skipped << "\n"
              << "results log: " << result.log_path.string() << "\n";
  }
  return kExitValid;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string log;
  std::string out_dir;
  std::string run_id;
  std::string benchmarks;
};

int cmd_report(const ReportArgs& args, const GlobalOpts& opts) {
  std::vector<EpisodeRecord> records = load_results_log(args.log);
  if (!args.run_id.empty()) {
    std::vector<EpisodeRecord> filtered;
    for (EpisodeRecord& r : records)
      if (r.run_id == args.run_id) filtered.push_back(std::move(r));
    if (filtered.empty()) throw IoError("no episodes with run id \"" + args.run_id + "\"");
    records = std::move(filtered);
  }
  ReportData data = build_report(records);

  if (!args.benchmarks.empty()) {
    std::vector<BenchmarkSet> sets = load_benchmark_sets(args.benchmarks);
    for (const std::string& domain : data.domains) {
      auto it = std::find_if(sets.begin(), sets.end(),
                             [&](const BenchmarkSet& s) { return s.name == domain; });
      if (it == sets.end())
        throw IoError("log references domain \"" + domain + "\" not present under " +
                      args.benchmarks);
    }
  }

  std::optional<ReportFiles> files;
  if (!args.out_dir.empty()) files = emit_report(data, args.out_dir);

  if (opts.json()) {
    nlohmann::ordered_json j;
    j["planners"] = nlohmann::ordered_json::array();
    for (const PlannerSummary& p : data.planners) {
      nlohmann::ordered_json row;
      row["planner"] = p.planner;
      row["problems"] = p.overall.problems_total;
      row["success_rate"] = p.overall.success_rate();
      auto set_opt = [&row](const char* key, const std::optional<double>& v) {
        row[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
      };
      set_opt("mean_plan_length", p.overall.mean_plan_length());
      set_opt("mean_executed_actions", p.overall.mean_executed());
      set_opt("execution_fidelity", p.overall.execution_fidelity());
      row["mean_planning_time_s"] = p.overall.mean_time();
      j["planners"].push_back(std::move(row));
    }
    if (files) {
      j["files"] = nlohmann::ordered_json::object();
      j["files"]["summary_csv"] = files->summary_csv.string();
      j["files"]["summary_md"] = files->summary_md.string();
      j["files"]["domain_csv"] = files->domain_csv.string();
      j["files"]["planning_time_csv"] = files->time_csv.string();
      j["files"]["fidelity_csv"] = files->fidelity_csv.string();
      j["files"]["fidelity_svg"] = files->fidelity_svg.string();
      j["files"]["success_svg"] = files->success_svg.string();
      j["files"]["outcome_grid_svg"] = files->grid_svg.string();
    }
    std::cout << j.dump(2) << "\n";
  } else if (!opts.quiet) {
    std::cout << render_summary_text(data) << "\n" << render_time_markdown(data);
    if (files) std::cout << "\nreport files written to " << args.out_dir << "\n";
  }
  return kExitValid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDDL benchmark harness: validate plans, run planners, report metrics"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --output/--quiet appear after the subcommand too
  GlobalOpts opts;
  app.add_option("--output", opts.output, "Output format on stdout")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--quiet", opts.quiet, "Suppress non-essential stdout output");

  ValidateArgs validate_args;
  CLI::App* validate = app.add_subcommand("validate", "Simulate a plan against a problem");
  validate->add_option("domain", validate_args.domain, "Domain PDDL file")->required();
  validate->add_option("problem", validate_args.problem, "Problem PDDL file")->required();
  validate->add_option("plan", validate_args.plan, "Plan file")->required();
  validate->add_option("--format", validate_args.format, "Plan file format")
      ->check(CLI::IsMember({"json", "sas"}));

  SolveFdArgs fd_args;
  CLI::App* solve_fd = app.add_subcommand("solve-fd", "Plan with the classical planner");
  solve_fd->add_option("domain", fd_args.domain, "Domain PDDL file")->required();
  solve_fd->add_option("problem", fd_args.problem, "Problem PDDL file")->required();
  solve_fd->add_option("--config", fd_args.config, "Planner config JSON");
  solve_fd->add_option("--binary", fd_args.binary, "Planner driver binary");
  solve_fd->add_option("--alias", fd_args.alias, "Driver alias");
  solve_fd->add_option("--time-limit", fd_args.time_limit, "Overall time limit in seconds");
  solve_fd->add_option("--plan-out", fd_args.plan_out, "Write the plan to this file");

  SolveLlmArgs llm_args;
  CLI::App* solve_llm = app.add_subcommand("solve-llm", "Plan with an LLM endpoint");
  solve_llm->add_option("domain", llm_args.domain, "Domain PDDL file")->required();
  solve_llm->add_option("problem", llm_args.problem, "Problem PDDL file")->required();
  solve_llm->add_option("--config", llm_args.config, "Planner config JSON")->required();
  solve_llm->add_option("--plan-out", llm_args.plan_out, "Write the decoded plan to this file");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark campaign");
  bench->add_option("--config", bench_args.config, "Campaign config JSON")->required();
  bench->add_option("--threads", bench_args.threads, "Worker thread count override");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "Aggregate a results log into tables/figures");
  report->add_option("log", report_args.log, "results.jsonl produced by bench")->required();
  report->add_option("--out", report_args.out_dir, "Directory for CSV/markdown/SVG outputs");
  report->add_option("--run-id", report_args.run_id, "Restrict to one run id");
  report->add_option("--benchmarks", report_args.benchmarks,
                     "Verify log domains against this benchmark root");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(validate_args, opts);
    if (app.got_subcommand(solve_fd)) return cmd_solve_fd(fd_args, opts);
    if (app.got_subcommand(solve_llm)) return cmd_solve_llm(llm_args, opts);
    if (app.got_subcommand(bench)) return cmd_bench(bench_args, opts);
    if (app.got_subcommand(report)) return cmd_report(report_args, opts);
  } catch (const ParseError& e) {
    std::cerr << "pddlbench: parse error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ConfigError& e) {
    std::cerr << "pddlbench: config error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const IoError& e) {
    std::cerr << "pddlbench: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "pddlbench: " << e.what() << "\n";
    return kExitEnvError;
  }
  return kExitValid;
}
