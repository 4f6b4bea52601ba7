#pragma once

// Planner adapters: an OpenAI-compatible chat-completion client for LLM
// planners and a subprocess wrapper around Fast Downward.
//
// Secrets never live in config files — an LLM config names the environment
// variable holding the API key, nothing more.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fcntl.h>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "pddlbench/plan_io.hpp"
#include "pddlbench/util.hpp"

namespace pddlbench {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Configs

struct LlmPlannerConfig {
  std::string display_name;
  std::string endpoint_url;
  std::string model_id;
  std::string api_key_env;  // name of the env var carrying the key
  int max_output_tokens = 4096;
  double temperature = 0.0;
  int request_timeout_seconds = 600;
  int max_retries = 2;  // transport-level retries, on top of the first attempt
  int backoff_initial_ms = 500;
  std::string response_text_path = "choices.0.message.content";
  std::string finish_reason_path = "choices.0.finish_reason";
  nlohmann::json extra_body;  // merged into the request (provider quirks)
};

struct FdPlannerConfig {
  std::string display_name = "Fast Downward";
  std::string binary_path;  // empty: $PDDLBENCH_FD, then PATH lookup
  std::string alias = "seq-sat-lama-2011";
  int time_limit_seconds = 600;
  int hard_kill_grace_seconds = 60;  // extra slack before SIGKILL
  std::string work_dir;              // empty: fresh temp dir per call
};

namespace detail {

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError(where + ": missing or non-string key \"" + key + "\"");
  return j[key].get<std::string>();
}

}  // namespace detail

inline LlmPlannerConfig llm_config_from_json(const nlohmann::json& j,
                                             const std::string& where = "llm planner config") {
  LlmPlannerConfig c;
  c.display_name = detail::require_string(j, "displayName", where);
  c.endpoint_url = detail::require_string(j, "endpointUrl", where);
  c.model_id = detail::require_string(j, "modelId", where);
  c.api_key_env = detail::require_string(j, "apiKeyEnvVar", where);
  c.max_output_tokens = j.value("maxOutputTokens", c.max_output_tokens);
  c.temperature = j.value("temperature", c.temperature);
  c.request_timeout_seconds = j.value("requestTimeoutSeconds", c.request_timeout_seconds);
  c.max_retries = j.value("maxRetries", c.max_retries);
  c.backoff_initial_ms = j.value("backoffInitialMs", c.backoff_initial_ms);
  c.response_text_path = j.value("responseTextPath", c.response_text_path);
  c.finish_reason_path = j.value("finishReasonPath", c.finish_reason_path);
  if (j.contains("extraBody")) c.extra_body = j["extraBody"];
  if (c.request_timeout_seconds <= 0 || c.max_retries < 0)
    throw ConfigError(where + ": timeout must be positive and maxRetries non-negative");
  return c;
}

inline FdPlannerConfig fd_config_from_json(const nlohmann::json& j,
                                           const std::string& where = "fd planner config") {
  FdPlannerConfig c;
  c.display_name = j.value("displayName", c.display_name);
  c.binary_path = j.value("binaryPath", c.binary_path);
  c.alias = j.value("alias", c.alias);
  c.time_limit_seconds = j.value("timeLimitSeconds", c.time_limit_seconds);
  c.hard_kill_grace_seconds = j.value("hardKillGraceSeconds", c.hard_kill_grace_seconds);
  c.work_dir = j.value("workDir", c.work_dir);
  if (c.time_limit_seconds <= 0) throw ConfigError(where + ": timeLimitSeconds must be positive");
  return c;
}

// ---------------------------------------------------------------------------
// Responses

enum class PlannerErrorKind {
  none,
  transport,            // connection/HTTP failure after retries
  auth,                 // rejected credentials or missing key env var
  timeout,              // request or subprocess exceeded its limit
  binary_not_found,     // planner executable absent
  subprocess_failure,   // planner crashed / unexpected exit
  no_solution_found,    // planner finished without producing a plan
};

inline std::string_view to_string(PlannerErrorKind k) {
  switch (k) {
    case PlannerErrorKind::none: return "none";
    case PlannerErrorKind::transport: return "transport_error";
    case PlannerErrorKind::auth: return "auth_error";
    case PlannerErrorKind::timeout: return "timeout";
    case PlannerErrorKind::binary_not_found: return "binary_not_found";
    case PlannerErrorKind::subprocess_failure: return "subprocess_failure";
    case PlannerErrorKind::no_solution_found: return "no_solution_found";
  }
  return "transport_error";
}

struct PlannerResponse {
  std::string raw_text;  // provider text / sas_plan content; empty on transport failure
  std::optional<Plan> plan;
  std::optional<PlanDecodeError> decode_error;
  PlannerErrorKind error_kind = PlannerErrorKind::none;
  std::string error_detail;
  bool truncated = false;  // provider reported the output was cut off
  double latency_seconds = 0.0;
  int attempts = 0;
  std::optional<int> http_status;

  bool ok() const { return error_kind == PlannerErrorKind::none && plan.has_value(); }
};

// ---------------------------------------------------------------------------
// LLM adapter

namespace detail {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline std::optional<SplitUrl> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return SplitUrl{url, "/"};
  return SplitUrl{url.substr(0, path_start), url.substr(path_start)};
}

// Walks "choices.0.message.content"-style dotted paths.
inline const nlohmann::json* walk_json_path(const nlohmann::json& doc, const std::string& path) {
  const nlohmann::json* cur = &doc;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t dot = path.find('.', start);
    std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) return nullptr;
    if (cur->is_array()) {
      for (char ch : part)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return nullptr;
      std::size_t idx = std::stoul(part);
      if (idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else if (cur->is_object()) {
      if (!cur->contains(part)) return nullptr;
      cur = &(*cur)[part];
    } else {
      return nullptr;
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

}  // namespace detail

inline PlannerResponse request_llm_plan(const LlmPlannerConfig& config,
                                        const std::string& system_text,
                                        const std::string& user_text) {
  using clock = std::chrono::steady_clock;
  PlannerResponse out;
  auto t0 = clock::now();
  auto finish = [&](PlannerResponse& r) -> PlannerResponse& {
    r.latency_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return r;
  };

  const char* key = config.api_key_env.empty() ? nullptr : std::getenv(config.api_key_env.c_str());
  if (!key || !*key) {
    out.error_kind = PlannerErrorKind::auth;
    out.error_detail = "environment variable " +
                       (config.api_key_env.empty() ? std::string("<unset>") : config.api_key_env) +
                       " is not set";
    return finish(out);
  }

  auto url = detail::split_url(config.endpoint_url);
  if (!url) {
    out.error_kind = PlannerErrorKind::transport;
    out.error_detail = "malformed endpoint URL: " + config.endpoint_url;
    return finish(out);
  }

  nlohmann::json body;
  body["model"] = config.model_id;
  body["messages"] = nlohmann::json::array({
      nlohmann::json{{"role", "system"}, {"content", system_text}},
      nlohmann::json{{"role", "user"}, {"content", user_text}},
  });
  body["max_tokens"] = config.max_output_tokens;
  body["temperature"] = config.temperature;
  if (config.extra_body.is_object())
    for (const auto& [k, v] : config.extra_body.items()) body[k] = v;
  std::string payload = body.dump();

  httplib::Headers headers = {{"Authorization", "Bearer " + std::string(key)}};

  int total_attempts = 1 + config.max_retries;
  std::string last_error;
  for (int attempt = 0; attempt < total_attempts; ++attempt) {
    if (attempt > 0) {
      int delay = config.backoff_initial_ms << (attempt - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    ++out.attempts;

    httplib::Client client(url->base);
    client.set_connection_timeout(config.request_timeout_seconds, 0);
    client.set_read_timeout(config.request_timeout_seconds, 0);
    client.set_write_timeout(config.request_timeout_seconds, 0);
    client.enable_server_certificate_verification(true);

    auto attempt_start = clock::now();
    httplib::Result res = client.Post(url->path, headers, payload, "application/json");
    double attempt_secs = std::chrono::duration<double>(clock::now() - attempt_start).count();

    if (!res) {
      // A stalled read that consumed the whole budget is a timeout and is
      // not retried; connection-level failures are.
      if (attempt_secs >= 0.9 * config.request_timeout_seconds) {
        out.error_kind = PlannerErrorKind::timeout;
        out.error_detail = "request exceeded " + std::to_string(config.request_timeout_seconds) +
                           "s (httplib error " + std::to_string(static_cast<int>(res.error())) + ")";
        return finish(out);
      }
      last_error = "connection failed (httplib error " +
                   std::to_string(static_cast<int>(res.error())) + ")";
      continue;
    }

    out.http_status = res->status;
    if (res->status == 401 || res->status == 403) {
      out.error_kind = PlannerErrorKind::auth;
      out.error_detail = "HTTP " + std::to_string(res->status) + " from provider";
      out.raw_text = res->body;
      return finish(out);
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      out.error_kind = PlannerErrorKind::transport;
      out.error_detail = "HTTP " + std::to_string(res->status);
      out.raw_text = res->body;
      return finish(out);
    }

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      out.error_kind = PlannerErrorKind::transport;
      out.error_detail = "provider returned non-JSON body";
      out.raw_text = res->body;
      return finish(out);
    }
    const nlohmann::json* text = detail::walk_json_path(doc, config.response_text_path);
    if (!text || !text->is_string()) {
      out.error_kind = PlannerErrorKind::transport;
      out.error_detail = "response body has no string at " + config.response_text_path;
      out.raw_text = res->body;
      return finish(out);
    }
    out.raw_text = text->get<std::string>();
    const nlohmann::json* reason = detail::walk_json_path(doc, config.finish_reason_path);
    if (reason && reason->is_string() && reason->get<std::string>() == "length")
      out.truncated = true;

    PlanDecodeResult decoded = decode_plan_json(out.raw_text);
    if (std::holds_alternative<Plan>(decoded)) {
      out.plan = std::get<Plan>(decoded);
    } else {
      out.decode_error = std::get<PlanDecodeError>(decoded);
      if (out.decode_error->kind == PlanDecodeErrorKind::truncated) out.truncated = true;
    }
    return finish(out);
  }

  out.error_kind = PlannerErrorKind::transport;
  out.error_detail = std::to_string(out.attempts) + " attempts failed; last error: " + last_error;
  return finish(out);
}

// ---------------------------------------------------------------------------
// Subprocess plumbing (used by the Fast Downward adapter and by tests)

struct ExecResult {
  int exit_code = -1;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string output;  // merged stdout+stderr, tail-capped
};

inline ExecResult run_process(const std::vector<std::string>& argv,
                              const std::filesystem::path& workdir, int timeout_seconds) {
  constexpr std::size_t kOutputCap = 64 * 1024;
  ExecResult result;
  int pipefd[2];
  if (pipe(pipefd) != 0) {
    result.spawn_failed = true;
    result.output = "pipe() failed";
    return result;
  }

  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    result.spawn_failed = true;
    result.output = "fork() failed";
    return result;
  }
  if (pid == 0) {
    setpgid(0, 0);  // own process group so a timeout kill reaps grandchildren
    close(pipefd[0]);
    dup2(pipefd[1], STDOUT_FILENO);
    dup2(pipefd[1], STDERR_FILENO);
    close(pipefd[1]);
    if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(127);
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }

  setpgid(pid, pid);  // mirror the child's call; loser of the race is a no-op
  close(pipefd[1]);
  fcntl(pipefd[0], F_SETFL, O_NONBLOCK);

  using clock = std::chrono::steady_clock;
  auto deadline = clock::now() + std::chrono::seconds(timeout_seconds);
  bool child_done = false;
  int status = 0;
  char buf[4096];

  while (true) {
    ssize_t n;
    while ((n = read(pipefd[0], buf, sizeof buf)) > 0) {
      result.output.append(buf, static_cast<std::size_t>(n));
      if (result.output.size() > kOutputCap)
        result.output.erase(0, result.output.size() - kOutputCap);
    }
    if (!child_done) {
      pid_t r = waitpid(pid, &status, WNOHANG);
      if (r == pid) {
        child_done = true;
      } else if (clock::now() >= deadline) {
        kill(-pid, SIGKILL);
        waitpid(pid, &status, 0);
        result.timed_out = true;
        child_done = true;
      }
    }
    if (child_done && n == 0) break;  // EOF after exit
    if (child_done && result.timed_out) break;  // drained what was available
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && child_done) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  close(pipefd[0]);

  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  return result;
}

// ---------------------------------------------------------------------------
// Fast Downward adapter

inline std::filesystem::path resolve_fd_binary(const FdPlannerConfig& config) {
  namespace fs = std::filesystem;
  if (!config.binary_path.empty()) {
    fs::path p = config.binary_path;
    std::error_code ec;
    return fs::exists(p, ec) ? p : fs::path{};
  }
  if (const char* env = std::getenv("PDDLBENCH_FD"); env && *env) {
    fs::path p = env;
    std::error_code ec;
    return fs::exists(p, ec) ? p : fs::path{};
  }
  for (const char* name : {"fast-downward.py", "fast-downward", "downward"}) {
    fs::path p = find_on_path(name);
    if (!p.empty()) return p;
  }
  return {};
}

// Picks the highest-numbered sas_plan file: LAMA is an anytime planner and
// later files are better plans.
inline std::filesystem::path best_sas_plan(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::path best;
  long best_index = -1;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("sas_plan", 0) != 0) continue;
    long index = 0;  // bare "sas_plan"
    if (name.size() > 8) {
      if (name[8] != '.') continue;
      try {
        index = std::stol(name.substr(9));
      } catch (...) {
        continue;
      }
    }
    if (index > best_index) {
      best_index = index;
      best = entry.path();
    }
  }
  return best;
}

inline PlannerResponse run_fast_downward(const FdPlannerConfig& config,
                                         const std::filesystem::path& domain_file,
                                         const std::filesystem::path& problem_file) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  PlannerResponse out;
  auto t0 = clock::now();
  auto finish = [&](PlannerResponse& r) -> PlannerResponse& {
    r.latency_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return r;
  };

  fs::path binary = resolve_fd_binary(config);
  if (binary.empty()) {
    out.error_kind = PlannerErrorKind::binary_not_found;
    out.error_detail = config.binary_path.empty()
                           ? "no Fast Downward binary on PATH (set PDDLBENCH_FD or binaryPath)"
                           : "planner binary not found: " + config.binary_path;
    return finish(out);
  }

  std::error_code ec;
  fs::path workdir;
  if (config.work_dir.empty()) {
    std::string tmpl = (fs::temp_directory_path() / "pddlbench-fd-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) {
      out.error_kind = PlannerErrorKind::subprocess_failure;
      out.error_detail = "cannot create temp work dir";
      return finish(out);
    }
    workdir = buf.data();
  } else {
    workdir = config.work_dir;
    fs::create_directories(workdir, ec);
  }
  // Stale plan files from a previous run in the same dir must not win.
  for (fs::path stale = best_sas_plan(workdir); !stale.empty(); stale = best_sas_plan(workdir))
    fs::remove(stale, ec);

  std::vector<std::string> argv = {
      binary.string(),
      "--alias", config.alias,
      "--overall-time-limit", std::to_string(config.time_limit_seconds) + "s",
      fs::absolute(domain_file).string(),
      fs::absolute(problem_file).string(),
  };
  // FD enforces its own limit; the hard kill is a backstop for hangs.
  ExecResult exec =
      run_process(argv, workdir, config.time_limit_seconds + config.hard_kill_grace_seconds);

  fs::path plan_file = best_sas_plan(workdir);
  if (!plan_file.empty()) {
    out.raw_text = read_file(plan_file);
    SasParseResult parsed = parse_sas_plan(out.raw_text);
    if (std::holds_alternative<Plan>(parsed)) {
      out.plan = std::get<Plan>(parsed);
    } else {
      const SasParseError& err = std::get<SasParseError>(parsed);
      out.decode_error = PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                                         "sas_plan line " + std::to_string(err.line_no) + ": " +
                                             err.detail};
    }
    return finish(out);
  }

  std::string tail = exec.output.size() > 2000
                         ? exec.output.substr(exec.output.size() - 2000)
                         : exec.output;
  if (exec.timed_out) {
    out.error_kind = PlannerErrorKind::timeout;
    out.error_detail = "planner killed after exceeding hard limit";
  } else if (exec.spawn_failed || exec.exit_code == 127) {
    out.error_kind = PlannerErrorKind::binary_not_found;
    out.error_detail = "failed to launch " + binary.string();
  } else if (exec.exit_code == 10 || exec.exit_code == 11 || exec.exit_code == 12) {
    // Driver exit codes for "completed without a plan" (unsolvable or
    // search exhausted resources).
    out.error_kind = PlannerErrorKind::no_solution_found;
    out.error_detail = "planner exit code " + std::to_string(exec.exit_code);
  } else if (exec.exit_code == 0) {
    out.error_kind = PlannerErrorKind::no_solution_found;
    out.error_detail = "planner exited cleanly but produced no sas_plan file";
  } else {
    out.error_kind = PlannerErrorKind::subprocess_failure;
    out.error_detail =
        "planner exit code " + std::to_string(exec.exit_code) + "; output tail: " + tail;
  }
  return finish(out);
}

}  // namespace pddlbench
