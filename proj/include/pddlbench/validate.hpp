#pragma once

// Plan validation by step-by-step state simulation.
//
// A plan is Success exactly when every step executes and the goal holds in
// the final state.  Execution stops at the first invalid step, so
// executed_actions is the length of the longest executable prefix — the
// quantity the benchmark reports as Ac.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pddlbench/plan_io.hpp"
#include "pddlbench/world.hpp"

namespace pddlbench {

enum class Outcome { success, failure, no_plan };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::failure: return "failure";
    case Outcome::no_plan: return "no_plan";
  }
  return "no_plan";
}

inline std::optional<Outcome> parse_outcome(std::string_view s) {
  if (s == "success") return Outcome::success;
  if (s == "failure") return Outcome::failure;
  if (s == "no_plan" || s == "noplan" || s == "no-plan") return Outcome::no_plan;
  return std::nullopt;
}

enum class FailureReason {
  precondition_violation,
  unknown_action,
  arity_mismatch,
  type_mismatch,
  goal_not_satisfied,
};

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::precondition_violation: return "precondition_violation";
    case FailureReason::unknown_action: return "unknown_action";
    case FailureReason::arity_mismatch: return "arity_mismatch";
    case FailureReason::type_mismatch: return "type_mismatch";
    case FailureReason::goal_not_satisfied: return "goal_not_satisfied";
  }
  return "precondition_violation";
}

inline std::optional<FailureReason> parse_failure_reason(std::string_view s) {
  if (s == "precondition_violation") return FailureReason::precondition_violation;
  if (s == "unknown_action") return FailureReason::unknown_action;
  if (s == "arity_mismatch") return FailureReason::arity_mismatch;
  if (s == "type_mismatch") return FailureReason::type_mismatch;
  if (s == "goal_not_satisfied") return FailureReason::goal_not_satisfied;
  return std::nullopt;
}

// At most this many atoms of the final state are kept in a trace.
inline constexpr std::size_t kFinalStatePreviewCap = 64;

struct TraceResult {
  Outcome outcome = Outcome::no_plan;
  std::optional<FailureReason> failure_reason;  // set iff outcome == failure
  std::string no_plan_reason;                   // set iff outcome == no_plan
  int plan_length = 0;                          // PL: steps in the plan as given
  int executed_actions = 0;                     // Ac: longest executable prefix
  std::optional<int> failure_step;              // 0-based index of first invalid step
  std::string failure_detail;                   // human-readable diagnostic
  std::vector<std::string> final_state_preview;

  bool operator==(const TraceResult&) const = default;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["outcome"] = std::string(to_string(outcome));
    if (failure_reason) j["failure_reason"] = std::string(to_string(*failure_reason));
    if (!no_plan_reason.empty()) j["no_plan_reason"] = no_plan_reason;
    j["plan_length"] = plan_length;
    j["executed_actions"] = executed_actions;
    if (failure_step) j["failure_step"] = *failure_step;
    if (!failure_detail.empty()) j["failure_detail"] = failure_detail;
    j["final_state_preview"] = final_state_preview;
    return j;
  }
};

inline TraceResult no_plan_result(std::string reason) {
  TraceResult tr;
  tr.outcome = Outcome::no_plan;
  tr.no_plan_reason = std::move(reason);
  return tr;
}

namespace detail {

inline void fill_preview(TraceResult& tr, const State& s) {
  for (const GroundAtom& a : s.atoms) {
    if (tr.final_state_preview.size() >= kFinalStatePreviewCap) break;
    tr.final_state_preview.push_back(a.sexpr());
  }
}

inline FailureReason to_failure_reason(GroundErrorKind kind) {
  switch (kind) {
    case GroundErrorKind::unknown_action: return FailureReason::unknown_action;
    case GroundErrorKind::arity_mismatch: return FailureReason::arity_mismatch;
    case GroundErrorKind::type_mismatch: return FailureReason::type_mismatch;
  }
  return FailureReason::type_mismatch;
}

}  // namespace detail

inline TraceResult validate_plan(const WorldModel& wm, const Plan& plan) {
  TraceResult tr;
  tr.plan_length = static_cast<int>(plan.steps.size());
  State state = wm.initial_state();

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& step = plan.steps[i];
    GroundResult ground = wm.ground(step.name, step.parameters);
    if (std::holds_alternative<GroundError>(ground)) {
      const GroundError& err = std::get<GroundError>(ground);
      tr.outcome = Outcome::failure;
      tr.failure_reason = detail::to_failure_reason(err.kind);
      tr.failure_step = static_cast<int>(i);
      tr.failure_detail = "step " + std::to_string(i + 1) + " " + step.str() + ": " + err.detail;
      detail::fill_preview(tr, state);
      return tr;
    }
    const GroundAction& action = std::get<GroundAction>(ground);
    Applicability app = is_applicable(state, action);
    if (!app.applicable) {
      tr.outcome = Outcome::failure;
      tr.failure_reason = FailureReason::precondition_violation;
      tr.failure_step = static_cast<int>(i);
      tr.failure_detail =
          "step " + std::to_string(i + 1) + " " + action.str() + ": " + app.diagnostic;
      detail::fill_preview(tr, state);
      return tr;
    }
    state = apply_action(state, action);
    ++tr.executed_actions;
  }

  if (wm.goal_holds(state)) {
    tr.outcome = Outcome::success;
  } else {
    tr.outcome = Outcome::failure;
    tr.failure_reason = FailureReason::goal_not_satisfied;
    tr.failure_detail = "plan executed to completion but the goal is not satisfied";
  }
  detail::fill_preview(tr, state);
  return tr;
}

inline TraceResult validate_plan(const Domain& dom, const Problem& prob, const Plan& plan) {
  WorldModel wm(dom, prob);
  return validate_plan(wm, plan);
}

enum class PlanTextFormat { json_schema, sas_plan };

// Decode failures become NoPlan; anything decodable is simulated.
inline TraceResult validate_plan_text(const Domain& dom, const Problem& prob,
                                      const std::string& text, PlanTextFormat format) {
  if (format == PlanTextFormat::json_schema) {
    PlanDecodeResult decoded = decode_plan_json(text);
    if (std::holds_alternative<PlanDecodeError>(decoded)) {
      const PlanDecodeError& err = std::get<PlanDecodeError>(decoded);
      if (err.kind == PlanDecodeErrorKind::truncated)
        return no_plan_result("truncated: " + err.detail);
      return no_plan_result("unparseable: " + err.message());
    }
    return validate_plan(dom, prob, std::get<Plan>(decoded));
  }
  SasParseResult parsed = parse_sas_plan(text);
  if (std::holds_alternative<SasParseError>(parsed)) {
    const SasParseError& err = std::get<SasParseError>(parsed);
    return no_plan_result("unparseable: sas_plan line " + std::to_string(err.line_no) + ": " +
                          err.detail);
  }
  return validate_plan(dom, prob, std::get<Plan>(parsed));
}

}  // namespace pddlbench
