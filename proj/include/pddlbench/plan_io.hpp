#pragma once

// Plan interchange: the JSON plan schema used for LLM responses, the prompt
// that requests it, and the sas_plan format emitted by Fast Downward.
//
// Decoding is strict: a response either matches the schema or is rejected.
// There is no repair step, so a malformed response can never masquerade as
// a valid plan.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pddlbench/util.hpp"

namespace pddlbench {

struct PlanStep {
  std::string name;
  std::vector<std::string> parameters;
  std::optional<std::string> reason;
  std::optional<std::string> confirm_reasoning;

  bool operator==(const PlanStep&) const = default;

  std::string str() const {
    std::string out = "(" + name;
    for (const auto& p : parameters) out += " " + p;
    return out + ")";
  }
};

struct Plan {
  std::vector<PlanStep> steps;
  std::vector<std::string> reasoning;  // top-level "reasoning" entries

  bool operator==(const Plan&) const = default;
};

// ---------------------------------------------------------------------------
// Prompt construction

struct PromptPair {
  std::string system_text;
  std::string user_text;
};

// The response template shipped verbatim inside every prompt.
inline constexpr std::string_view kPlanJsonTemplate = R"({
    "reasoning": ["A high-level explanation of the overall plan, describing how it transitions from the initial state to the goal."],
    "plan": [
        {
            "name": "action_name",
            "parameters": ["arg1", "arg2"],
            "reason": "Explanation of why this action was chosen.",
            "confirm_reasoning": "Final validation statement."
        }
    ]
})";

inline PromptPair build_prompt(const std::string& domain_text, const std::string& problem_text) {
  PromptPair p;
  p.system_text =
      "You are an expert classical planner. You are given a PDDL domain and a "
      "PDDL problem. Produce a plan that transforms the initial state into a "
      "state satisfying the goal.\n"
      "Respond with a single JSON object and nothing else, following exactly "
      "this template:\n" +
      std::string(kPlanJsonTemplate) +
      "\n"
      "Rules:\n"
      "- Every \"name\" must be an action from the domain; every parameter "
      "must be an object from the problem (or a domain constant).\n"
      "- List the actions of \"plan\" in execution order.\n"
      "- Do not invent objects, actions, or extra keys.\n";
  p.user_text = "Domain (PDDL):\n" + domain_text + "\nProblem (PDDL):\n" + problem_text +
                "\nProduce the JSON plan now.";
  return p;
}

// ---------------------------------------------------------------------------
// JSON plan decoding

enum class PlanDecodeErrorKind { no_json_object, schema_violation, truncated };

struct PlanDecodeError {
  PlanDecodeErrorKind kind;
  std::string detail;

  std::string message() const {
    switch (kind) {
      case PlanDecodeErrorKind::no_json_object: return "no JSON object: " + detail;
      case PlanDecodeErrorKind::schema_violation: return "schema violation: " + detail;
      case PlanDecodeErrorKind::truncated: return "truncated: " + detail;
    }
    return detail;
  }
};

using PlanDecodeResult = std::variant<Plan, PlanDecodeError>;

namespace detail {

// Extracts the first balanced {...} block, honouring string literals and
// escapes.  Returns nullopt(no brace) or an error for an unbalanced tail.
inline std::variant<std::string, PlanDecodeError> extract_json_object(std::string_view text) {
  std::size_t start = text.find('{');
  if (start == std::string_view::npos)
    return PlanDecodeError{PlanDecodeErrorKind::no_json_object, "response contains no '{'"};
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return std::string(text.substr(start, i - start + 1));
    }
  }
  return PlanDecodeError{PlanDecodeErrorKind::truncated,
                         "JSON object starting at offset " + std::to_string(start) +
                             " never closes"};
}

}  // namespace detail

inline PlanDecodeResult decode_plan_json(const std::string& raw) {
  auto extracted = detail::extract_json_object(raw);
  if (std::holds_alternative<PlanDecodeError>(extracted))
    return std::get<PlanDecodeError>(extracted);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(std::get<std::string>(extracted));
  } catch (const nlohmann::json::parse_error& e) {
    return PlanDecodeError{PlanDecodeErrorKind::no_json_object,
                           std::string("braced text is not valid JSON (") + e.what() + ")"};
  }
  if (!doc.is_object())
    return PlanDecodeError{PlanDecodeErrorKind::schema_violation, "top level is not an object"};
  if (!doc.contains("plan"))
    return PlanDecodeError{PlanDecodeErrorKind::schema_violation, "missing key \"plan\""};
  if (!doc["plan"].is_array())
    return PlanDecodeError{PlanDecodeErrorKind::schema_violation, "\"plan\" is not an array"};

  Plan plan;
  if (doc.contains("reasoning")) {
    if (!doc["reasoning"].is_array())
      return PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                             "\"reasoning\" is not an array"};
    for (const auto& r : doc["reasoning"]) {
      if (!r.is_string())
        return PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                               "\"reasoning\" contains a non-string entry"};
      plan.reasoning.push_back(r.get<std::string>());
    }
  }

  for (std::size_t i = 0; i < doc["plan"].size(); ++i) {
    const auto& step = doc["plan"][i];
    std::string where = "plan[" + std::to_string(i) + "]";
    if (!step.is_object())
      return PlanDecodeError{PlanDecodeErrorKind::schema_violation, where + " is not an object"};
    if (!step.contains("name") || !step["name"].is_string())
      return PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                             where + ".name missing or not a string"};
    if (!step.contains("parameters") || !step["parameters"].is_array())
      return PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                             where + ".parameters missing or not an array"};
    PlanStep out;
    out.name = to_lower(step["name"].get<std::string>());
    for (std::size_t j = 0; j < step["parameters"].size(); ++j) {
      const auto& p = step["parameters"][j];
      if (!p.is_string())
        return PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                               where + ".parameters[" + std::to_string(j) + "] is not a string"};
      out.parameters.push_back(to_lower(p.get<std::string>()));
    }
    if (step.contains("reason")) {
      if (!step["reason"].is_string())
        return PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                               where + ".reason is not a string"};
      out.reason = step["reason"].get<std::string>();
    }
    if (step.contains("confirm_reasoning")) {
      if (!step["confirm_reasoning"].is_string())
        return PlanDecodeError{PlanDecodeErrorKind::schema_violation,
                               where + ".confirm_reasoning is not a string"};
      out.confirm_reasoning = step["confirm_reasoning"].get<std::string>();
    }
    plan.steps.push_back(std::move(out));
  }
  return plan;
}

inline std::string encode_plan_json(const Plan& plan) {
  nlohmann::ordered_json doc;
  doc["reasoning"] = plan.reasoning;
  doc["plan"] = nlohmann::ordered_json::array();
  for (const auto& step : plan.steps) {
    nlohmann::ordered_json s;
    s["name"] = step.name;
    s["parameters"] = step.parameters;
    if (step.reason) s["reason"] = *step.reason;
    if (step.confirm_reasoning) s["confirm_reasoning"] = *step.confirm_reasoning;
    doc["plan"].push_back(std::move(s));
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// sas_plan parsing (Fast Downward output)

struct SasParseError {
  int line_no;  // 1-based
  std::string detail;
};

using SasParseResult = std::variant<Plan, SasParseError>;

inline SasParseResult parse_sas_plan(const std::string& text) {
  Plan plan;
  int line_no = 0;
  for (const std::string& raw_line : split_lines(text)) {
    ++line_no;
    std::string line(raw_line);
    if (auto semi = line.find(';'); semi != std::string::npos) line.resize(semi);
    std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() != '(' || body.back() != ')')
      return SasParseError{line_no, "expected (action args...), found '" + std::string(body) + "'"};
    body.remove_prefix(1);
    body.remove_suffix(1);

    PlanStep step;
    std::size_t pos = 0;
    while (pos < body.size()) {
      while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
      std::size_t start = pos;
      while (pos < body.size() && !std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
      if (start == pos) break;
      std::string word = to_lower(body.substr(start, pos - start));
      if (word.find('(') != std::string::npos || word.find(')') != std::string::npos)
        return SasParseError{line_no, "nested parentheses in action line"};
      if (step.name.empty())
        step.name = std::move(word);
      else
        step.parameters.push_back(std::move(word));
    }
    if (step.name.empty()) return SasParseError{line_no, "empty action line"};
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

inline std::string print_sas_plan(const Plan& plan) {
  std::string out;
  int cost = 0;
  for (const auto& step : plan.steps) {
    out += step.str() + "\n";
    ++cost;
  }
  out += "; cost = " + std::to_string(cost) + " (unit cost)\n";
  return out;
}

}  // namespace pddlbench
