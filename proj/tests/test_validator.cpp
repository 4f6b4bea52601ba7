#include "pddlbench/validate.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "pddlbench/util.hpp"
#include "support/blocks_oracle.hpp"
#include "support/paths.hpp"

namespace pddlbench {
namespace {

Domain load_domain(const std::string& set) {
  return parse_domain_text(read_file(test::benchmarks_root() / set / "domain.pddl"));
}
Problem load_problem(const Domain& dom, const std::string& set, const std::string& file) {
  return parse_problem_text(read_file(test::benchmarks_root() / set / file), dom);
}

Plan make_plan(std::vector<std::pair<std::string, std::vector<std::string>>> steps) {
  Plan plan;
  for (auto& [name, args] : steps) plan.steps.push_back(PlanStep{name, args, {}, {}});
  return plan;
}

TEST(ValidatePlan, TwoBlockStackSucceeds) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  Plan plan = make_plan({{"pick-up", {"a"}}, {"stack", {"a", "b"}}});

  TraceResult tr = validate_plan(dom, prob, plan);
  EXPECT_EQ(tr.outcome, Outcome::success);
  EXPECT_EQ(tr.plan_length, 2);
  EXPECT_EQ(tr.executed_actions, 2);
  EXPECT_FALSE(tr.failure_reason.has_value());
  EXPECT_FALSE(tr.failure_step.has_value());
  std::set<std::string> preview(tr.final_state_preview.begin(), tr.final_state_preview.end());
  EXPECT_TRUE(preview.count("(on a b)"));
  EXPECT_TRUE(preview.count("(handempty)"));
}

TEST(ValidatePlan, StopsAtFirstInvalidStep) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  // Second pick-up is illegal: the hand is no longer empty.
  Plan plan = make_plan({{"pick-up", {"a"}}, {"pick-up", {"b"}}, {"stack", {"a", "b"}}});

  TraceResult tr = validate_plan(dom, prob, plan);
  EXPECT_EQ(tr.outcome, Outcome::failure);
  EXPECT_EQ(tr.failure_reason, FailureReason::precondition_violation);
  EXPECT_EQ(tr.plan_length, 3);
  EXPECT_EQ(tr.executed_actions, 1);
  ASSERT_TRUE(tr.failure_step.has_value());
  EXPECT_EQ(*tr.failure_step, 1);
  EXPECT_NE(tr.failure_detail.find("handempty not in state"), std::string::npos);
  // The preview shows the state reached before the failing step.
  std::set<std::string> preview(tr.final_state_preview.begin(), tr.final_state_preview.end());
  EXPECT_TRUE(preview.count("(holding a)"));
}

TEST(ValidatePlan, FullyExecutableButGoalUnsatisfiedIsFailure) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  Plan plan = make_plan({{"pick-up", {"a"}}, {"put-down", {"a"}}});

  TraceResult tr = validate_plan(dom, prob, plan);
  EXPECT_EQ(tr.outcome, Outcome::failure);
  EXPECT_EQ(tr.failure_reason, FailureReason::goal_not_satisfied);
  EXPECT_EQ(tr.plan_length, 2);
  EXPECT_EQ(tr.executed_actions, 2);
  EXPECT_FALSE(tr.failure_step.has_value());
}

TEST(ValidatePlan, UnknownActionName) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  TraceResult tr = validate_plan(dom, prob, make_plan({{"teleport", {"a"}}}));
  EXPECT_EQ(tr.outcome, Outcome::failure);
  EXPECT_EQ(tr.failure_reason, FailureReason::unknown_action);
  EXPECT_EQ(tr.executed_actions, 0);
  EXPECT_EQ(tr.failure_step, 0);
}

TEST(ValidatePlan, ArityAndTypeFailures) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");

  TraceResult arity = validate_plan(dom, prob, make_plan({{"stack", {"a"}}}));
  EXPECT_EQ(arity.outcome, Outcome::failure);
  EXPECT_EQ(arity.failure_reason, FailureReason::arity_mismatch);

  TraceResult type = validate_plan(dom, prob, make_plan({{"pick-up", {"ghost"}}}));
  EXPECT_EQ(type.outcome, Outcome::failure);
  EXPECT_EQ(type.failure_reason, FailureReason::type_mismatch);
}

TEST(ValidatePlan, EmptyPlanOutcomeTracksInitialGoal) {
  Domain dom = load_domain("blocks");
  Problem unsat = load_problem(dom, "blocks", "p01.pddl");
  TraceResult tr = validate_plan(dom, unsat, Plan{});
  EXPECT_EQ(tr.outcome, Outcome::failure);
  EXPECT_EQ(tr.failure_reason, FailureReason::goal_not_satisfied);
  EXPECT_EQ(tr.plan_length, 0);

  Problem sat = parse_problem_text(R"(
    (define (problem trivial) (:domain blocks)
      (:objects a - block)
      (:init (clear a) (ontable a) (handempty))
      (:goal (and (clear a))))
  )", dom);
  TraceResult tr2 = validate_plan(dom, sat, Plan{});
  EXPECT_EQ(tr2.outcome, Outcome::success);
  EXPECT_EQ(tr2.plan_length, 0);
  EXPECT_EQ(tr2.executed_actions, 0);
}

// Hand-written reference plans for every bundled domain; these double as
// solvability proofs for the p01 instances.
TEST(ValidatePlan, ReferencePlansSolveBundledP01Instances) {
  {
    Domain dom = load_domain("elevator");
    Problem prob = load_problem(dom, "elevator", "p01.pddl");
    Plan plan = make_plan(
        {{"board", {"f1", "p1"}}, {"up", {"f1", "f2"}}, {"depart", {"f2", "p1"}}});
    TraceResult tr = validate_plan(dom, prob, plan);
    EXPECT_EQ(tr.outcome, Outcome::success) << tr.failure_detail;
  }
  {
    Domain dom = load_domain("satellite");
    Problem prob = load_problem(dom, "satellite", "p01.pddl");
    Plan plan = make_plan({
        {"switch_on", {"instrument0", "satellite0"}},
        {"turn_to", {"satellite0", "groundstation0", "phenomenon1"}},
        {"calibrate", {"satellite0", "instrument0", "groundstation0"}},
        {"turn_to", {"satellite0", "phenomenon1", "groundstation0"}},
        {"take_image", {"satellite0", "phenomenon1", "instrument0", "thermograph0"}},
    });
    TraceResult tr = validate_plan(dom, prob, plan);
    EXPECT_EQ(tr.outcome, Outcome::success) << tr.failure_detail;
  }
  {
    Domain dom = load_domain("barman");
    Problem prob = load_problem(dom, "barman", "p01.pddl");
    Plan plan = make_plan({
        {"grasp", {"left", "shot1"}},
        {"fill-shot", {"shot1", "ingredient1", "left", "right", "dispenser1"}},
        {"pour-shot-to-clean-shaker", {"shot1", "ingredient1", "shaker1", "left", "l0", "l1"}},
        {"clean-shot", {"shot1", "ingredient1", "left", "right"}},
        {"fill-shot", {"shot1", "ingredient2", "left", "right", "dispenser2"}},
        {"pour-shot-to-used-shaker", {"shot1", "ingredient2", "shaker1", "left", "l1", "l2"}},
        {"leave", {"left", "shot1"}},
        {"grasp", {"left", "shaker1"}},
        {"shake", {"cocktail1", "ingredient1", "ingredient2", "shaker1", "left", "right"}},
        {"pour-shaker-to-shot", {"cocktail1", "shot2", "left", "shaker1", "l2", "l1"}},
    });
    TraceResult tr = validate_plan(dom, prob, plan);
    EXPECT_EQ(tr.outcome, Outcome::success) << tr.failure_detail;
    EXPECT_EQ(tr.executed_actions, 10);
  }
  {
    Domain dom = load_domain("tidybot");
    Problem prob = load_problem(dom, "tidybot", "p01.pddl");
    Plan plan = make_plan({
        {"move-up", {"r1", "x1", "y1", "y2"}},
        {"move-up", {"r1", "x1", "y2", "y3"}},
        {"move-right", {"r1", "y3", "x1", "x2"}},
        {"pick-up", {"r1", "cup1", "x2", "y3", "x3", "y3"}},
        {"put-down", {"r1", "cup1", "x2", "y3", "x1", "y3"}},
    });
    TraceResult tr = validate_plan(dom, prob, plan);
    EXPECT_EQ(tr.outcome, Outcome::success) << tr.failure_detail;
  }
}

TEST(ValidatePlanText, JsonResponseWithFences) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  std::string raw = R"(Here is my plan:
```json
{"reasoning": ["stack a onto b"],
 "plan": [
   {"name": "pick-up", "parameters": ["a"], "reason": "free the hand target"},
   {"name": "stack", "parameters": ["a", "b"], "confirm_reasoning": "goal reached"}
 ]}
```
)";
  TraceResult tr = validate_plan_text(dom, prob, raw, PlanTextFormat::json_schema);
  EXPECT_EQ(tr.outcome, Outcome::success);
  EXPECT_EQ(tr.plan_length, 2);
}

TEST(ValidatePlanText, TruncatedJsonIsNoPlan) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  std::string raw = R"({"reasoning": ["never finished"], "plan": [{"name": "pick-up", "par)";
  TraceResult tr = validate_plan_text(dom, prob, raw, PlanTextFormat::json_schema);
  EXPECT_EQ(tr.outcome, Outcome::no_plan);
  EXPECT_NE(tr.no_plan_reason.find("truncated"), std::string::npos);
  EXPECT_EQ(tr.plan_length, 0);
  EXPECT_EQ(tr.executed_actions, 0);
}

TEST(ValidatePlanText, ProseOnlyResponseIsNoPlan) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  TraceResult tr = validate_plan_text(dom, prob, "I cannot solve this problem.",
                                      PlanTextFormat::json_schema);
  EXPECT_EQ(tr.outcome, Outcome::no_plan);
  EXPECT_NE(tr.no_plan_reason.find("unparseable"), std::string::npos);
}

TEST(ValidatePlanText, SchemaViolationIsNoPlanNotRepair) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  // "parameters" as a single string instead of an array must not be repaired.
  std::string raw = R"({"plan": [{"name": "pick-up", "parameters": "a"}]})";
  TraceResult tr = validate_plan_text(dom, prob, raw, PlanTextFormat::json_schema);
  EXPECT_EQ(tr.outcome, Outcome::no_plan);
  EXPECT_NE(tr.no_plan_reason.find("unparseable"), std::string::npos);
}

TEST(ValidatePlanText, SasPlanHappyPathAndComments) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  std::string sas = "(pick-up a)\n(stack a b)\n; cost = 2 (unit cost)\n";
  TraceResult tr = validate_plan_text(dom, prob, sas, PlanTextFormat::sas_plan);
  EXPECT_EQ(tr.outcome, Outcome::success);
  EXPECT_EQ(tr.plan_length, 2);
}

TEST(ValidatePlanText, MalformedSasLineIsNoPlan) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  TraceResult tr = validate_plan_text(dom, prob, "(pick-up a)\nstack a b\n",
                                      PlanTextFormat::sas_plan);
  EXPECT_EQ(tr.outcome, Outcome::no_plan);
  EXPECT_NE(tr.no_plan_reason.find("line 2"), std::string::npos);
}

TEST(ValidatePlan, FinalStatePreviewIsCapped) {
  std::string domain_text = "(define (domain wide) (:predicates (p ?x)))";
  std::string problem_text = "(define (problem big) (:domain wide) (:objects";
  for (int i = 0; i < 80; ++i) problem_text += " o" + std::to_string(i);
  problem_text += ") (:init";
  for (int i = 0; i < 80; ++i) problem_text += " (p o" + std::to_string(i) + ")";
  problem_text += ") (:goal (p o0)))";

  Domain dom = parse_domain_text(domain_text);
  Problem prob = parse_problem_text(problem_text, dom);
  TraceResult tr = validate_plan(dom, prob, Plan{});
  EXPECT_EQ(tr.outcome, Outcome::success);
  EXPECT_EQ(tr.final_state_preview.size(), kFinalStatePreviewCap);
}

// ---------------------------------------------------------------------------
// Property tests against the independent blocks oracle.

TEST(ValidatorProperty, LegalRandomPlansSucceedAndFinalStatesAgree) {
  std::mt19937 rng(20250817);
  Domain dom = load_domain("blocks");

  for (int trial = 0; trial < 150; ++trial) {
    int n_blocks = 3 + trial % 5;
    test::BlocksOracle start = test::BlocksOracle::random(rng, n_blocks);
    test::BlocksOracle sim = start;

    std::uniform_int_distribution<int> len_dist(1, 25);
    int len = len_dist(rng);
    Plan plan;
    for (int i = 0; i < len; ++i) {
      auto moves = sim.legal_moves();
      ASSERT_FALSE(moves.empty());
      std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
      const test::OracleMove& mv = moves[pick(rng)];
      ASSERT_TRUE(sim.apply(mv));
      plan.steps.push_back(PlanStep{mv.name, mv.args, {}, {}});
    }

    std::set<std::string> goal_atoms = sim.atoms();
    Problem prob = parse_problem_text(start.to_problem_text(goal_atoms), dom);
    TraceResult tr = validate_plan(dom, prob, plan);

    ASSERT_EQ(tr.outcome, Outcome::success)
        << "trial " << trial << ": " << tr.failure_detail;
    EXPECT_EQ(tr.executed_actions, len);
    std::set<std::string> preview(tr.final_state_preview.begin(),
                                  tr.final_state_preview.end());
    EXPECT_EQ(preview, goal_atoms) << "trial " << trial;
  }
}

TEST(ValidatorProperty, CorruptedPlansStopExactlyAtOracleFailurePrefix) {
  std::mt19937 rng(424242);
  Domain dom = load_domain("blocks");
  const std::vector<std::string> action_names = {"pick-up", "put-down", "stack", "unstack",
                                                 "warp"};

  int failures_seen = 0;
  for (int trial = 0; trial < 150; ++trial) {
    int n_blocks = 3 + trial % 4;
    test::BlocksOracle start = test::BlocksOracle::random(rng, n_blocks);
    test::BlocksOracle sim = start;

    std::uniform_int_distribution<int> len_dist(4, 20);
    int len = len_dist(rng);
    std::vector<test::OracleMove> moves;
    for (int i = 0; i < len; ++i) {
      auto legal = sim.legal_moves();
      std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
      moves.push_back(legal[pick(rng)]);
      sim.apply(moves.back());
    }
    std::set<std::string> goal_atoms = sim.atoms();

    // Corrupt ~25% of the steps with arbitrary (often illegal) moves.
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::string> arg_pool = start.blocks();
    arg_pool.push_back("zz");  // foreign object
    for (auto& mv : moves) {
      if (coin(rng) > 0.25) continue;
      std::uniform_int_distribution<std::size_t> name_pick(0, action_names.size() - 1);
      std::uniform_int_distribution<int> arity_pick(0, 2);
      std::uniform_int_distribution<std::size_t> arg_pick(0, arg_pool.size() - 1);
      mv.name = action_names[name_pick(rng)];
      mv.args.clear();
      for (int k = arity_pick(rng); k > 0; --k) mv.args.push_back(arg_pool[arg_pick(rng)]);
    }

    // Oracle replay: longest legal prefix.
    test::BlocksOracle replay = start;
    int oracle_prefix = 0;
    for (const auto& mv : moves) {
      if (!replay.apply(mv)) break;
      ++oracle_prefix;
    }

    Plan plan;
    for (const auto& mv : moves) plan.steps.push_back(PlanStep{mv.name, mv.args, {}, {}});
    Problem prob = parse_problem_text(start.to_problem_text(goal_atoms), dom);
    TraceResult tr = validate_plan(dom, prob, plan);

    ASSERT_EQ(tr.executed_actions, oracle_prefix) << "trial " << trial;
    if (oracle_prefix < len) {
      ++failures_seen;
      EXPECT_EQ(tr.outcome, Outcome::failure);
      ASSERT_TRUE(tr.failure_step.has_value());
      EXPECT_EQ(*tr.failure_step, oracle_prefix);
    } else {
      // Fully executable: success must coincide with reaching the goal state.
      std::set<std::string> preview(tr.final_state_preview.begin(),
                                    tr.final_state_preview.end());
      std::set<std::string> replay_atoms = replay.atoms();
      EXPECT_EQ(preview, replay_atoms);
      EXPECT_EQ(tr.outcome == Outcome::success, replay_atoms == goal_atoms);
    }
  }
  // The corruption rate must actually exercise the failure path.
  EXPECT_GT(failures_seen, 50);
}

TEST(TraceResult, JsonShape) {
  Domain dom = load_domain("blocks");
  Problem prob = load_problem(dom, "blocks", "p01.pddl");
  TraceResult tr =
      validate_plan(dom, prob, make_plan({{"pick-up", {"a"}}, {"stack", {"a", "b"}}}));
  auto j = tr.to_json();
  EXPECT_EQ(j["outcome"], "success");
  EXPECT_EQ(j["plan_length"], 2);
  EXPECT_EQ(j["executed_actions"], 2);
  EXPECT_FALSE(j.contains("failure_reason"));
  EXPECT_TRUE(j["final_state_preview"].is_array());
}

}  // namespace
}  // namespace pddlbench
