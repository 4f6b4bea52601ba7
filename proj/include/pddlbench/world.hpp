#pragma once

// Ground STRIPS semantics over parsed domains/problems.
//
// States are sets of ground atoms under the closed-world assumption.
// Grounding is lazy: only actions named by a plan are ever instantiated,
// so large instances never pay for full action-space enumeration.

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pddlbench/pddl.hpp"

namespace pddlbench {

struct TypeIndex {
  // type name -> objects belonging to it (including via subtypes).
  std::map<std::string, std::set<std::string>> members;

  bool is_member(const std::string& object, const std::string& type) const {
    auto it = members.find(type);
    return it != members.end() && it->second.count(object) != 0;
  }
  bool knows_object(const std::string& object) const {
    auto it = members.find("object");
    return it != members.end() && it->second.count(object) != 0;
  }
};

inline TypeIndex build_type_index(const Domain& dom, const Problem& prob) {
  TypeIndex index;
  index.members["object"];  // the root type always has an entry
  std::map<std::string, std::string> parent;
  for (const auto& t : dom.types) {
    index.members[t.name];
    parent[t.name] = t.type;
  }
  auto insert_object = [&](const TypedName& obj) {
    std::string ty = obj.type;
    while (true) {
      index.members[ty].insert(obj.name);
      if (ty == "object") break;
      auto it = parent.find(ty);
      ty = (it == parent.end()) ? "object" : it->second;
    }
  };
  for (const auto& c : dom.constants) insert_object(c);
  for (const auto& o : prob.objects) insert_object(o);
  return index;
}

struct State {
  std::set<GroundAtom> atoms;

  bool contains(const GroundAtom& a) const { return atoms.count(a) != 0; }
  bool operator==(const State&) const = default;
};

// One grounded precondition, kept in schema declaration order so the first
// violated condition is deterministic.
struct GroundCondition {
  enum class Kind { atom_present, atom_absent, names_equal, names_distinct };

  Kind kind;
  GroundAtom atom;        // atom_present / atom_absent
  std::string lhs, rhs;   // names_equal / names_distinct

  bool holds(const State& s) const {
    switch (kind) {
      case Kind::atom_present: return s.contains(atom);
      case Kind::atom_absent: return !s.contains(atom);
      case Kind::names_equal: return lhs == rhs;
      case Kind::names_distinct: return lhs != rhs;
    }
    return false;
  }

  std::string describe_violation() const {
    switch (kind) {
      case Kind::atom_present: return atom.str() + " not in state";
      case Kind::atom_absent: return atom.str() + " unexpectedly in state";
      case Kind::names_equal: return "(= " + lhs + " " + rhs + ") violated";
      case Kind::names_distinct: return "(not (= " + lhs + " " + rhs + ")) violated";
    }
    return "";
  }
};

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  std::vector<GroundCondition> preconditions;  // declaration order
  std::set<GroundAtom> adds;
  std::set<GroundAtom> deletes;
  int cost = 1;  // unit cost unless the schema increases total-cost

  std::string str() const {
    std::string out = "(" + name;
    for (const auto& a : args) out += " " + a;
    return out + ")";
  }
};

enum class GroundErrorKind { unknown_action, arity_mismatch, type_mismatch };

struct GroundError {
  GroundErrorKind kind;
  std::string detail;
};

using GroundResult = std::variant<GroundAction, GroundError>;

inline GroundResult ground_action(const ActionSchema& schema,
                                  const std::vector<std::string>& args,
                                  const TypeIndex& index) {
  if (args.size() != schema.params.size())
    return GroundError{GroundErrorKind::arity_mismatch,
                       "action '" + schema.name + "' expects " +
                           std::to_string(schema.params.size()) + " arguments, got " +
                           std::to_string(args.size())};

  std::map<std::string, std::string> binding;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const TypedName& param = schema.params[i];
    if (!index.is_member(args[i], param.type)) {
      std::string why = index.knows_object(args[i])
                            ? "is not of type " + param.type
                            : "is not a declared object";
      return GroundError{GroundErrorKind::type_mismatch,
                         "argument '" + args[i] + "' for parameter ?" + param.name +
                             " of action '" + schema.name + "' " + why};
    }
    binding[param.name] = args[i];
  }

  auto resolve = [&](const Term& t) -> std::string {
    return t.is_variable ? binding.at(t.name) : t.name;
  };
  auto ground_atom = [&](const Atom& a) {
    GroundAtom g;
    g.predicate = a.predicate;
    g.args.reserve(a.args.size());
    for (const Term& t : a.args) g.args.push_back(resolve(t));
    return g;
  };

  GroundAction ga;
  ga.name = schema.name;
  ga.args = args;
  ga.cost = schema.effect.cost_increase.value_or(1);

  if (schema.precondition) {
    // Flatten the precondition into declaration-order conditions.
    auto flatten = [&](auto&& self, const Formula& f) -> void {
      switch (f.kind) {
        case Formula::Kind::atom:
          ga.preconditions.push_back(
              {GroundCondition::Kind::atom_present, ground_atom(f.atom), "", ""});
          break;
        case Formula::Kind::negation:
          ga.preconditions.push_back(
              {GroundCondition::Kind::atom_absent, ground_atom(f.atom), "", ""});
          break;
        case Formula::Kind::equality:
          ga.preconditions.push_back(
              {GroundCondition::Kind::names_equal, {}, resolve(f.lhs), resolve(f.rhs)});
          break;
        case Formula::Kind::inequality:
          ga.preconditions.push_back(
              {GroundCondition::Kind::names_distinct, {}, resolve(f.lhs), resolve(f.rhs)});
          break;
        case Formula::Kind::conjunction:
          for (const Formula& c : f.children) self(self, c);
          break;
      }
    };
    flatten(flatten, *schema.precondition);
  }

  for (const Atom& a : schema.effect.adds) ga.adds.insert(ground_atom(a));
  for (const Atom& a : schema.effect.deletes) ga.deletes.insert(ground_atom(a));
  return ga;
}

struct Applicability {
  bool applicable = true;
  int violated_index = -1;       // index into preconditions when !applicable
  std::string diagnostic;        // e.g. "holding a not in state"
};

inline Applicability is_applicable(const State& state, const GroundAction& action) {
  for (std::size_t i = 0; i < action.preconditions.size(); ++i) {
    const GroundCondition& cond = action.preconditions[i];
    if (!cond.holds(state))
      return {false, static_cast<int>(i), cond.describe_violation()};
  }
  return {};
}

// result = (state \ deletes) ∪ adds; an atom both deleted and added survives.
inline State apply_action(const State& state, const GroundAction& action) {
  State out = state;
  for (const GroundAtom& d : action.deletes) out.atoms.erase(d);
  for (const GroundAtom& a : action.adds) out.atoms.insert(a);
  return out;
}

inline bool goal_satisfied(const State& state, const Formula& goal) {
  switch (goal.kind) {
    case Formula::Kind::atom: {
      GroundAtom g;
      g.predicate = goal.atom.predicate;
      for (const Term& t : goal.atom.args) g.args.push_back(t.name);
      return state.contains(g);
    }
    case Formula::Kind::negation: {
      GroundAtom g;
      g.predicate = goal.atom.predicate;
      for (const Term& t : goal.atom.args) g.args.push_back(t.name);
      return !state.contains(g);
    }
    case Formula::Kind::equality: return goal.lhs.name == goal.rhs.name;
    case Formula::Kind::inequality: return goal.lhs.name != goal.rhs.name;
    case Formula::Kind::conjunction:
      for (const Formula& c : goal.children)
        if (!goal_satisfied(state, c)) return false;
      return true;
  }
  return false;
}

// Binds a domain/problem pair for repeated grounding and simulation.
class WorldModel {
 public:
  WorldModel(const Domain& dom, const Problem& prob)
      : domain_(&dom), problem_(&prob), index_(build_type_index(dom, prob)) {}

  const Domain& domain() const { return *domain_; }
  const Problem& problem() const { return *problem_; }
  const TypeIndex& type_index() const { return index_; }

  State initial_state() const {
    State s;
    for (const GroundAtom& a : problem_->init) s.atoms.insert(a);
    return s;
  }

  GroundResult ground(const std::string& action_name,
                      const std::vector<std::string>& args) const {
    const ActionSchema* schema = domain_->find_action(action_name);
    if (!schema)
      return GroundError{GroundErrorKind::unknown_action, "unknown action '" + action_name + "'"};
    return ground_action(*schema, args, index_);
  }

  bool goal_holds(const State& s) const { return goal_satisfied(s, problem_->goal); }

 private:
  const Domain* domain_;
  const Problem* problem_;
  TypeIndex index_;
};

}  // namespace pddlbench
