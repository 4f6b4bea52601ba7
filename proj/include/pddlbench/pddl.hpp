#pragma once

// Typed-STRIPS PDDL front end: lexer, domain/problem parser, pretty printer.
//
// Supported requirement flags: :strips :typing :negative-preconditions
// :equality :action-costs.  Everything outside that subset is rejected with
// ParseErrorKind::unsupported_construct rather than silently skipped, so a
// benchmark episode can never run against a half-understood domain.
//
// PDDL is case-insensitive; the lexer folds all input to lower case.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pddlbench/util.hpp"

namespace pddlbench {

// ---------------------------------------------------------------------------
// Tokens and errors

enum class TokenKind { lparen, rparen, symbol, keyword, variable };

struct Token {
  TokenKind kind;
  std::string text;  // keywords keep the ':' prefix, variables the '?' prefix
  int line = 1;
  int col = 1;
};

enum class ParseErrorKind {
  illegal_character,
  syntax_error,
  unsupported_construct,
  duplicate_name,
  unknown_predicate,
  arity_mismatch,
  unknown_object,
};

inline std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::illegal_character: return "illegal character";
    case ParseErrorKind::syntax_error: return "syntax error";
    case ParseErrorKind::unsupported_construct: return "unsupported construct";
    case ParseErrorKind::duplicate_name: return "duplicate name";
    case ParseErrorKind::unknown_predicate: return "unknown predicate";
    case ParseErrorKind::arity_mismatch: return "arity mismatch";
    case ParseErrorKind::unknown_object: return "unknown object";
  }
  return "parse error";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, int line, int col, const std::string& detail)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " +
                           std::string(to_string(kind)) + ": " + detail),
        kind(kind),
        line(line),
        col(col),
        detail(detail) {}

  ParseErrorKind kind;
  int line;
  int col;
  std::string detail;
};

// ---------------------------------------------------------------------------
// AST

struct Term {
  bool is_variable = false;
  std::string name;  // without the '?' prefix for variables

  bool operator==(const Term&) const = default;
  std::string str() const { return is_variable ? "?" + name : name; }
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const Atom&) const = default;
};

struct Formula {
  enum class Kind { atom, negation, equality, inequality, conjunction };

  Kind kind = Kind::conjunction;
  Atom atom;                      // atom / negation
  Term lhs, rhs;                  // equality / inequality
  std::vector<Formula> children;  // conjunction

  bool operator==(const Formula&) const = default;

  static Formula make_atom(Atom a) {
    Formula f;
    f.kind = Kind::atom;
    f.atom = std::move(a);
    return f;
  }
  static Formula make_negation(Atom a) {
    Formula f;
    f.kind = Kind::negation;
    f.atom = std::move(a);
    return f;
  }
  static Formula make_equality(Term l, Term r, bool negated) {
    Formula f;
    f.kind = negated ? Kind::inequality : Kind::equality;
    f.lhs = std::move(l);
    f.rhs = std::move(r);
    return f;
  }
  static Formula make_conjunction(std::vector<Formula> parts) {
    Formula f;
    f.kind = Kind::conjunction;
    f.children = std::move(parts);
    return f;
  }
};

struct TypedName {
  std::string name;
  std::string type = "object";

  bool operator==(const TypedName&) const = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<TypedName> params;

  bool operator==(const PredicateDecl&) const = default;
};

struct EffectFormula {
  std::vector<Atom> adds;
  std::vector<Atom> deletes;
  std::optional<int> cost_increase;  // (increase (total-cost) n)

  bool operator==(const EffectFormula&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::optional<Formula> precondition;  // nullopt <=> trivially true
  EffectFormula effect;

  bool operator==(const ActionSchema&) const = default;
};

struct Domain {
  std::string name;
  std::set<std::string> requirements;  // flags with ':' prefix
  std::vector<TypedName> types;        // name - parent
  std::vector<TypedName> constants;
  std::vector<PredicateDecl> predicates;
  std::vector<std::string> functions;  // at most {"total-cost"}
  std::vector<ActionSchema> actions;

  bool operator==(const Domain&) const = default;

  const PredicateDecl* find_predicate(std::string_view n) const {
    for (const auto& p : predicates)
      if (p.name == n) return &p;
    return nullptr;
  }
  const ActionSchema* find_action(std::string_view n) const {
    for (const auto& a : actions)
      if (a.name == n) return &a;
    return nullptr;
  }
};

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const GroundAtom&) const = default;

  // "(on a b)" — the canonical s-expression form.
  std::string sexpr() const {
    std::string out = "(" + predicate;
    for (const auto& a : args) out += " " + a;
    return out + ")";
  }
  // "on a b" — used in diagnostics.
  std::string str() const {
    std::string out = predicate;
    for (const auto& a : args) out += " " + a;
    return out;
  }
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<GroundAtom> init;
  Formula goal;

  bool operator==(const Problem&) const = default;
};

inline const std::set<std::string>& supported_requirements() {
  static const std::set<std::string> reqs = {
      ":strips", ":typing", ":negative-preconditions", ":equality", ":action-costs"};
  return reqs;
}

// ---------------------------------------------------------------------------
// Lexer

inline std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> tokens;
  int line = 1, col = 1;
  std::size_t i = 0;

  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  auto is_symbol_char = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.' || c == '=';
  };

  while (i < source.size()) {
    char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    if (c == ';') {  // comment to end of line
      while (i < source.size() && source[i] != '\n') {
        advance(source[i]);
        ++i;
      }
      continue;
    }
    if (c == '(') {
      tokens.push_back({TokenKind::lparen, "(", line, col});
      advance(c);
      ++i;
      continue;
    }
    if (c == ')') {
      tokens.push_back({TokenKind::rparen, ")", line, col});
      advance(c);
      ++i;
      continue;
    }
    if (c == '?' || c == ':' || is_symbol_char(c)) {
      int start_line = line, start_col = col;
      TokenKind kind = TokenKind::symbol;
      std::string text;
      if (c == '?' || c == ':') {
        kind = (c == '?') ? TokenKind::variable : TokenKind::keyword;
        text.push_back(c);
        advance(c);
        ++i;
      }
      std::size_t body = 0;
      while (i < source.size() && is_symbol_char(source[i])) {
        text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(source[i]))));
        advance(source[i]);
        ++i;
        ++body;
      }
      if (kind != TokenKind::symbol && body == 0)
        throw ParseError(ParseErrorKind::syntax_error, start_line, start_col,
                         std::string("dangling '") + (kind == TokenKind::variable ? "?" : ":") + "'");
      tokens.push_back({kind, std::move(text), start_line, start_col});
      continue;
    }
    throw ParseError(ParseErrorKind::illegal_character, line, col,
                     std::string("'") + c + "'");
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Parser internals

namespace detail {

class Cursor {
 public:
  explicit Cursor(const std::vector<Token>& tokens) : tokens_(&tokens) {}

  bool at_end() const { return pos_ >= tokens_->size(); }

  const Token& peek() const {
    if (at_end()) throw error_here(ParseErrorKind::syntax_error, "unexpected end of input");
    return (*tokens_)[pos_];
  }

  const Token& next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }

  bool peek_is(TokenKind kind) const { return !at_end() && (*tokens_)[pos_].kind == kind; }
  bool peek_is_symbol(std::string_view text) const {
    return peek_is(TokenKind::symbol) && (*tokens_)[pos_].text == text;
  }

  const Token& expect(TokenKind kind, std::string_view what) {
    if (!peek_is(kind))
      throw error_here(ParseErrorKind::syntax_error,
                       "expected " + std::string(what) + ", found " + found_text());
    return next();
  }
  void expect_symbol(std::string_view text) {
    if (!peek_is_symbol(text))
      throw error_here(ParseErrorKind::syntax_error,
                       "expected '" + std::string(text) + "', found " + found_text());
    ++pos_;
  }

  ParseError error_here(ParseErrorKind kind, const std::string& detail) const {
    int line = 1, col = 1;
    if (!at_end()) {
      line = (*tokens_)[pos_].line;
      col = (*tokens_)[pos_].col;
    } else if (!tokens_->empty()) {
      line = tokens_->back().line;
      col = tokens_->back().col + static_cast<int>(tokens_->back().text.size());
    }
    return ParseError(kind, line, col, detail);
  }

  std::string found_text() const {
    if (at_end()) return "end of input";
    return "'" + (*tokens_)[pos_].text + "'";
  }

 private:
  const std::vector<Token>* tokens_;
  std::size_t pos_ = 0;
};

// Parses "n1 n2 - t n3 ..." up to (not including) the closing paren.
// `want_variables` selects between parameter lists and object/type lists.
inline std::vector<TypedName> parse_typed_list(Cursor& cur, bool want_variables,
                                               std::string_view context) {
  std::vector<TypedName> out;
  std::vector<std::size_t> untyped;  // indices awaiting a type
  while (!cur.peek_is(TokenKind::rparen)) {
    if (cur.peek_is_symbol("-")) {
      cur.next();
      if (cur.peek_is(TokenKind::lparen))
        throw cur.error_here(ParseErrorKind::unsupported_construct,
                             "compound type (either ...) in " + std::string(context));
      const Token& type_tok = cur.expect(TokenKind::symbol, "type name");
      if (untyped.empty())
        throw cur.error_here(ParseErrorKind::syntax_error,
                             "type without preceding names in " + std::string(context));
      for (std::size_t idx : untyped) out[idx].type = type_tok.text;
      untyped.clear();
      continue;
    }
    TokenKind want = want_variables ? TokenKind::variable : TokenKind::symbol;
    const Token& tok = cur.expect(want, want_variables ? "variable" : "name");
    TypedName tn;
    tn.name = want_variables ? tok.text.substr(1) : tok.text;
    untyped.push_back(out.size());
    out.push_back(std::move(tn));
  }
  return out;  // names left untyped default to "object"
}

inline Term parse_term(Cursor& cur) {
  if (cur.peek_is(TokenKind::variable)) {
    Term t;
    t.is_variable = true;
    t.name = cur.next().text.substr(1);
    return t;
  }
  const Token& tok = cur.expect(TokenKind::symbol, "term");
  return Term{false, tok.text};
}

inline Atom parse_atom_body(Cursor& cur, const std::string& predicate) {
  Atom a;
  a.predicate = predicate;
  while (!cur.peek_is(TokenKind::rparen)) a.args.push_back(parse_term(cur));
  cur.next();  // ')'
  return a;
}

// Parses one parenthesised goal-description formula.  Returns nullopt only
// for the empty formula "()" (and only when `allow_empty`).
inline std::optional<Formula> parse_formula(Cursor& cur, bool allow_empty) {
  cur.expect(TokenKind::lparen, "'('");
  if (cur.peek_is(TokenKind::rparen)) {
    if (!allow_empty)
      throw cur.error_here(ParseErrorKind::syntax_error, "empty formula");
    cur.next();
    return std::nullopt;
  }
  const Token& head = cur.expect(TokenKind::symbol, "formula head");
  if (head.text == "and") {
    std::vector<Formula> children;
    while (!cur.peek_is(TokenKind::rparen)) {
      auto child = parse_formula(cur, false);
      children.push_back(std::move(*child));
    }
    cur.next();
    return Formula::make_conjunction(std::move(children));
  }
  if (head.text == "not") {
    cur.expect(TokenKind::lparen, "'('");
    const Token& inner = cur.expect(TokenKind::symbol, "atom or '='");
    if (inner.text == "=") {
      Term l = parse_term(cur);
      Term r = parse_term(cur);
      cur.expect(TokenKind::rparen, "')'");
      cur.expect(TokenKind::rparen, "')'");
      return Formula::make_equality(std::move(l), std::move(r), /*negated=*/true);
    }
    if (inner.text == "and" || inner.text == "or" || inner.text == "not")
      throw cur.error_here(ParseErrorKind::unsupported_construct,
                           "'not' applied to non-atomic formula");
    Atom a = parse_atom_body(cur, inner.text);
    cur.expect(TokenKind::rparen, "')'");
    return Formula::make_negation(std::move(a));
  }
  if (head.text == "=") {
    Term l = parse_term(cur);
    Term r = parse_term(cur);
    cur.expect(TokenKind::rparen, "')'");
    return Formula::make_equality(std::move(l), std::move(r), /*negated=*/false);
  }
  if (head.text == "or" || head.text == "imply" || head.text == "exists" ||
      head.text == "forall" || head.text == "when" || head.text == "preference")
    throw cur.error_here(ParseErrorKind::unsupported_construct, "'" + head.text + "' formula");
  return Formula::make_atom(parse_atom_body(cur, head.text));
}

inline int parse_nonneg_int(Cursor& cur, std::string_view what) {
  const Token& tok = cur.expect(TokenKind::symbol, what);
  for (char c : tok.text)
    if (c < '0' || c > '9')
      throw ParseError(ParseErrorKind::unsupported_construct, tok.line, tok.col,
                       "non-integer " + std::string(what) + " '" + tok.text + "'");
  return std::stoi(tok.text);
}

// One effect item: add, delete, or (increase (total-cost) n).
inline void parse_effect_item(Cursor& cur, EffectFormula& eff) {
  cur.expect(TokenKind::lparen, "'('");
  const Token& head = cur.expect(TokenKind::symbol, "effect head");
  if (head.text == "not") {
    cur.expect(TokenKind::lparen, "'('");
    const Token& inner = cur.expect(TokenKind::symbol, "atom");
    if (inner.text == "=")
      throw cur.error_here(ParseErrorKind::unsupported_construct, "equality in effect");
    eff.deletes.push_back(parse_atom_body(cur, inner.text));
    cur.expect(TokenKind::rparen, "')'");
    return;
  }
  if (head.text == "increase") {
    cur.expect(TokenKind::lparen, "'('");
    const Token& fn = cur.expect(TokenKind::symbol, "function name");
    if (fn.text != "total-cost")
      throw ParseError(ParseErrorKind::unsupported_construct, fn.line, fn.col,
                       "increase of function '" + fn.text + "'");
    cur.expect(TokenKind::rparen, "')'");
    int amount = parse_nonneg_int(cur, "cost");
    cur.expect(TokenKind::rparen, "')'");
    if (eff.cost_increase)
      throw cur.error_here(ParseErrorKind::syntax_error, "duplicate (increase (total-cost) ...)");
    eff.cost_increase = amount;
    return;
  }
  if (head.text == "decrease" || head.text == "assign" || head.text == "scale-up" ||
      head.text == "scale-down" || head.text == "forall" || head.text == "when" ||
      head.text == "and" || head.text == "oneof" || head.text == "probabilistic")
    throw ParseError(ParseErrorKind::unsupported_construct, head.line, head.col,
                     "'" + head.text + "' effect");
  eff.adds.push_back(parse_atom_body(cur, head.text));
}

inline EffectFormula parse_effect(Cursor& cur) {
  EffectFormula eff;
  cur.expect(TokenKind::lparen, "'('");
  if (cur.peek_is(TokenKind::rparen)) {  // empty effect "()"
    cur.next();
    return eff;
  }
  if (cur.peek_is_symbol("and")) {
    cur.next();
    while (!cur.peek_is(TokenKind::rparen)) parse_effect_item(cur, eff);
    cur.next();
    return eff;
  }
  // Single effect item; re-parse the already-open paren by faking the head.
  const Token& head = cur.expect(TokenKind::symbol, "effect head");
  if (head.text == "not") {
    cur.expect(TokenKind::lparen, "'('");
    const Token& inner = cur.expect(TokenKind::symbol, "atom");
    if (inner.text == "=")
      throw cur.error_here(ParseErrorKind::unsupported_construct, "equality in effect");
    eff.deletes.push_back(parse_atom_body(cur, inner.text));
    cur.expect(TokenKind::rparen, "')'");
  } else if (head.text == "increase") {
    cur.expect(TokenKind::lparen, "'('");
    const Token& fn = cur.expect(TokenKind::symbol, "function name");
    if (fn.text != "total-cost")
      throw ParseError(ParseErrorKind::unsupported_construct, fn.line, fn.col,
                       "increase of function '" + fn.text + "'");
    cur.expect(TokenKind::rparen, "')'");
    eff.cost_increase = parse_nonneg_int(cur, "cost");
    cur.expect(TokenKind::rparen, "')'");
  } else {
    eff.adds.push_back(parse_atom_body(cur, head.text));
  }
  return eff;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation helpers shared by domain/problem parsing

namespace detail {

inline void check_formula_atoms(const Domain& dom, const Formula& f,
                                const std::set<std::string>& variables,
                                const std::set<std::string>& known_objects,
                                std::string_view where) {
  auto check_term = [&](const Term& t) {
    if (t.is_variable) {
      if (!variables.count(t.name))
        throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                         "undeclared variable ?" + t.name + " in " + std::string(where));
    } else if (!known_objects.count(t.name)) {
      throw ParseError(ParseErrorKind::unknown_object, 1, 1,
                       "'" + t.name + "' in " + std::string(where));
    }
  };
  switch (f.kind) {
    case Formula::Kind::atom:
    case Formula::Kind::negation: {
      const PredicateDecl* decl = dom.find_predicate(f.atom.predicate);
      if (!decl)
        throw ParseError(ParseErrorKind::unknown_predicate, 1, 1,
                         "'" + f.atom.predicate + "' in " + std::string(where));
      if (decl->params.size() != f.atom.args.size())
        throw ParseError(ParseErrorKind::arity_mismatch, 1, 1,
                         "predicate '" + f.atom.predicate + "' expects " +
                             std::to_string(decl->params.size()) + " arguments, got " +
                             std::to_string(f.atom.args.size()) + " in " + std::string(where));
      for (const Term& t : f.atom.args) check_term(t);
      break;
    }
    case Formula::Kind::equality:
    case Formula::Kind::inequality:
      check_term(f.lhs);
      check_term(f.rhs);
      break;
    case Formula::Kind::conjunction:
      for (const Formula& c : f.children)
        check_formula_atoms(dom, c, variables, known_objects, where);
      break;
  }
}

inline void check_effect_atoms(const Domain& dom, const ActionSchema& action,
                               const std::set<std::string>& variables,
                               const std::set<std::string>& constants) {
  auto check_atom = [&](const Atom& a, std::string_view which) {
    const PredicateDecl* decl = dom.find_predicate(a.predicate);
    std::string where = "effect of action '" + action.name + "'";
    if (!decl)
      throw ParseError(ParseErrorKind::unknown_predicate, 1, 1, "'" + a.predicate + "' in " + where);
    if (decl->params.size() != a.args.size())
      throw ParseError(ParseErrorKind::arity_mismatch, 1, 1,
                       "predicate '" + a.predicate + "' expects " +
                           std::to_string(decl->params.size()) + " arguments, got " +
                           std::to_string(a.args.size()) + " in " + where);
    for (const Term& t : a.args) {
      if (t.is_variable) {
        if (!variables.count(t.name))
          throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                           "undeclared variable ?" + t.name + " in " + where);
      } else if (!constants.count(t.name)) {
        throw ParseError(ParseErrorKind::unknown_object, 1, 1, "'" + t.name + "' in " + where);
      }
    }
    (void)which;
  };
  for (const Atom& a : action.effect.adds) check_atom(a, "add");
  for (const Atom& a : action.effect.deletes) check_atom(a, "delete");
  for (const Atom& a : action.effect.adds)
    for (const Atom& d : action.effect.deletes)
      if (a == d)
        throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                         "atom " + a.predicate + " both added and deleted by action '" +
                             action.name + "'");
}

inline void check_types_declared(const Domain& dom) {
  std::set<std::string> declared{"object"};
  for (const auto& t : dom.types) {
    if (!declared.insert(t.name).second && t.name != "object")
      throw ParseError(ParseErrorKind::duplicate_name, 1, 1, "type '" + t.name + "'");
  }
  std::map<std::string, std::string> parent;
  for (const auto& t : dom.types) parent[t.name] = t.type;
  for (const auto& t : dom.types) {
    if (!declared.count(t.type))
      throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                       "unknown parent type '" + t.type + "' of '" + t.name + "'");
    // Walk to the root; the walk must terminate at "object".
    std::string cur = t.name;
    std::size_t steps = 0;
    while (cur != "object") {
      auto it = parent.find(cur);
      cur = (it == parent.end()) ? "object" : it->second;
      if (++steps > dom.types.size() + 1)
        throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                         "type hierarchy cycle involving '" + t.name + "'");
    }
  }
  auto check_type_used = [&](const std::string& ty, std::string_view where) {
    if (!declared.count(ty))
      throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                       "unknown type '" + ty + "' in " + std::string(where));
  };
  for (const auto& c : dom.constants) check_type_used(c.type, "constants");
  for (const auto& p : dom.predicates)
    for (const auto& v : p.params) check_type_used(v.type, "predicate '" + p.name + "'");
  for (const auto& a : dom.actions)
    for (const auto& v : a.params) check_type_used(v.type, "action '" + a.name + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain parsing

inline Domain parse_domain(const std::vector<Token>& tokens) {
  using detail::Cursor;
  Cursor cur(tokens);
  Domain dom;

  cur.expect(TokenKind::lparen, "'('");
  cur.expect_symbol("define");
  cur.expect(TokenKind::lparen, "'('");
  cur.expect_symbol("domain");
  dom.name = cur.expect(TokenKind::symbol, "domain name").text;
  cur.expect(TokenKind::rparen, "')'");

  while (!cur.peek_is(TokenKind::rparen)) {
    cur.expect(TokenKind::lparen, "'('");
    const Token& section = cur.expect(TokenKind::keyword, "section keyword");
    if (section.text == ":requirements") {
      while (!cur.peek_is(TokenKind::rparen)) {
        const Token& flag = cur.expect(TokenKind::keyword, "requirement flag");
        if (!supported_requirements().count(flag.text))
          throw ParseError(ParseErrorKind::unsupported_construct, flag.line, flag.col,
                           "requirement '" + flag.text + "'");
        dom.requirements.insert(flag.text);
      }
      cur.next();
    } else if (section.text == ":types") {
      dom.types = detail::parse_typed_list(cur, /*want_variables=*/false, ":types");
      cur.next();
      for (auto& t : dom.types)
        if (t.name == "object" && t.type != "object")
          throw ParseError(ParseErrorKind::syntax_error, section.line, section.col,
                           "type 'object' may not be redeclared with a parent");
    } else if (section.text == ":constants") {
      dom.constants = detail::parse_typed_list(cur, /*want_variables=*/false, ":constants");
      cur.next();
    } else if (section.text == ":predicates") {
      while (!cur.peek_is(TokenKind::rparen)) {
        cur.expect(TokenKind::lparen, "'('");
        PredicateDecl decl;
        decl.name = cur.expect(TokenKind::symbol, "predicate name").text;
        decl.params = detail::parse_typed_list(cur, /*want_variables=*/true,
                                               "predicate '" + decl.name + "'");
        cur.next();
        if (dom.find_predicate(decl.name))
          throw ParseError(ParseErrorKind::duplicate_name, section.line, section.col,
                           "predicate '" + decl.name + "'");
        dom.predicates.push_back(std::move(decl));
      }
      cur.next();
    } else if (section.text == ":functions") {
      while (!cur.peek_is(TokenKind::rparen)) {
        cur.expect(TokenKind::lparen, "'('");
        const Token& fn = cur.expect(TokenKind::symbol, "function name");
        if (fn.text != "total-cost")
          throw ParseError(ParseErrorKind::unsupported_construct, fn.line, fn.col,
                           "function '" + fn.text + "'");
        if (!cur.peek_is(TokenKind::rparen))
          throw cur.error_here(ParseErrorKind::unsupported_construct, "function with parameters");
        cur.next();
        if (cur.peek_is_symbol("-")) {  // optional "- number" result type
          cur.next();
          cur.expect_symbol("number");
        }
        dom.functions.push_back(fn.text);
      }
      cur.next();
    } else if (section.text == ":action") {
      ActionSchema action;
      action.name = cur.expect(TokenKind::symbol, "action name").text;
      if (dom.find_action(action.name))
        throw ParseError(ParseErrorKind::duplicate_name, section.line, section.col,
                         "action '" + action.name + "'");
      const Token& params_kw = cur.expect(TokenKind::keyword, "':parameters'");
      if (params_kw.text != ":parameters")
        throw ParseError(ParseErrorKind::syntax_error, params_kw.line, params_kw.col,
                         "expected ':parameters', found '" + params_kw.text + "'");
      cur.expect(TokenKind::lparen, "'('");
      action.params = detail::parse_typed_list(cur, /*want_variables=*/true,
                                               "action '" + action.name + "'");
      cur.next();

      bool saw_effect = false;
      while (cur.peek_is(TokenKind::keyword)) {
        const Token& part = cur.next();
        if (part.text == ":precondition") {
          action.precondition = detail::parse_formula(cur, /*allow_empty=*/true);
        } else if (part.text == ":effect") {
          action.effect = detail::parse_effect(cur);
          saw_effect = true;
        } else {
          throw ParseError(ParseErrorKind::unsupported_construct, part.line, part.col,
                           "action part '" + part.text + "'");
        }
      }
      cur.expect(TokenKind::rparen, "')'");
      if (!saw_effect)
        throw ParseError(ParseErrorKind::syntax_error, section.line, section.col,
                         "action '" + action.name + "' has no :effect");
      dom.actions.push_back(std::move(action));
    } else if (section.text == ":durative-action" || section.text == ":derived" ||
               section.text == ":axiom" || section.text == ":constraints") {
      throw ParseError(ParseErrorKind::unsupported_construct, section.line, section.col,
                       "'" + section.text + "' section");
    } else {
      throw ParseError(ParseErrorKind::unsupported_construct, section.line, section.col,
                       "'" + section.text + "' section");
    }
  }
  cur.next();  // final ')'
  if (!cur.at_end())
    throw cur.error_here(ParseErrorKind::syntax_error, "trailing tokens after domain");

  // --- semantic checks ---
  detail::check_types_declared(dom);

  std::set<std::string> constant_names;
  for (const auto& c : dom.constants)
    if (!constant_names.insert(c.name).second)
      throw ParseError(ParseErrorKind::duplicate_name, 1, 1, "constant '" + c.name + "'");

  for (const auto& action : dom.actions) {
    std::set<std::string> vars;
    for (const auto& p : action.params)
      if (!vars.insert(p.name).second)
        throw ParseError(ParseErrorKind::duplicate_name, 1, 1,
                         "parameter ?" + p.name + " in action '" + action.name + "'");
    if (action.precondition)
      detail::check_formula_atoms(dom, *action.precondition, vars, constant_names,
                                  "precondition of action '" + action.name + "'");
    detail::check_effect_atoms(dom, action, vars, constant_names);
  }
  return dom;
}

// ---------------------------------------------------------------------------
// Problem parsing (validated against its domain)

inline Problem parse_problem(const std::vector<Token>& tokens, const Domain& dom) {
  using detail::Cursor;
  Cursor cur(tokens);
  Problem prob;
  prob.goal = Formula::make_conjunction({});

  cur.expect(TokenKind::lparen, "'('");
  cur.expect_symbol("define");
  cur.expect(TokenKind::lparen, "'('");
  cur.expect_symbol("problem");
  prob.name = cur.expect(TokenKind::symbol, "problem name").text;
  cur.expect(TokenKind::rparen, "')'");

  bool saw_goal = false;
  while (!cur.peek_is(TokenKind::rparen)) {
    cur.expect(TokenKind::lparen, "'('");
    const Token& section = cur.expect(TokenKind::keyword, "section keyword");
    if (section.text == ":domain") {
      prob.domain_name = cur.expect(TokenKind::symbol, "domain name").text;
      cur.expect(TokenKind::rparen, "')'");
    } else if (section.text == ":requirements") {
      // Some IPC problem files repeat the domain requirements; apply the
      // same subset filter.
      while (!cur.peek_is(TokenKind::rparen)) {
        const Token& flag = cur.expect(TokenKind::keyword, "requirement flag");
        if (!supported_requirements().count(flag.text))
          throw ParseError(ParseErrorKind::unsupported_construct, flag.line, flag.col,
                           "requirement '" + flag.text + "'");
      }
      cur.next();
    } else if (section.text == ":objects") {
      prob.objects = detail::parse_typed_list(cur, /*want_variables=*/false, ":objects");
      cur.next();
    } else if (section.text == ":init") {
      while (!cur.peek_is(TokenKind::rparen)) {
        cur.expect(TokenKind::lparen, "'('");
        const Token& head = cur.expect(TokenKind::symbol, "predicate name");
        if (head.text == "=") {
          // (= (total-cost) 0): accepted and dropped; costs never gate truth.
          cur.expect(TokenKind::lparen, "'('");
          const Token& fn = cur.expect(TokenKind::symbol, "function name");
          if (fn.text != "total-cost")
            throw ParseError(ParseErrorKind::unsupported_construct, fn.line, fn.col,
                             "function '" + fn.text + "' in :init");
          cur.expect(TokenKind::rparen, "')'");
          detail::parse_nonneg_int(cur, "function value");
          cur.expect(TokenKind::rparen, "')'");
          continue;
        }
        if (head.text == "not")
          throw ParseError(ParseErrorKind::unsupported_construct, head.line, head.col,
                           "negative literal in :init (closed world assumed)");
        GroundAtom atom;
        atom.predicate = head.text;
        while (!cur.peek_is(TokenKind::rparen)) {
          const Token& arg = cur.expect(TokenKind::symbol, "object name");
          atom.args.push_back(arg.text);
        }
        cur.next();
        prob.init.push_back(std::move(atom));
      }
      cur.next();
    } else if (section.text == ":goal") {
      auto goal = detail::parse_formula(cur, /*allow_empty=*/false);
      cur.expect(TokenKind::rparen, "')'");
      prob.goal = std::move(*goal);
      saw_goal = true;
    } else if (section.text == ":metric") {
      // (:metric minimize (total-cost)) is accepted and ignored.
      cur.expect_symbol("minimize");
      cur.expect(TokenKind::lparen, "'('");
      const Token& fn = cur.expect(TokenKind::symbol, "function name");
      if (fn.text != "total-cost")
        throw ParseError(ParseErrorKind::unsupported_construct, fn.line, fn.col,
                         "metric over '" + fn.text + "'");
      cur.expect(TokenKind::rparen, "')'");
      cur.expect(TokenKind::rparen, "')'");
    } else {
      throw ParseError(ParseErrorKind::unsupported_construct, section.line, section.col,
                       "'" + section.text + "' section");
    }
  }
  cur.next();
  if (!cur.at_end())
    throw cur.error_here(ParseErrorKind::syntax_error, "trailing tokens after problem");
  if (prob.domain_name.empty())
    throw ParseError(ParseErrorKind::syntax_error, 1, 1, "missing (:domain ...) section");
  if (!saw_goal)
    throw ParseError(ParseErrorKind::syntax_error, 1, 1, "missing (:goal ...) section");
  if (prob.domain_name != dom.name)
    throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                     "problem references domain '" + prob.domain_name + "' but was parsed against '" +
                         dom.name + "'");

  // --- semantic checks ---
  std::set<std::string> declared_types{"object"};
  for (const auto& t : dom.types) declared_types.insert(t.name);

  std::set<std::string> object_names;
  for (const auto& c : dom.constants) object_names.insert(c.name);
  for (const auto& o : prob.objects) {
    if (!object_names.insert(o.name).second)
      throw ParseError(ParseErrorKind::duplicate_name, 1, 1, "object '" + o.name + "'");
    if (!declared_types.count(o.type))
      throw ParseError(ParseErrorKind::syntax_error, 1, 1,
                       "unknown type '" + o.type + "' of object '" + o.name + "'");
  }

  for (const auto& atom : prob.init) {
    const PredicateDecl* decl = dom.find_predicate(atom.predicate);
    if (!decl)
      throw ParseError(ParseErrorKind::unknown_predicate, 1, 1, "'" + atom.predicate + "' in :init");
    if (decl->params.size() != atom.args.size())
      throw ParseError(ParseErrorKind::arity_mismatch, 1, 1,
                       "predicate '" + atom.predicate + "' expects " +
                           std::to_string(decl->params.size()) + " arguments, got " +
                           std::to_string(atom.args.size()) + " in :init");
    for (const auto& arg : atom.args)
      if (!object_names.count(arg))
        throw ParseError(ParseErrorKind::unknown_object, 1, 1, "'" + arg + "' in :init");
  }

  detail::check_formula_atoms(dom, prob.goal, /*variables=*/{}, object_names, ":goal");
  return prob;
}

inline Domain parse_domain_text(std::string_view text) { return parse_domain(tokenize(text)); }
inline Problem parse_problem_text(std::string_view text, const Domain& dom) {
  return parse_problem(tokenize(text), dom);
}

// ---------------------------------------------------------------------------
// Pretty printer.  Canonical layout; parsing the output reproduces the AST.

namespace detail {

inline void print_typed(std::ostream& os, const TypedName& tn, bool variable) {
  if (variable) os << '?';
  os << tn.name << " - " << tn.type;
}

inline void print_formula(std::ostream& os, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::atom: {
      os << '(' << f.atom.predicate;
      for (const Term& t : f.atom.args) os << ' ' << t.str();
      os << ')';
      break;
    }
    case Formula::Kind::negation: {
      os << "(not ";
      print_formula(os, Formula::make_atom(f.atom));
      os << ')';
      break;
    }
    case Formula::Kind::equality:
      os << "(= " << f.lhs.str() << ' ' << f.rhs.str() << ')';
      break;
    case Formula::Kind::inequality:
      os << "(not (= " << f.lhs.str() << ' ' << f.rhs.str() << "))";
      break;
    case Formula::Kind::conjunction: {
      os << "(and";
      for (const Formula& c : f.children) {
        os << ' ';
        print_formula(os, c);
      }
      os << ')';
      break;
    }
  }
}

inline void print_atom(std::ostream& os, const Atom& a) {
  os << '(' << a.predicate;
  for (const Term& t : a.args) os << ' ' << t.str();
  os << ')';
}

}  // namespace detail

inline std::string pretty_print(const Domain& dom) {
  std::ostringstream os;
  os << "(define (domain " << dom.name << ")\n";
  if (!dom.requirements.empty()) {
    os << "  (:requirements";
    for (const auto& r : dom.requirements) os << ' ' << r;
    os << ")\n";
  }
  if (!dom.types.empty()) {
    os << "  (:types\n";
    for (const auto& t : dom.types) {
      os << "    ";
      detail::print_typed(os, t, false);
      os << '\n';
    }
    os << "  )\n";
  }
  if (!dom.constants.empty()) {
    os << "  (:constants\n";
    for (const auto& c : dom.constants) {
      os << "    ";
      detail::print_typed(os, c, false);
      os << '\n';
    }
    os << "  )\n";
  }
  if (!dom.predicates.empty()) {
    os << "  (:predicates\n";
    for (const auto& p : dom.predicates) {
      os << "    (" << p.name;
      for (const auto& v : p.params) {
        os << ' ';
        detail::print_typed(os, v, true);
      }
      os << ")\n";
    }
    os << "  )\n";
  }
  if (!dom.functions.empty()) {
    os << "  (:functions\n";
    for (const auto& f : dom.functions) os << "    (" << f << ")\n";
    os << "  )\n";
  }
  for (const auto& a : dom.actions) {
    os << "  (:action " << a.name << "\n    :parameters (";
    bool first = true;
    for (const auto& p : a.params) {
      if (!first) os << ' ';
      detail::print_typed(os, p, true);
      first = false;
    }
    os << ")\n";
    if (a.precondition) {
      os << "    :precondition ";
      detail::print_formula(os, *a.precondition);
      os << '\n';
    }
    os << "    :effect (and";
    for (const auto& add : a.effect.adds) {
      os << ' ';
      detail::print_atom(os, add);
    }
    for (const auto& del : a.effect.deletes) {
      os << " (not ";
      detail::print_atom(os, del);
      os << ')';
    }
    if (a.effect.cost_increase)
      os << " (increase (total-cost) " << *a.effect.cost_increase << ')';
    os << ")\n  )\n";
  }
  os << ")\n";
  return os.str();
}

inline std::string pretty_print(const Problem& prob) {
  std::ostringstream os;
  os << "(define (problem " << prob.name << ")\n";
  os << "  (:domain " << prob.domain_name << ")\n";
  if (!prob.objects.empty()) {
    os << "  (:objects\n";
    for (const auto& o : prob.objects) {
      os << "    ";
      detail::print_typed(os, o, false);
      os << '\n';
    }
    os << "  )\n";
  }
  os << "  (:init\n";
  for (const auto& atom : prob.init) os << "    " << atom.sexpr() << '\n';
  os << "  )\n";
  os << "  (:goal ";
  detail::print_formula(os, prob.goal);
  os << ")\n)\n";
  return os.str();
}

}  // namespace pddlbench
