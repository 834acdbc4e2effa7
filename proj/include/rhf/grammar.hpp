#pragma once

#include <string>
#include <vector>

#include "rhf/symbols.hpp"

namespace rhf {

// S -> s <META>
struct StartRule {
  int state;

  bool operator==(const StartRule&) const = default;
};

// s <META> s~ -> s g <ACT> s s~   (context empty for constrained grammars)
struct MetaRule {
  int state;
  std::vector<int> context;  // previously visited states, most recent first
  int goal;

  bool operator==(const MetaRule&) const = default;
};

enum class ActKind : std::uint8_t {
  Return,     // s g <ACT> -> s g s' <META>
  Terminate,  // s g <ACT> -> s g tau
  Loop,       // s g <ACT> -> s g <ACT>
};

struct ActRule {
  int state;
  int goal;
  ActKind kind;
  int next_state = -1;  // Return only

  bool operator==(const ActRule&) const = default;
};

enum class GrammarKind : std::uint8_t { Constrained, Recurrent };

// A goal-trajectory grammar. Constrained grammars demand exactly one
// context-free META rule per state; k-recurrent grammars allow zero or one
// META rule per (state, context) with contexts up to length k. Both demand
// exactly one ACT rule per (state, goal) pair.
struct Grammar {
  SymbolTable symbols;
  GrammarKind kind = GrammarKind::Constrained;
  int recurrence = 0;  // k; 0 for constrained grammars

  std::vector<StartRule> start_rules;
  std::vector<MetaRule> meta_rules;
  std::vector<ActRule> act_rules;

  // Rule order is insertion order; canonicalize() sorts rules so that two
  // grammars with equal rule sets compare equal.
  void canonicalize();
  bool same_rules(const Grammar& other) const;

  const MetaRule* find_meta(int state, const std::vector<int>& context) const;
  const ActRule* find_act(int state, int goal) const;
  const StartRule* find_start(int state) const;
};

struct ValidationIssue {
  std::string clause;  // definition clause, e.g. "3(b)"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> violations;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks every clause of the definition matching grammar.kind and reports all
// violations. Warnings flag META rules whose contexts overlap under prefix
// matching (derivation resolves those by longest context).
ValidationReport validate(const Grammar& grammar);

// Reinterprets a valid constrained grammar as a 0-recurrent one.
// Throws DomainError when the input does not validate.
Grammar to_zero_recurrent(const Grammar& grammar);

}  // namespace rhf
