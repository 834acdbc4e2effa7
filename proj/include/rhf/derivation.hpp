#pragma once

#include <string>
#include <vector>

#include "rhf/grammar.hpp"

namespace rhf {

inline constexpr int kDefaultMaxDeriveSteps = 10000;

enum class DeriveStatus : std::uint8_t { Completed, Stuck, Looping };

enum class LoopCause : std::uint8_t { LoopRule, StepBudget };

struct DerivationResult {
  DeriveStatus status;
  // Completed: the generated terminal string. Otherwise: the sentential form
  // at the point derivation stopped.
  std::vector<Token> tokens;
  int steps = 0;

  // Stuck details: the state whose META expansion failed and the visited-state
  // history (most recent first) no rule context matched, or a description when
  // an ACT rule is missing.
  int stuck_state = -1;
  std::vector<int> missing_context;
  std::string stuck_reason;

  // Looping details: the (state, goal) pair whose ACT rule loops, or the pair
  // pending when the step budget ran out.
  int loop_state = -1;
  int loop_goal = -1;
  LoopCause loop_cause = LoopCause::LoopRule;

  bool completed() const { return status == DeriveStatus::Completed; }
};

// Expands the unique nonterminal of the sentential form until no nonterminal
// remains (Completed), an ACT loop rule fires (Looping), no rule applies
// (Stuck), or `max_steps` rule applications pass (reported as Looping with
// LoopCause::StepBudget). META expansion picks, among the rules whose context
// equals a prefix of the visited-state history, the one with the longest
// context. Throws DomainError when no start rule exists for `start_state`.
DerivationResult derive(const Grammar& grammar, int start_state,
                        int max_steps = kDefaultMaxDeriveSteps);

struct SplitResult {
  std::vector<Token> trajectory;      // "s g s g ... tau" prefix
  std::vector<int> reversed_states;   // derivation suffix: visited states, reversed
};

// Splits a completed derivation string into its trajectory prefix (ending at
// the terminal symbol) and the reversed-state suffix. Throws DomainError when
// the token sequence does not have that shape.
SplitResult split_completed(const DerivationResult& result, const SymbolTable& symbols);

}  // namespace rhf
