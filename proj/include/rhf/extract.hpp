#pragma once

#include <map>
#include <vector>

#include "rhf/grammar.hpp"

namespace rhf {

// What the controller does when commanded goal g from state s, with no step
// budget in the way.
struct ControllerFate {
  ActKind kind;        // Return / Terminate / Loop
  int next_state = -1; // Return only
};

// (state, goal) -> fate. Must cover every pair for the extracted grammar to
// validate.
using OutcomeMap = std::map<std::pair<int, int>, ControllerFate>;

// State history as seen by the meta controller, most recent first:
// key[0] is the current state, key[1..] the states before it.
using HistoryKey = std::vector<int>;

// Deterministic goal choice per history of length <= k+1.
using PolicyMap = std::map<HistoryKey, int>;

// Builds the k-recurrent grammar whose derivations replay `policy` under
// `outcomes` from each start state: one META rule per history key reachable
// in the rollout (context = key minus its head), one ACT rule per
// (state, goal) entry of `outcomes`, one start rule per start state. With
// k = 0 every context is empty and the result has the shape of a constrained
// grammar. Throws DomainError when the policy is undefined on a reachable
// history, naming that history.
Grammar extract_grammar(const SymbolTable& symbols, const PolicyMap& policy,
                        const OutcomeMap& outcomes, const std::vector<int>& start_states, int k);

}  // namespace rhf
