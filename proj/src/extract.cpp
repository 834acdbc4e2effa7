#include "rhf/extract.hpp"

#include <set>

namespace rhf {

namespace {

std::string history_text(const SymbolTable& sym, const HistoryKey& key) {
  std::string out;
  for (int s : key) {
    if (!out.empty()) out += ' ';
    out += sym.state_name(s);
  }
  return out;
}

}  // namespace

Grammar extract_grammar(const SymbolTable& symbols, const PolicyMap& policy,
                        const OutcomeMap& outcomes, const std::vector<int>& start_states,
                        int k) {
  if (k < 0) throw DomainError("extract_grammar: k must be nonnegative");
  Grammar g;
  g.symbols = symbols;
  g.kind = GrammarKind::Recurrent;
  g.recurrence = k;

  for (const auto& [pair, fate] : outcomes) {
    auto [state, goal] = pair;
    if (state < 0 || state >= symbols.state_count() || goal < 0 || goal >= symbols.goal_count())
      throw DomainError("extract_grammar: controller outcome references unknown symbols");
    g.act_rules.push_back({state, goal, fate.kind, fate.next_state});
  }

  std::set<int> seen_starts;
  std::set<HistoryKey> emitted;
  for (int start : start_states) {
    if (start < 0 || start >= symbols.state_count())
      throw DomainError("extract_grammar: unknown start state");
    if (!seen_starts.insert(start).second) continue;
    g.start_rules.push_back({start});

    // Roll the policy forward. Keys are bounded by |S|^(k+1), so revisiting
    // one means the rollout cycles and every rule it can touch is already in.
    std::vector<int> full_history{start};
    while (true) {
      HistoryKey key(full_history.begin(),
                     full_history.begin() +
                         std::min<size_t>(full_history.size(), static_cast<size_t>(k) + 1));
      if (emitted.count(key)) break;
      auto pit = policy.find(key);
      if (pit == policy.end())
        throw DomainError("extract_grammar: policy undefined on reachable history [" +
                          history_text(symbols, key) + "]");
      int goal = pit->second;
      emitted.insert(key);
      g.meta_rules.push_back({key[0], HistoryKey(key.begin() + 1, key.end()), goal});

      auto oit = outcomes.find({key[0], goal});
      if (oit == outcomes.end())
        throw DomainError("extract_grammar: no controller outcome for (" +
                          symbols.state_name(key[0]) + ", " + symbols.goal_name(goal) + ")");
      const ControllerFate& fate = oit->second;
      if (fate.kind != ActKind::Return) break;
      full_history.insert(full_history.begin(), fate.next_state);
    }
  }

  return g;
}

}  // namespace rhf
