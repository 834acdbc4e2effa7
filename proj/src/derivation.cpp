#include "rhf/derivation.hpp"

#include <algorithm>
#include <cassert>

namespace rhf {

namespace {

int count_nonterminals(const std::vector<Token>& tokens) {
  int n = 0;
  for (const auto& t : tokens)
    if (t.kind == TokenKind::Start || t.kind == TokenKind::Meta || t.kind == TokenKind::Act) ++n;
  return n;
}

// Visited-state history to the right of a <META> token, most recent first.
std::vector<int> history_after(const std::vector<Token>& form, size_t meta_pos) {
  std::vector<int> hist;
  for (size_t i = meta_pos + 1; i < form.size(); ++i) {
    assert(form[i].kind == TokenKind::State);
    hist.push_back(form[i].index);
  }
  return hist;
}

const MetaRule* longest_matching_meta(const Grammar& g, int state,
                                      const std::vector<int>& history) {
  const MetaRule* best = nullptr;
  for (const auto& r : g.meta_rules) {
    if (r.state != state) continue;
    if (r.context.size() > history.size()) continue;
    if (!std::equal(r.context.begin(), r.context.end(), history.begin())) continue;
    if (!best || r.context.size() > best->context.size()) best = &r;
  }
  return best;
}

}  // namespace

DerivationResult derive(const Grammar& g, int start_state, int max_steps) {
  if (max_steps < 1) throw DomainError("derive: max_steps must be >= 1");
  const StartRule* start = g.find_start(start_state);
  if (!start) {
    std::string name = start_state >= 0 && start_state < g.symbols.state_count()
                           ? g.symbols.state_name(start_state)
                           : std::to_string(start_state);
    throw DomainError("derive: no start rule for state " + name);
  }

  DerivationResult res;
  std::vector<Token> form{state_token(start_state), meta_token()};
  res.steps = 1;  // S -> s <META>
  size_t nt = 1;  // position of the unique nonterminal

  while (true) {
    assert(count_nonterminals(form) == 1);
    if (res.steps >= max_steps) {
      res.status = DeriveStatus::Looping;
      res.loop_cause = LoopCause::StepBudget;
      res.loop_state = form[nt - 1].kind == TokenKind::State ? form[nt - 1].index
                                                             : form[nt - 2].index;
      res.loop_goal = form[nt - 1].kind == TokenKind::Goal ? form[nt - 1].index : -1;
      res.tokens = std::move(form);
      return res;
    }

    if (form[nt].kind == TokenKind::Meta) {
      int state = form[nt - 1].index;
      std::vector<int> history = history_after(form, nt);
      const MetaRule* rule = longest_matching_meta(g, state, history);
      if (!rule) {
        res.status = DeriveStatus::Stuck;
        res.stuck_state = state;
        res.missing_context = std::move(history);
        res.stuck_reason = "no META rule matches state " + g.symbols.state_name(state) +
                           " with the current history";
        res.tokens = std::move(form);
        return res;
      }
      // s <META> s~  ->  s g <ACT> s s~
      form[nt] = goal_token(rule->goal);
      form.insert(form.begin() + nt + 1, {act_token(), state_token(state)});
      nt = nt + 1;
      ++res.steps;
    } else {
      assert(form[nt].kind == TokenKind::Act);
      int state = form[nt - 2].index;
      int goal = form[nt - 1].index;
      const ActRule* rule = g.find_act(state, goal);
      if (!rule) {
        res.status = DeriveStatus::Stuck;
        res.stuck_state = state;
        res.stuck_reason = "no ACT rule for (" + g.symbols.state_name(state) + ", " +
                           g.symbols.goal_name(goal) + ")";
        res.tokens = std::move(form);
        return res;
      }
      switch (rule->kind) {
        case ActKind::Return:
          // s g <ACT> -> s g s' <META>
          form[nt] = state_token(rule->next_state);
          form.insert(form.begin() + nt + 1, meta_token());
          nt = nt + 1;
          ++res.steps;
          break;
        case ActKind::Terminate:
          form[nt] = tau_token();
          ++res.steps;
          res.status = DeriveStatus::Completed;
          res.tokens = std::move(form);
          return res;
        case ActKind::Loop:
          // The rule rewrites the form to itself; the derivation can never
          // finish, so stop right here.
          res.status = DeriveStatus::Looping;
          res.loop_cause = LoopCause::LoopRule;
          res.loop_state = state;
          res.loop_goal = goal;
          res.tokens = std::move(form);
          return res;
      }
    }
  }
}

SplitResult split_completed(const DerivationResult& result, const SymbolTable& symbols) {
  if (!result.completed()) throw DomainError("split_completed: derivation is not Completed");
  const auto& tokens = result.tokens;

  size_t tau_pos = tokens.size();
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::Tau) {
      if (tau_pos != tokens.size())
        throw DomainError("split_completed: terminal symbol appears more than once");
      tau_pos = i;
    }
  }
  if (tau_pos == tokens.size())
    throw DomainError("split_completed: no terminal symbol in completed string");

  // Prefix must alternate s g s g ... g tau.
  if (tau_pos % 2 != 0 || tau_pos == 0)
    throw DomainError("split_completed: trajectory prefix does not alternate state/goal");
  for (size_t i = 0; i < tau_pos; ++i) {
    TokenKind want = (i % 2 == 0) ? TokenKind::State : TokenKind::Goal;
    if (tokens[i].kind != want)
      throw DomainError("split_completed: unexpected '" + symbols.token_text(tokens[i]) +
                        "' at position " + std::to_string(i));
  }

  SplitResult out;
  out.trajectory.assign(tokens.begin(), tokens.begin() + tau_pos + 1);
  for (size_t i = tau_pos + 1; i < tokens.size(); ++i) {
    if (tokens[i].kind != TokenKind::State)
      throw DomainError("split_completed: suffix contains a non-state symbol");
    out.reversed_states.push_back(tokens[i].index);
  }
  return out;
}

}  // namespace rhf
