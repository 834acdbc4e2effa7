#include "rhf/grammar.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace rhf {

namespace {

std::string context_text(const SymbolTable& sym, const std::vector<int>& ctx) {
  if (ctx.empty()) return "(empty)";
  std::string out;
  for (int s : ctx) {
    if (!out.empty()) out += ' ';
    out += sym.state_name(s);
  }
  return out;
}

bool is_prefix(const std::vector<int>& shorter, const std::vector<int>& longer) {
  if (shorter.size() >= longer.size()) return false;
  return std::equal(shorter.begin(), shorter.end(), longer.begin());
}

}  // namespace

void Grammar::canonicalize() {
  std::sort(start_rules.begin(), start_rules.end(),
            [](const StartRule& a, const StartRule& b) { return a.state < b.state; });
  std::sort(meta_rules.begin(), meta_rules.end(), [](const MetaRule& a, const MetaRule& b) {
    if (a.state != b.state) return a.state < b.state;
    if (a.context.size() != b.context.size()) return a.context.size() < b.context.size();
    if (a.context != b.context) return a.context < b.context;
    return a.goal < b.goal;
  });
  std::sort(act_rules.begin(), act_rules.end(), [](const ActRule& a, const ActRule& b) {
    if (a.state != b.state) return a.state < b.state;
    return a.goal < b.goal;
  });
}

bool Grammar::same_rules(const Grammar& other) const {
  Grammar a = *this;
  Grammar b = other;
  a.canonicalize();
  b.canonicalize();
  return a.symbols == b.symbols && a.kind == b.kind && a.recurrence == b.recurrence &&
         a.start_rules == b.start_rules && a.meta_rules == b.meta_rules &&
         a.act_rules == b.act_rules;
}

const MetaRule* Grammar::find_meta(int state, const std::vector<int>& context) const {
  for (const auto& r : meta_rules)
    if (r.state == state && r.context == context) return &r;
  return nullptr;
}

const ActRule* Grammar::find_act(int state, int goal) const {
  for (const auto& r : act_rules)
    if (r.state == state && r.goal == goal) return &r;
  return nullptr;
}

const StartRule* Grammar::find_start(int state) const {
  for (const auto& r : start_rules)
    if (r.state == state) return &r;
  return nullptr;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  if (ok()) {
    out << "valid";
    if (!warnings.empty()) out << " (" << warnings.size() << " warning(s))";
    out << '\n';
  } else {
    out << violations.size() << " violation(s)\n";
  }
  for (const auto& v : violations) out << "violation " << v.clause << ": " << v.message << '\n';
  for (const auto& w : warnings) out << "warning " << w.clause << ": " << w.message << '\n';
  return out.str();
}

ValidationReport validate(const Grammar& g) {
  ValidationReport report;
  const SymbolTable& sym = g.symbols;
  auto violation = [&](const std::string& clause, const std::string& msg) {
    report.violations.push_back({clause, msg});
  };

  auto check_state = [&](int s, const std::string& where) {
    if (s < 0 || s >= sym.state_count()) {
      violation("2", where + ": state index out of range");
      return false;
    }
    return true;
  };
  auto check_goal = [&](int gi, const std::string& where) {
    if (gi < 0 || gi >= sym.goal_count()) {
      violation("2", where + ": goal index out of range");
      return false;
    }
    return true;
  };

  if (g.kind == GrammarKind::Constrained && g.recurrence != 0)
    violation("(kind)", "constrained grammar must have recurrence 0");
  if (g.recurrence < 0) violation("(kind)", "recurrence must be nonnegative");

  // 3(a): one rule per starting state, at least one starting state.
  if (g.start_rules.empty()) violation("3(a)", "grammar has no start rule");
  std::set<int> starts;
  for (const auto& r : g.start_rules) {
    if (!check_state(r.state, "start rule")) continue;
    if (!starts.insert(r.state).second)
      violation("3(a)", "duplicate start rule for state " + sym.state_name(r.state));
  }

  // 3(b): META rules.
  std::map<std::pair<int, std::vector<int>>, int> meta_count;
  for (const auto& r : g.meta_rules) {
    if (!check_state(r.state, "META rule")) continue;
    bool ctx_ok = true;
    for (int c : r.context) ctx_ok = check_state(c, "META rule context") && ctx_ok;
    if (!ctx_ok) continue;
    if (!check_goal(r.goal, "META rule")) continue;
    if (g.kind == GrammarKind::Constrained && !r.context.empty())
      violation("3(b)", "META rule for state " + sym.state_name(r.state) +
                            " carries a context; constrained grammars admit none");
    if (g.kind == GrammarKind::Recurrent &&
        static_cast<int>(r.context.size()) > g.recurrence)
      violation("3(b)", "META rule for state " + sym.state_name(r.state) + " has context [" +
                            context_text(sym, r.context) + "] longer than k=" +
                            std::to_string(g.recurrence));
    ++meta_count[{r.state, r.context}];
  }
  for (const auto& [key, count] : meta_count) {
    if (count > 1)
      violation("3(b)", "state " + sym.state_name(key.first) + " with context [" +
                            context_text(sym, key.second) + "] has " + std::to_string(count) +
                            " META rules; at most one is allowed");
  }
  if (g.kind == GrammarKind::Constrained) {
    for (int s = 0; s < sym.state_count(); ++s) {
      if (!meta_count.count({s, {}}))
        violation("3(b)", "state " + sym.state_name(s) + " has no META rule");
    }
  }

  // Overlapping contexts are legal but make more than one rule applicable to
  // the same derivation history; flag them since longest-match decides.
  {
    std::map<int, std::vector<const MetaRule*>> by_state;
    for (const auto& r : g.meta_rules) by_state[r.state].push_back(&r);
    for (const auto& [s, rules] : by_state) {
      for (size_t i = 0; i < rules.size(); ++i) {
        for (size_t j = 0; j < rules.size(); ++j) {
          if (i == j) continue;
          if (is_prefix(rules[i]->context, rules[j]->context)) {
            report.warnings.push_back(
                {"3(b)", "state " + sym.state_name(s) + ": context [" +
                             context_text(sym, rules[i]->context) + "] is a prefix of [" +
                             context_text(sym, rules[j]->context) +
                             "]; derivation picks the longest match"});
          }
        }
      }
    }
  }

  // 3(c): exactly one ACT rule per (state, goal).
  std::map<std::pair<int, int>, int> act_count;
  for (const auto& r : g.act_rules) {
    if (!check_state(r.state, "ACT rule")) continue;
    if (!check_goal(r.goal, "ACT rule")) continue;
    if (r.kind == ActKind::Return && !check_state(r.next_state, "ACT return target")) continue;
    ++act_count[{r.state, r.goal}];
  }
  for (int s = 0; s < sym.state_count(); ++s) {
    for (int gi = 0; gi < sym.goal_count(); ++gi) {
      auto it = act_count.find({s, gi});
      int n = it == act_count.end() ? 0 : it->second;
      if (n == 0)
        violation("3(c)", "pair (" + sym.state_name(s) + ", " + sym.goal_name(gi) +
                              ") has no ACT rule");
      else if (n > 1)
        violation("3(c)", "pair (" + sym.state_name(s) + ", " + sym.goal_name(gi) + ") has " +
                              std::to_string(n) + " ACT rules");
    }
  }

  return report;
}

Grammar to_zero_recurrent(const Grammar& g) {
  ValidationReport report = validate(g);
  if (!report.ok())
    throw DomainError("to_zero_recurrent: input grammar is invalid:\n" + report.to_string());
  if (g.kind != GrammarKind::Constrained)
    throw DomainError("to_zero_recurrent: input grammar is not constrained");
  Grammar out = g;
  out.kind = GrammarKind::Recurrent;
  out.recurrence = 0;
  return out;
}

}  // namespace rhf
