#include "rhf/symbols.hpp"

namespace rhf {

namespace {

bool reserved_name(const std::string& s) {
  return s == "S" || s == "<META>" || s == "<ACT>" || s == "->";
}

}  // namespace

SymbolTable::SymbolTable(std::vector<std::string> states, std::vector<std::string> goals,
                         std::string terminal)
    : states_(std::move(states)), goals_(std::move(goals)), terminal_(std::move(terminal)) {
  if (terminal_.empty()) throw DomainError("symbol table: terminal symbol must be named");
  auto check = [&](const std::string& name, const char* role) {
    if (name.empty()) throw DomainError(std::string("symbol table: empty ") + role + " name");
    if (reserved_name(name)) throw DomainError("symbol table: '" + name + "' is reserved");
  };
  check(terminal_, "terminal");
  for (int i = 0; i < static_cast<int>(states_.size()); ++i) {
    const auto& name = states_[i];
    check(name, "state");
    if (name == terminal_)
      throw DomainError("symbol table: state '" + name + "' collides with the terminal symbol");
    if (!state_index_.emplace(name, i).second)
      throw DomainError("symbol table: duplicate state '" + name + "'");
  }
  for (int i = 0; i < static_cast<int>(goals_.size()); ++i) {
    const auto& name = goals_[i];
    check(name, "goal");
    if (name == terminal_)
      throw DomainError("symbol table: goal '" + name + "' collides with the terminal symbol");
    if (state_index_.count(name))
      throw DomainError("symbol table: goal '" + name + "' collides with a state symbol");
    if (!goal_index_.emplace(name, i).second)
      throw DomainError("symbol table: duplicate goal '" + name + "'");
  }
}

std::optional<int> SymbolTable::find_state(const std::string& name) const {
  auto it = state_index_.find(name);
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> SymbolTable::find_goal(const std::string& name) const {
  auto it = goal_index_.find(name);
  if (it == goal_index_.end()) return std::nullopt;
  return it->second;
}

int SymbolTable::require_state(const std::string& name) const {
  auto i = find_state(name);
  if (!i) throw DomainError("unknown state symbol '" + name + "'");
  return *i;
}

int SymbolTable::require_goal(const std::string& name) const {
  auto i = find_goal(name);
  if (!i) throw DomainError("unknown goal symbol '" + name + "'");
  return *i;
}

std::string SymbolTable::token_text(const Token& t) const {
  switch (t.kind) {
    case TokenKind::State:
      return state_name(t.index);
    case TokenKind::Goal:
      return goal_name(t.index);
    case TokenKind::Tau:
      return terminal_;
    case TokenKind::Start:
      return "S";
    case TokenKind::Meta:
      return "<META>";
    case TokenKind::Act:
      return "<ACT>";
  }
  return "?";
}

std::string SymbolTable::render(const std::vector<Token>& tokens) const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += token_text(t);
  }
  return out;
}

}  // namespace rhf
