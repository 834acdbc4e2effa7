#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rhf {

// Error raised by grammar/trajectory/extraction operations on bad input.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

enum class TokenKind : std::uint8_t { State, Goal, Tau, Start, Meta, Act };

// One symbol occurrence in a rule or sentential form. `index` addresses the
// symbol table for State/Goal tokens and is zero otherwise.
struct Token {
  TokenKind kind;
  int index = 0;

  bool operator==(const Token&) const = default;
};

inline Token state_token(int i) { return {TokenKind::State, i}; }
inline Token goal_token(int i) { return {TokenKind::Goal, i}; }
inline Token tau_token() { return {TokenKind::Tau, 0}; }
inline Token start_token() { return {TokenKind::Start, 0}; }
inline Token meta_token() { return {TokenKind::Meta, 0}; }
inline Token act_token() { return {TokenKind::Act, 0}; }

// Terminal alphabet of a goal-trajectory grammar: nonterminal state symbols,
// goal symbols and one distinguished terminal-state symbol. The nonterminal
// set is fixed (S, <META>, <ACT>) and needs no storage.
class SymbolTable {
 public:
  SymbolTable() = default;
  SymbolTable(std::vector<std::string> states, std::vector<std::string> goals,
              std::string terminal);

  int state_count() const { return static_cast<int>(states_.size()); }
  int goal_count() const { return static_cast<int>(goals_.size()); }

  const std::string& state_name(int i) const { return states_.at(i); }
  const std::string& goal_name(int i) const { return goals_.at(i); }
  const std::string& terminal_name() const { return terminal_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& goals() const { return goals_; }

  std::optional<int> find_state(const std::string& name) const;
  std::optional<int> find_goal(const std::string& name) const;
  bool is_terminal_symbol(const std::string& name) const { return name == terminal_; }

  // Requires the state/goal index of a named symbol; throws DomainError.
  int require_state(const std::string& name) const;
  int require_goal(const std::string& name) const;

  std::string token_text(const Token& t) const;
  std::string render(const std::vector<Token>& tokens) const;

  bool operator==(const SymbolTable&) const = default;

 private:
  std::vector<std::string> states_;
  std::vector<std::string> goals_;
  std::string terminal_;
  std::unordered_map<std::string, int> state_index_;
  std::unordered_map<std::string, int> goal_index_;
};

}  // namespace rhf
