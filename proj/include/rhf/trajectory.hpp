#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhf/symbols.hpp"

namespace rhf {

// A state-goal trajectory "s g s g ... s" as raw symbol text. Roles are
// positional: even positions are states (the last may be the terminal
// symbol), odd positions are goals.
struct TrajectoryString {
  std::vector<std::string> tokens;

  bool operator==(const TrajectoryString&) const = default;
  std::string text() const;
};

// Splits whitespace-separated symbols. Throws DomainError when the result is
// not well formed (empty, or even length).
TrajectoryString parse_trajectory(const std::string& text);

TrajectoryString to_trajectory(const std::vector<Token>& tokens, const SymbolTable& symbols);

struct HfWitness {
  std::string state;
  std::string goal_a;
  std::string goal_b;

  bool operator==(const HfWitness&) const = default;
};

// Looks for a state followed, at two places in the trajectory, by two
// distinct goals. Such a witness proves no constrained grammar generates the
// trajectory; absence of one means the trajectory is within reach of a
// constrained grammar as far as that argument goes. Returns the earliest
// witness in string order.
std::optional<HfWitness> hf_infeasible(const TrajectoryString& trajectory);

}  // namespace rhf
