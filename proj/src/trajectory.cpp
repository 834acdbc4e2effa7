#include "rhf/trajectory.hpp"

#include <map>
#include <sstream>

namespace rhf {

std::string TrajectoryString::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

TrajectoryString parse_trajectory(const std::string& text) {
  TrajectoryString traj;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) traj.tokens.push_back(tok);
  if (traj.tokens.empty()) throw DomainError("trajectory: empty string");
  if (traj.tokens.size() % 2 == 0)
    throw DomainError("trajectory: must alternate state/goal and end on a state ('" + text +
                      "' has even length)");
  return traj;
}

TrajectoryString to_trajectory(const std::vector<Token>& tokens, const SymbolTable& symbols) {
  TrajectoryString traj;
  traj.tokens.reserve(tokens.size());
  for (const auto& t : tokens) traj.tokens.push_back(symbols.token_text(t));
  if (traj.tokens.empty() || traj.tokens.size() % 2 == 0)
    throw DomainError("trajectory: token sequence is not a state-goal trajectory");
  return traj;
}

std::optional<HfWitness> hf_infeasible(const TrajectoryString& trajectory) {
  const auto& toks = trajectory.tokens;
  if (toks.empty() || toks.size() % 2 == 0)
    throw DomainError("hf_infeasible: malformed trajectory");
  std::map<std::string, std::string> first_goal;
  for (size_t i = 0; i + 1 < toks.size(); i += 2) {
    const std::string& state = toks[i];
    const std::string& goal = toks[i + 1];
    auto [it, inserted] = first_goal.emplace(state, goal);
    if (!inserted && it->second != goal) return HfWitness{state, it->second, goal};
  }
  return std::nullopt;
}

}  // namespace rhf
