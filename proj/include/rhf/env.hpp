#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rhf/symbols.hpp"

namespace rhf {

enum class EnvKind : std::uint8_t { Corridor, StochasticCorridor, Grid };

std::string env_kind_name(EnvKind kind);
EnvKind parse_env_kind(const std::string& name);

struct StepOutcome {
  int next = -1;          // state id after the transition
  double reward = 0.0;
  bool done = false;
  bool truncated = false; // implies done
  std::vector<int> events;  // visit tags recorded this step
};

// Episodic environment over integer state ids. One id is the terminal state;
// observations are one-hot over all ids. Instances are single-threaded and
// own their RNG stream.
class Environment {
 public:
  virtual ~Environment() = default;

  int reset();               // start a new episode, RNG stream continues
  int reset(std::uint64_t seed);  // reseed, then reset
  StepOutcome step(int action);   // throws std::logic_error on finished episodes

  virtual EnvKind kind() const = 0;
  virtual int state_count() const = 0;   // includes the terminal state
  virtual int action_count() const = 0;
  virtual int goal_count() const = 0;
  virtual int start_state() const = 0;
  virtual int terminal_state() const = 0;
  // Target state id of a goal (possibly the terminal state).
  virtual int goal_target(int goal) const = 0;
  // Transition-based achievement test: the step prev -> next satisfies the
  // goal. Entering the target is required; standing on it is not enough.
  virtual bool goal_achieved(int goal, int prev, int next) const;

  virtual std::string state_name(int s) const = 0;
  virtual std::string goal_name(int g) const = 0;

  int step_limit() const { return limit_; }
  int current_state() const { return state_; }
  int steps_taken() const { return steps_; }
  bool episode_done() const { return done_; }

  // One-hot observation of a state id; dimension state_count().
  std::vector<double> observation(int state) const;

  // Symbol table over the nonterminal states, the goals, and the terminal
  // symbol; state indices shift to skip the terminal id.
  SymbolTable symbol_table() const;
  int state_to_symbol(int state) const;
  int symbol_to_state(int symbol) const;

  // Restarts the episode bookkeeping at an arbitrary state (sub-episode
  // probing; visit history and step counter are cleared).
  void teleport(int state);

  std::mt19937_64& rng() { return rng_; }

 protected:
  Environment(int step_limit, std::uint64_t seed) : limit_(step_limit), rng_(seed) {}
  virtual int do_reset() = 0;
  virtual StepOutcome do_step(int action) = 0;

  int limit_;
  std::mt19937_64 rng_;
  int state_ = -1;
  int steps_ = 0;
  bool done_ = true;
};

// step_limit 0 keeps the task's own budget (20 for corridors, 60 for Grid).
std::unique_ptr<Environment> make_env(EnvKind kind, std::uint64_t seed, int step_limit = 0);

// True when the visit log contains the landmark/return pattern
// 1, 0, 2, 0, 3, 0 as a subsequence. Tag 0 is the start cell; 1..3 are the
// landmarks. The log records the initial placement and every later arrival.
bool grid_reward_condition(const std::vector<int>& visit_log);

// Mean return of uniformly random primitive actions over `episodes` episodes.
double random_policy_baseline(Environment& env, int episodes, std::uint64_t seed);

}  // namespace rhf
