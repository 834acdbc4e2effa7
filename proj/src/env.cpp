#include "rhf/env.hpp"

#include <stdexcept>

namespace rhf {

std::string env_kind_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::Corridor: return "corridor";
    case EnvKind::StochasticCorridor: return "stochastic-corridor";
    case EnvKind::Grid: return "grid";
  }
  return "?";
}

EnvKind parse_env_kind(const std::string& name) {
  if (name == "corridor") return EnvKind::Corridor;
  if (name == "stochastic-corridor") return EnvKind::StochasticCorridor;
  if (name == "grid") return EnvKind::Grid;
  throw DomainError("unknown environment '" + name + "'");
}

int Environment::reset() {
  state_ = do_reset();
  steps_ = 0;
  done_ = false;
  return state_;
}

int Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

StepOutcome Environment::step(int action) {
  if (done_) throw std::logic_error("step() on a finished episode");
  if (action < 0 || action >= action_count()) throw std::logic_error("action out of range");
  StepOutcome out = do_step(action);
  ++steps_;
  state_ = out.next;
  if (!out.done && steps_ >= limit_) {
    out.done = true;
    out.truncated = true;
    out.reward = 0.0;
  }
  done_ = out.done;
  return out;
}

bool Environment::goal_achieved(int goal, int prev, int next) const {
  (void)prev;
  return next == goal_target(goal);
}

std::vector<double> Environment::observation(int state) const {
  std::vector<double> obs(state_count(), 0.0);
  if (state >= 0 && state < state_count()) obs[state] = 1.0;
  return obs;
}

SymbolTable Environment::symbol_table() const {
  std::vector<std::string> states;
  for (int s = 0; s < state_count(); ++s)
    if (s != terminal_state()) states.push_back(state_name(s));
  std::vector<std::string> goals;
  for (int g = 0; g < goal_count(); ++g) goals.push_back(goal_name(g));
  return SymbolTable(std::move(states), std::move(goals), state_name(terminal_state()));
}

int Environment::state_to_symbol(int state) const {
  if (state == terminal_state()) throw DomainError("terminal state has no state symbol");
  return state < terminal_state() ? state : state - 1;
}

int Environment::symbol_to_state(int symbol) const {
  return symbol < terminal_state() ? symbol : symbol + 1;
}

void Environment::teleport(int state) {
  if (state < 0 || state >= state_count() || state == terminal_state())
    throw std::logic_error("teleport target out of range");
  reset();
  state_ = state;
}

namespace {

constexpr int kCorridorLeft = 0;
constexpr int kCorridorRight = 1;

// Seven cells s0..s6 left to right; s0 is terminal. A visit to s6 counts only
// when entered from s5. Reaching s0 pays +1 after two or more such visits,
// +0.01 otherwise; running out the 20-step budget pays 0.
class CorridorBase : public Environment {
 public:
  CorridorBase(std::uint64_t seed, int step_limit)
      : Environment(step_limit > 0 ? step_limit : 20, seed) {}

  int state_count() const override { return 7; }
  int action_count() const override { return 2; }
  int goal_count() const override { return 7; }
  int start_state() const override { return 3; }
  int terminal_state() const override { return 0; }
  int goal_target(int goal) const override { return goal; }

  bool goal_achieved(int goal, int prev, int next) const override {
    if (goal == 6) return prev == 5 && next == 6;
    return next == goal;
  }

  std::string state_name(int s) const override { return "s" + std::to_string(s); }
  std::string goal_name(int g) const override { return "g" + std::to_string(g); }

  int s6_visits() const { return s6_visits_; }

 protected:
  int do_reset() override {
    s6_visits_ = 0;
    return start_state();
  }

  StepOutcome finish_move(int next) {
    StepOutcome out;
    out.next = next;
    if (state_ == 5 && next == 6) {
      ++s6_visits_;
      out.events.push_back(6);
    }
    if (next == 0) {
      out.done = true;
      out.reward = s6_visits_ >= 2 ? 1.0 : 0.01;
    }
    return out;
  }

  int s6_visits_ = 0;
};

class Corridor final : public CorridorBase {
 public:
  using CorridorBase::CorridorBase;
  EnvKind kind() const override { return EnvKind::Corridor; }

 protected:
  StepOutcome do_step(int action) override {
    int next;
    if (action == kCorridorRight)
      next = state_ == 6 ? 6 : state_ + 1;  // right move at s6 has no effect
    else
      next = state_ - 1;
    return finish_move(next);
  }
};

// Same layout and rewards as Corridor; a right move lands right or left with
// probability 0.5 each (right at s6 resolving right stays put). Left moves
// are deterministic.
class StochasticCorridor final : public CorridorBase {
 public:
  using CorridorBase::CorridorBase;
  EnvKind kind() const override { return EnvKind::StochasticCorridor; }

 protected:
  StepOutcome do_step(int action) override {
    int next;
    if (action == kCorridorRight) {
      bool right = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < 0.5;
      if (right)
        next = state_ == 6 ? 6 : state_ + 1;
      else
        next = state_ - 1;
    } else {
      next = state_ - 1;
    }
    return finish_move(next);
  }
};

constexpr int kGridUp = 0;
constexpr int kGridDown = 1;
constexpr int kGridLeft = 2;
constexpr int kGridRight = 3;

// 5x5 cells, row-major ids 0..24 plus terminal id 25 above (0,2). Start at
// (0,0); landmarks 1 (0,4), 2 (4,0), 3 (4,4). Off-grid moves are no-ops
// except Up at (0,2), which enters the terminal state. Reward +1 on
// termination when the visit log satisfies grid_reward_condition; 0 in every
// other case, including the 60-action truncation.
class Grid final : public Environment {
 public:
  Grid(std::uint64_t seed, int step_limit) : Environment(step_limit > 0 ? step_limit : 60, seed) {}

  EnvKind kind() const override { return EnvKind::Grid; }
  int state_count() const override { return 26; }
  int action_count() const override { return 4; }
  int goal_count() const override { return 5; }
  int start_state() const override { return 0; }
  int terminal_state() const override { return 25; }

  int goal_target(int goal) const override {
    switch (goal) {
      case 0: return 0;    // start cell
      case 1: return 4;    // landmark 1
      case 2: return 20;   // landmark 2
      case 3: return 24;   // landmark 3
      case 4: return 25;   // terminal
    }
    throw std::logic_error("goal out of range");
  }

  std::string state_name(int s) const override {
    return s == 25 ? "tau" : "s" + std::to_string(s);
  }
  std::string goal_name(int g) const override { return g == 4 ? "gtau" : "g" + std::to_string(g); }

  const std::vector<int>& visit_log() const { return visit_log_; }

 protected:
  int do_reset() override {
    visit_log_.assign(1, 0);  // the initial placement counts as the first arrival at 0
    return start_state();
  }

  StepOutcome do_step(int action) override {
    int row = state_ / 5, col = state_ % 5;
    int next = state_;
    switch (action) {
      case kGridUp:
        if (row == 0 && col == 2) next = 25;
        else if (row > 0) next = state_ - 5;
        break;
      case kGridDown:
        if (row < 4) next = state_ + 5;
        break;
      case kGridLeft:
        if (col > 0) next = state_ - 1;
        break;
      case kGridRight:
        if (col < 4) next = state_ + 1;
        break;
      default:
        throw std::logic_error("action out of range");
    }

    StepOutcome out;
    out.next = next;
    if (next == 25) {
      out.done = true;
      out.reward = grid_reward_condition(visit_log_) ? 1.0 : 0.0;
      return out;
    }
    if (next != state_) {
      int tag = visit_tag(next);
      if (tag >= 0) {
        visit_log_.push_back(tag);
        out.events.push_back(tag);
      }
    }
    return out;
  }

 private:
  static int visit_tag(int cell) {
    switch (cell) {
      case 0: return 0;
      case 4: return 1;
      case 20: return 2;
      case 24: return 3;
    }
    return -1;
  }

  std::vector<int> visit_log_;
};

}  // namespace

std::unique_ptr<Environment> make_env(EnvKind kind, std::uint64_t seed, int step_limit) {
  switch (kind) {
    case EnvKind::Corridor: return std::make_unique<Corridor>(seed, step_limit);
    case EnvKind::StochasticCorridor: return std::make_unique<StochasticCorridor>(seed, step_limit);
    case EnvKind::Grid: return std::make_unique<Grid>(seed, step_limit);
  }
  throw std::logic_error("unknown env kind");
}

bool grid_reward_condition(const std::vector<int>& visit_log) {
  static constexpr int pattern[6] = {1, 0, 2, 0, 3, 0};
  size_t need = 0;
  for (int tag : visit_log) {
    if (need < 6 && tag == pattern[need]) ++need;
  }
  return need == 6;
}

double random_policy_baseline(Environment& env, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw DomainError("random_policy_baseline: episodes must be >= 1");
  env.reset(seed * 0x9e3779b97f4a7c15ULL + 1);
  std::mt19937_64 actions(seed);
  std::uniform_int_distribution<int> pick(0, env.action_count() - 1);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    while (!env.episode_done()) {
      StepOutcome out = env.step(pick(actions));
      total += out.reward;
    }
  }
  return total / episodes;
}

}  // namespace rhf
