#pragma once

#include <memory>

#include "rhf/env.hpp"
#include "rhf/nn.hpp"

namespace rhf {

struct SubEpisodeOutcome {
  enum class Kind : std::uint8_t { GoalReached, Terminated, Truncated };
  Kind kind;
  int final_state = -1;
  double external_reward = 0.0;  // sum of environment rewards during the pursuit
  int actions = 0;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual int act(const Environment& env, int state, int goal) = 0;
  // Learned controllers update here; the fixed controller ignores it.
  virtual void on_transition(const Environment& env, int prev, int goal, int action,
                             const StepOutcome& out) {
    (void)env; (void)prev; (void)goal; (void)action; (void)out;
  }
};

// First action of a shortest path to a transition satisfying the goal
// (intended direction in the stochastic corridor). Throws DomainError when no
// such path exists.
int optimal_controller_act(EnvKind kind, int state, int goal);

class OptimalController final : public Controller {
 public:
  int act(const Environment& env, int state, int goal) override {
    return optimal_controller_act(env.kind(), state, goal);
  }
};

// One-step actor-critic over dense policy/value networks conditioned on
// (state, goal). Trains itself on every transition from the intrinsic
// goal-achievement reward.
class ActorCriticController final : public Controller {
 public:
  ActorCriticController(const Environment& env, std::uint64_t seed, double gamma = 0.9,
                        double learning_rate = 1e-3, double intrinsic_reward = 1.0,
                        int hidden1 = 16, int hidden2 = 32);

  int act(const Environment& env, int state, int goal) override;
  void on_transition(const Environment& env, int prev, int goal, int action,
                     const StepOutcome& out) override;

  Vec policy_probs(const Environment& env, int state, int goal) const;
  double value(const Environment& env, int state, int goal) const;

  std::vector<TensorRef> named_tensors();

 private:
  Vec encode(const Environment& env, int state, int goal) const;

  Dense a1_, a2_, a_head_;
  Dense v1_, v2_, v_head_;
  double gamma_, lr_, intrinsic_;
  std::mt19937_64 rng_;
};

// Algorithm inner loop: take actions until the goal is achieved, the episode
// terminates, or the step budget truncates it, accumulating external reward.
SubEpisodeOutcome run_controller(Controller& controller, Environment& env, int goal);

}  // namespace rhf
