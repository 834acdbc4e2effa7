#pragma once

#include <deque>
#include <memory>
#include <string>

#include "rhf/controller.hpp"
#include "rhf/extract.hpp"
#include "rhf/nn.hpp"

namespace rhf {

enum class SystemKind : std::uint8_t { RhReinforce, HReinforce, HDqn };

std::string system_kind_name(SystemKind kind);
SystemKind parse_system_kind(const std::string& name);

// Meta-controller hyperparameters; defaults follow the experiment setup.
struct Hyperparams {
  int gru_units = 64;
  int dense1_units = 16;
  int dense2_units = 32;
  double learning_rate = 1e-3;
  int replay_size = 100000;
  int batch_size = 64;
  double target_update_rate = 0.001;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  long epsilon_decay_steps = 15000;
  double gamma_meta = 1.0;
  double gamma_controller = 0.9;
  double intrinsic_reward = 1.0;
};

// One meta-level step of an episode: the state the meta controller saw, the
// goal it picked, and the external reward accumulated while the controller
// pursued that goal.
struct MetaDecision {
  int state;
  int goal;
  double reward = 0.0;
};

// Linear decay from start to end over decay_steps selections, clamped after.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.01;
  long decay_steps = 15000;
  long steps = 0;

  double value() const;
  void advance() { ++steps; }
};

struct ReplayEntry {
  int state;
  int goal;
  double reward;
  int next_state;  // -1 when the episode ended
  bool done;
};

// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

  void push(const ReplayEntry& e);
  size_t size() const { return entries_.size(); }
  const ReplayEntry& sample(std::mt19937_64& rng) const;
  const ReplayEntry& at(size_t i) const { return entries_[i]; }

 private:
  size_t capacity_;
  size_t cursor_ = 0;
  std::vector<ReplayEntry> entries_;
};

class MetaController {
 public:
  virtual ~MetaController() = default;
  virtual SystemKind system() const = 0;

  virtual void begin_episode() = 0;
  virtual int select_goal(int state) = 0;
  // Called after the controller returns from each decision.
  virtual void observe(const MetaDecision& decision, int next_state, bool done) {
    (void)decision; (void)next_state; (void)done;
  }
  virtual void finish_episode(const std::vector<MetaDecision>& trajectory) {
    (void)trajectory;
  }

  // Deterministic evaluation: begin_greedy resets evaluation memory,
  // greedy_goal advances it and returns the argmax goal. Training state is
  // untouched.
  virtual void begin_greedy() = 0;
  virtual int greedy_goal(int state) = 0;

  virtual std::vector<TensorRef> named_tensors() = 0;
};

std::unique_ptr<MetaController> make_meta(SystemKind kind, int state_count, int goal_count,
                                          const Hyperparams& hyper, std::uint64_t seed);

// Recurrent softmax policy trained by episode-level policy-gradient ascent
// with backpropagation through time.
class RhReinforceMeta final : public MetaController {
 public:
  RhReinforceMeta(int state_count, int goal_count, const Hyperparams& hyper, std::uint64_t seed);

  SystemKind system() const override { return SystemKind::RhReinforce; }
  void begin_episode() override;
  int select_goal(int state) override;
  void finish_episode(const std::vector<MetaDecision>& trajectory) override;
  void begin_greedy() override;
  int greedy_goal(int state) override;
  std::vector<TensorRef> named_tensors() override;

  Vec goal_probabilities(int state);  // advances episode memory, no sampling
  size_t tape_length() const { return tape_states_.size(); }

 private:
  Vec encode(int state) const;
  Vec advance(const Vec& x);

  GruCell gru_;
  Dense head_;
  AdamOptimizer opt_;
  double gamma_;
  int state_count_;
  std::mt19937_64 rng_;

  Vec hidden_;
  std::vector<int> tape_states_;
  std::vector<int> tape_goals_;
  Vec eval_hidden_;
};

// Feedforward softmax policy trained by per-episode policy-gradient ascent.
class HReinforceMeta final : public MetaController {
 public:
  HReinforceMeta(int state_count, int goal_count, const Hyperparams& hyper, std::uint64_t seed);

  SystemKind system() const override { return SystemKind::HReinforce; }
  void begin_episode() override;
  int select_goal(int state) override;
  void finish_episode(const std::vector<MetaDecision>& trajectory) override;
  void begin_greedy() override {}
  int greedy_goal(int state) override;
  std::vector<TensorRef> named_tensors() override;

  Vec goal_probabilities(int state) const;

 private:
  Vec encode(int state) const;

  Dense l1_, l2_, head_;
  AdamOptimizer opt_;
  double gamma_;
  int state_count_;
  std::mt19937_64 rng_;

  std::vector<int> tape_states_;
  std::vector<int> tape_goals_;
};

// One-step Q-learning meta controller with experience replay, a softly
// updated target network, and epsilon-greedy goal selection.
class HDqnMeta final : public MetaController {
 public:
  HDqnMeta(int state_count, int goal_count, const Hyperparams& hyper, std::uint64_t seed);

  SystemKind system() const override { return SystemKind::HDqn; }
  void begin_episode() override {}
  int select_goal(int state) override;
  void observe(const MetaDecision& decision, int next_state, bool done) override;
  void begin_greedy() override {}
  int greedy_goal(int state) override;
  std::vector<TensorRef> named_tensors() override;

  Vec q_values(int state) const;
  Vec target_q_values(int state) const;
  const EpsilonSchedule& schedule() const { return schedule_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  void train_batch();

 private:
  Vec encode(int state) const;
  Vec q_forward(const Dense& l1, const Dense& l2, const Dense& head, int state) const;

  Dense l1_, l2_, head_;
  Dense t1_, t2_, t_head_;
  RmspropOptimizer opt_;
  ReplayBuffer buffer_;
  EpsilonSchedule schedule_;
  int batch_size_;
  double gamma_;
  double target_rate_;
  int state_count_;
  std::mt19937_64 rng_;
};

// Result of rolling out the argmax policy with a fixed controller.
struct GreedyRollout {
  PolicyMap policy;             // symbol-index keyed histories -> goal
  std::vector<int> meta_states; // env state ids at each decision
  std::vector<int> goals;
  bool reached_terminal = false;
  bool looping = false;         // episode budget ran out
  double episode_return = 0.0;
};

// Enumerates the histories reachable under the argmax policy from the
// environment's start state, keyed by at most k+1 states (most recent
// first, symbol indices). Throws DomainError when two visits to the same
// truncated history pick different goals (k too small to express the policy).
GreedyRollout deterministic_policy_map(MetaController& meta, Environment& env,
                                       Controller& controller, int k);

}  // namespace rhf
