#pragma once

// Test-side oracles, independent of the implementation paths they check.

#include <functional>
#include <random>
#include <vector>

#include "rhf/env.hpp"
#include "rhf/grammar.hpp"
#include "rhf/meta.hpp"
#include "rhf/nn.hpp"

namespace rhf::test {

// Breadth-first search over environment transitions: fewest actions from
// `start` until some transition satisfies the goal. Transitions entering the
// terminal state without satisfying the goal are dead ends. Returns -1 when
// unreachable. Deterministic environments only.
int bfs_goal_distance(EnvKind kind, int start, int goal);

// Transition probe used by the BFS oracle.
int probe_next_state(Environment& env, int state, int action);

// Second, independently written GRU step.
Vec reference_gru_step(const GruCell& cell, const Vec& x, const Vec& h_prev);

// Central finite differences of `scalar_fn` w.r.t. every entry of `params`,
// compared against `analytic` entries. Returns the worst guarded relative
// error over all coordinates.
double max_gradient_error(const std::vector<TensorRef>& params,
                          const std::vector<TensorRef>& analytic,
                          const std::function<double()>& scalar_fn, double step = 1e-5);

// Random valid grammars. Symbols: states q0..q{n-1}, goals u0..u{m-1},
// terminal "end".
Grammar random_constrained_grammar(std::mt19937_64& rng);
Grammar random_recurrent_grammar(std::mt19937_64& rng);

// Plain subsequence test, used against the grid reward condition.
bool is_subsequence(const std::vector<int>& pattern, const std::vector<int>& seq);

// Q-value iteration for a tiny tabular MDP: next_state[s][a], reward[s][a],
// done[s][a]. Returns Q[s][a].
std::vector<std::vector<double>> value_iteration(
    const std::vector<std::vector<int>>& next_state,
    const std::vector<std::vector<double>>& reward,
    const std::vector<std::vector<bool>>& done, double gamma, int sweeps = 10000);

// Meta controller that follows a fixed goal sequence (repeating the last
// entry). Useful for scripted-episode tests.
class FixedSequenceMeta final : public MetaController {
 public:
  explicit FixedSequenceMeta(std::vector<int> goals) : goals_(std::move(goals)) {}

  SystemKind system() const override { return SystemKind::HReinforce; }
  void begin_episode() override { pos_ = 0; }
  int select_goal(int) override { return next(); }
  void begin_greedy() override { pos_ = 0; }
  int greedy_goal(int) override { return next(); }
  std::vector<TensorRef> named_tensors() override { return {}; }

 private:
  int next() {
    int g = goals_[std::min(pos_, goals_.size() - 1)];
    ++pos_;
    return g;
  }

  std::vector<int> goals_;
  size_t pos_ = 0;
};

}  // namespace rhf::test
