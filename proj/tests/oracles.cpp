#include "oracles.hpp"

#include <cmath>
#include <deque>
#include <set>

namespace rhf::test {

int probe_next_state(Environment& env, int state, int action) {
  env.teleport(state);
  return env.step(action).next;
}

int bfs_goal_distance(EnvKind kind, int start, int goal) {
  auto env = make_env(kind, 0, 1000000);
  env->reset();
  std::vector<int> dist(env->state_count(), -1);
  std::deque<int> frontier{start};
  dist[start] = 0;
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < env->action_count(); ++a) {
      int v = probe_next_state(*env, u, a);
      if (env->goal_achieved(goal, u, v)) return dist[u] + 1;
      if (v == env->terminal_state()) continue;  // episode would end here
      if (dist[v] == -1) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return -1;
}

Vec reference_gru_step(const GruCell& cell, const Vec& x, const Vec& h_prev) {
  const int n = cell.hidden_size();
  const int m = cell.input_size();
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    double az = cell.bz[i];
    for (int j = 0; j < m; ++j) az += cell.wz.at(i, j) * x[j];
    for (int j = 0; j < n; ++j) az += cell.uz.at(i, j) * h_prev[j];
    double z = 1.0 / (1.0 + std::exp(-az));
    double ah = cell.bh[i];
    for (int j = 0; j < m; ++j) ah += cell.wh.at(i, j) * x[j];
    for (int j = 0; j < n; ++j) {
      double arj = cell.br[j];
      for (int t = 0; t < m; ++t) arj += cell.wr.at(j, t) * x[t];
      for (int t = 0; t < n; ++t) arj += cell.ur.at(j, t) * h_prev[t];
      double rj = 1.0 / (1.0 + std::exp(-arj));
      ah += cell.uh.at(i, j) * rj * h_prev[j];
    }
    double c = std::tanh(ah);
    out[i] = z * h_prev[i] + (1.0 - z) * c;
  }
  return out;
}

double max_gradient_error(const std::vector<TensorRef>& params,
                          const std::vector<TensorRef>& analytic,
                          const std::function<double()>& scalar_fn, double step) {
  double worst = 0.0;
  for (size_t t = 0; t < params.size(); ++t) {
    Vec& p = *params[t].data;
    const Vec& g = *analytic[t].data;
    for (size_t i = 0; i < p.size(); ++i) {
      double keep = p[i];
      p[i] = keep + step;
      double fp = scalar_fn();
      p[i] = keep - step;
      double fm = scalar_fn();
      p[i] = keep;
      double fd = (fp - fm) / (2.0 * step);
      double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-3});
      double err = std::abs(fd - g[i]) / denom;
      if (std::abs(fd) < 1e-7 && std::abs(g[i]) < 1e-7) err = 0.0;
      worst = std::max(worst, err);
    }
  }
  return worst;
}

namespace {

SymbolTable random_symbols(std::mt19937_64& rng, int& n_states, int& n_goals) {
  n_states = std::uniform_int_distribution<int>(2, 6)(rng);
  n_goals = std::uniform_int_distribution<int>(1, 5)(rng);
  std::vector<std::string> states, goals;
  for (int i = 0; i < n_states; ++i) states.push_back("q" + std::to_string(i));
  for (int i = 0; i < n_goals; ++i) goals.push_back("u" + std::to_string(i));
  return SymbolTable(states, goals, "end");
}

ActRule random_act_rule(std::mt19937_64& rng, int s, int g, int n_states) {
  double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (roll < 0.6)
    return {s, g, ActKind::Return, std::uniform_int_distribution<int>(0, n_states - 1)(rng)};
  if (roll < 0.85) return {s, g, ActKind::Terminate};
  return {s, g, ActKind::Loop};
}

}  // namespace

Grammar random_constrained_grammar(std::mt19937_64& rng) {
  Grammar g;
  int n_states = 0, n_goals = 0;
  g.symbols = random_symbols(rng, n_states, n_goals);
  g.kind = GrammarKind::Constrained;

  int n_starts = std::uniform_int_distribution<int>(1, n_states)(rng);
  std::set<int> starts;
  while (static_cast<int>(starts.size()) < n_starts)
    starts.insert(std::uniform_int_distribution<int>(0, n_states - 1)(rng));
  for (int s : starts) g.start_rules.push_back({s});

  for (int s = 0; s < n_states; ++s)
    g.meta_rules.push_back({s, {}, std::uniform_int_distribution<int>(0, n_goals - 1)(rng)});
  for (int s = 0; s < n_states; ++s)
    for (int gl = 0; gl < n_goals; ++gl) g.act_rules.push_back(random_act_rule(rng, s, gl, n_states));
  return g;
}

Grammar random_recurrent_grammar(std::mt19937_64& rng) {
  Grammar g;
  int n_states = 0, n_goals = 0;
  g.symbols = random_symbols(rng, n_states, n_goals);
  g.kind = GrammarKind::Recurrent;
  g.recurrence = std::uniform_int_distribution<int>(0, 3)(rng);

  int n_starts = std::uniform_int_distribution<int>(1, n_states)(rng);
  std::set<int> starts;
  while (static_cast<int>(starts.size()) < n_starts)
    starts.insert(std::uniform_int_distribution<int>(0, n_states - 1)(rng));
  for (int s : starts) g.start_rules.push_back({s});

  std::set<std::pair<int, std::vector<int>>> used;
  int n_meta = std::uniform_int_distribution<int>(1, 3 * n_states)(rng);
  for (int i = 0; i < n_meta; ++i) {
    int s = std::uniform_int_distribution<int>(0, n_states - 1)(rng);
    int len = std::uniform_int_distribution<int>(0, g.recurrence)(rng);
    std::vector<int> ctx(len);
    for (int& c : ctx) c = std::uniform_int_distribution<int>(0, n_states - 1)(rng);
    if (!used.insert({s, ctx}).second) continue;
    g.meta_rules.push_back(
        {s, std::move(ctx), std::uniform_int_distribution<int>(0, n_goals - 1)(rng)});
  }
  for (int s = 0; s < n_states; ++s)
    for (int gl = 0; gl < n_goals; ++gl) g.act_rules.push_back(random_act_rule(rng, s, gl, n_states));
  return g;
}

bool is_subsequence(const std::vector<int>& pattern, const std::vector<int>& seq) {
  size_t i = 0;
  for (size_t j = 0; j < seq.size() && i < pattern.size(); ++j)
    if (seq[j] == pattern[i]) ++i;
  return i == pattern.size();
}

std::vector<std::vector<double>> value_iteration(
    const std::vector<std::vector<int>>& next_state,
    const std::vector<std::vector<double>>& reward,
    const std::vector<std::vector<bool>>& done, double gamma, int sweeps) {
  size_t S = next_state.size();
  size_t A = next_state[0].size();
  std::vector<std::vector<double>> q(S, std::vector<double>(A, 0.0));
  for (int it = 0; it < sweeps; ++it) {
    for (size_t s = 0; s < S; ++s) {
      for (size_t a = 0; a < A; ++a) {
        double target = reward[s][a];
        if (!done[s][a]) {
          const auto& qn = q[next_state[s][a]];
          target += gamma * *std::max_element(qn.begin(), qn.end());
        }
        q[s][a] = target;
      }
    }
  }
  return q;
}

}  // namespace rhf::test
