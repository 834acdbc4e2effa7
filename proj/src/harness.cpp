#include "rhf/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rhf/grammar_text.hpp"

namespace rhf {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

int default_episodes(EnvKind env) { return env == EnvKind::Grid ? 20000 : 10000; }

int default_exploration_episodes(EnvKind env, SystemKind system) {
  // The random exploration phase is a Corridor-only feature of the two
  // REINFORCE systems.
  if (env == EnvKind::Corridor && system != SystemKind::HDqn) return 1000;
  return 0;
}

RunConfig RunConfig::resolved() const {
  RunConfig c = *this;
  if (c.episodes <= 0) c.episodes = default_episodes(c.env);
  if (c.exploration_episodes < 0)
    c.exploration_episodes = default_exploration_episodes(c.env, c.system);
  return c;
}

std::string RunConfig::describe() const {
  RunConfig c = resolved();
  std::ostringstream out;
  out << "env = " << env_kind_name(c.env) << '\n'
      << "system = " << system_kind_name(c.system) << '\n'
      << "seed = " << c.seed << '\n'
      << "episodes = " << c.episodes << '\n'
      << "exploration_episodes = " << c.exploration_episodes << '\n'
      << "controller = " << (c.learned_controller ? "learned" : "optimal") << '\n'
      << "gamma_meta = " << c.hyper.gamma_meta << '\n'
      << "gamma_controller = " << c.hyper.gamma_controller << '\n'
      << "intrinsic_reward = " << c.hyper.intrinsic_reward << '\n'
      << "learning_rate = " << c.hyper.learning_rate << '\n'
      << "gru_units = " << c.hyper.gru_units << '\n'
      << "dense1_units = " << c.hyper.dense1_units << '\n'
      << "dense2_units = " << c.hyper.dense2_units << '\n'
      << "replay_size = " << c.hyper.replay_size << '\n'
      << "batch_size = " << c.hyper.batch_size << '\n'
      << "target_update_rate = " << c.hyper.target_update_rate << '\n'
      << "epsilon_start = " << c.hyper.epsilon_start << '\n'
      << "epsilon_end = " << c.hyper.epsilon_end << '\n'
      << "epsilon_decay_steps = " << c.hyper.epsilon_decay_steps << '\n';
  return out.str();
}

std::string RunConfig::name() const {
  RunConfig c = resolved();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%08llx",
                static_cast<unsigned long long>(fnv1a(c.describe()) & 0xffffffffULL));
  return env_kind_name(c.env) + "_" + system_kind_name(c.system) + "_s" +
         std::to_string(c.seed) + "_" + hash;
}

double RunResult::final_window_mean(int window) const {
  if (episodes.empty()) return 0.0;
  size_t n = std::min<size_t>(window, episodes.size());
  double sum = 0.0;
  for (size_t i = episodes.size() - n; i < episodes.size(); ++i) sum += episodes[i].ret;
  return sum / n;
}

double RunResult::final_moving_average(int window) const {
  return final_window_mean(window);
}

EpisodeLog run_episode(int episode_index, Environment& env, MetaController& meta,
                       Controller& controller, bool exploring, std::mt19937_64& explore_rng) {
  if (!exploring) meta.begin_episode();
  int state = env.reset();
  std::vector<MetaDecision> trajectory;

  while (!env.episode_done()) {
    int goal;
    if (exploring)
      goal = std::uniform_int_distribution<int>(0, env.goal_count() - 1)(explore_rng);
    else
      goal = meta.select_goal(state);

    SubEpisodeOutcome sub = run_controller(controller, env, goal);
    MetaDecision decision{state, goal, sub.external_reward};
    trajectory.push_back(decision);

    bool done = env.episode_done();
    if (!exploring)
      meta.observe(decision, done ? -1 : sub.final_state, done);
    state = sub.final_state;
  }
  bool truncated = env.current_state() != env.terminal_state();

  if (!exploring) meta.finish_episode(trajectory);

  double ret = 0.0;
  for (const auto& d : trajectory) ret += d.reward;
  return {episode_index, ret, static_cast<int>(trajectory.size()), truncated};
}

RunResult execute_run(const RunConfig& config) {
  RunResult result;
  result.config = config.resolved();
  const RunConfig& cfg = result.config;
  try {
    std::uint64_t stream = cfg.seed;
    std::uint64_t env_seed = splitmix64(stream);
    std::uint64_t meta_seed = splitmix64(stream);
    std::uint64_t ctrl_seed = splitmix64(stream);
    std::uint64_t explore_seed = splitmix64(stream);

    auto env = make_env(cfg.env, env_seed);
    auto meta = make_meta(cfg.system, env->state_count(), env->goal_count(), cfg.hyper, meta_seed);
    std::unique_ptr<Controller> controller;
    if (cfg.learned_controller)
      controller = std::make_unique<ActorCriticController>(
          *env, ctrl_seed, cfg.hyper.gamma_controller, cfg.hyper.learning_rate,
          cfg.hyper.intrinsic_reward, cfg.hyper.dense1_units, cfg.hyper.dense2_units);
    else
      controller = std::make_unique<OptimalController>();
    std::mt19937_64 explore_rng(explore_seed);

    result.episodes.reserve(cfg.episodes);
    for (int e = 0; e < cfg.episodes; ++e) {
      bool exploring = e < cfg.exploration_episodes;
      result.episodes.push_back(run_episode(e, *env, *meta, *controller, exploring, explore_rng));
    }
    result.meta = std::move(meta);
  } catch (const std::exception& e) {
    result.aborted = true;
    result.abort_reason = e.what();
  }
  return result;
}

std::vector<RunResult> execute_runs_serial(std::span<const RunConfig> configs) {
  std::vector<RunResult> results(configs.size());
  for (size_t i = 0; i < configs.size(); ++i) results[i] = execute_run(configs[i]);
  return results;
}

std::vector<RunResult> execute_runs_parallel(std::span<const RunConfig> configs) {
  std::vector<RunResult> results(configs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(configs.size()); ++i)
    results[i] = execute_run(configs[i]);
  return results;
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<size_t>(window)) sum -= values[i - window];
    size_t n = std::min<size_t>(i + 1, window);
    out[i] = sum / n;
  }
  return out;
}

AggregateCurve aggregate_runs(const std::vector<RunResult>& results, int window) {
  AggregateCurve curve;
  size_t len = 0;
  int used = 0;
  for (const auto& r : results) {
    if (r.aborted) continue;
    len = std::max(len, r.episodes.size());
    ++used;
  }
  if (used == 0 || len == 0) return curve;
  curve.mean_ma100.assign(len, 0.0);
  std::vector<int> counts(len, 0);
  for (const auto& r : results) {
    if (r.aborted) continue;
    std::vector<double> returns(r.episodes.size());
    for (size_t i = 0; i < r.episodes.size(); ++i) returns[i] = r.episodes[i].ret;
    std::vector<double> ma = moving_average(returns, window);
    for (size_t i = 0; i < ma.size(); ++i) {
      curve.mean_ma100[i] += ma[i];
      ++counts[i];
    }
  }
  for (size_t i = 0; i < len; ++i)
    if (counts[i] > 0) curve.mean_ma100[i] /= counts[i];
  return curve;
}

std::string write_run_outputs(const RunResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::path dir = fs::path(out_dir) / result.config.name();
  fs::create_directories(dir);

  {
    std::ofstream csv(dir / "episodes.csv");
    csv << "episode,return,meta_decisions,truncated\n";
    for (const auto& e : result.episodes)
      csv << e.episode << ',' << e.ret << ',' << e.meta_decisions << ',' << (e.truncated ? 1 : 0)
          << '\n';
  }
  {
    std::ofstream cfg(dir / "config.txt");
    cfg << result.config.describe();
    if (result.aborted) cfg << "aborted = " << result.abort_reason << '\n';
  }
  if (result.meta) {
    auto tensors = result.meta->named_tensors();
    save_tensors(tensors, (dir / "params.txt").string());
  }
  return dir.string();
}

void write_aggregate_csv(const AggregateCurve& curve, const std::string& path) {
  std::ofstream csv(path);
  csv << "episode,mean_ma100\n";
  for (size_t i = 0; i < curve.mean_ma100.size(); ++i)
    csv << i << ',' << curve.mean_ma100[i] << '\n';
}

OutcomeMap probe_controller_outcomes(EnvKind env_kind) {
  // A long leash stands in for "no budget"; the optimal controller needs at
  // most a handful of steps per pair in these environments.
  auto env = make_env(env_kind, 0, 1000000);
  if (env_kind == EnvKind::StochasticCorridor)
    throw DomainError("probe_controller_outcomes: deterministic environments only");
  OptimalController controller;
  OutcomeMap outcomes;
  env->reset();
  for (int s = 0; s < env->state_count(); ++s) {
    if (s == env->terminal_state()) continue;
    for (int g = 0; g < env->goal_count(); ++g) {
      env->teleport(s);
      SubEpisodeOutcome sub = run_controller(controller, *env, g);
      ControllerFate fate;
      switch (sub.kind) {
        case SubEpisodeOutcome::Kind::Terminated:
          fate.kind = ActKind::Terminate;
          break;
        case SubEpisodeOutcome::Kind::GoalReached:
          fate.kind = ActKind::Return;
          fate.next_state = env->state_to_symbol(sub.final_state);
          break;
        case SubEpisodeOutcome::Kind::Truncated:
          fate.kind = ActKind::Loop;
          break;
      }
      outcomes[{env->state_to_symbol(s), g}] = fate;
    }
  }
  return outcomes;
}

std::string TheoryReport::to_string() const {
  std::ostringstream out;
  out << "recurrence = " << recurrence << '\n';
  out << "looping_policy = " << (looping_policy ? "yes" : "no") << '\n';
  out << "derivation_completed = " << (derivation_completed ? "yes" : "no") << '\n';
  out << "trajectory = " << trajectory << '\n';
  if (derivation_completed) {
    out << "replay_return = " << replay_return << '\n';
    out << "replay_matches = " << (replay_matches ? "yes" : "no") << '\n';
  }
  if (witness)
    out << "hf_infeasible_witness = (" << witness->state << ", " << witness->goal_a << ", "
        << witness->goal_b << ")\n";
  else
    out << "hf_infeasible_witness = none\n";
  out << "grammar:\n" << grammar_text;
  return out.str();
}

TheoryReport verify_against_theory(MetaController& meta, EnvKind env_kind, int k) {
  TheoryReport report;
  report.recurrence = k;

  auto env = make_env(env_kind, 0);
  OptimalController controller;
  GreedyRollout rollout = deterministic_policy_map(meta, *env, controller, k);
  report.looping_policy = rollout.looping;

  OutcomeMap outcomes = probe_controller_outcomes(env_kind);
  SymbolTable symbols = env->symbol_table();
  Grammar grammar = extract_grammar(symbols, rollout.policy, outcomes,
                                    {env->state_to_symbol(env->start_state())}, k);
  report.grammar_text = print_grammar(grammar);

  DerivationResult derived = derive(grammar, env->state_to_symbol(env->start_state()));
  report.derivation_completed = derived.completed();

  TrajectoryString trajectory;
  if (derived.completed()) {
    SplitResult split = split_completed(derived, symbols);
    trajectory = to_trajectory(split.trajectory, symbols);
  } else {
    // Looping derivations still carry a growing trajectory prefix in the
    // sentential form; check the witness condition on what exists.
    std::vector<Token> prefix;
    for (const auto& t : derived.tokens) {
      if (t.kind == TokenKind::State || t.kind == TokenKind::Goal || t.kind == TokenKind::Tau)
        prefix.push_back(t);
      else
        break;
    }
    if (!prefix.empty() && prefix.back().kind == TokenKind::Goal) prefix.pop_back();
    if (!prefix.empty()) trajectory = to_trajectory(prefix, symbols);
  }
  report.trajectory = trajectory.text();
  if (!trajectory.tokens.empty()) report.witness = hf_infeasible(trajectory);

  if (derived.completed()) {
    // Replay the trajectory's goal sequence and confirm the earned reward.
    auto replay_env = make_env(env_kind, 0);
    int state = replay_env->reset();
    double earned = 0.0;
    bool matches = true;
    const auto& toks = trajectory.tokens;
    for (size_t i = 0; i + 1 < toks.size() && !replay_env->episode_done(); i += 2) {
      if (replay_env->state_name(state) != toks[i]) {
        matches = false;
        break;
      }
      int goal = symbols.require_goal(toks[i + 1]);
      SubEpisodeOutcome sub = run_controller(controller, *replay_env, goal);
      earned += sub.external_reward;
      state = sub.final_state;
    }
    if (matches && !toks.empty() &&
        replay_env->state_name(replay_env->current_state()) != toks.back())
      matches = false;
    report.replay_return = earned;
    report.replay_matches = matches;
  }
  return report;
}

}  // namespace rhf
