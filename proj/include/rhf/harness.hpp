#pragma once

#include <optional>
#include <span>
#include <string>

#include "rhf/derivation.hpp"
#include "rhf/env.hpp"
#include "rhf/meta.hpp"
#include "rhf/trajectory.hpp"

namespace rhf {

struct RunConfig {
  EnvKind env = EnvKind::Corridor;
  SystemKind system = SystemKind::RhReinforce;
  std::uint64_t seed = 0;
  int episodes = 0;               // 0 -> environment default budget
  int exploration_episodes = -1;  // -1 -> default for (env, system)
  bool learned_controller = false;
  Hyperparams hyper;

  // Fills episode / exploration defaults for the chosen environment.
  RunConfig resolved() const;
  std::string name() const;  // "<env>_<system>_s<seed>_<confighash>"
  std::string describe() const;  // key = value lines
};

int default_episodes(EnvKind env);
int default_exploration_episodes(EnvKind env, SystemKind system);

struct EpisodeLog {
  int episode;
  double ret;
  int meta_decisions;
  bool truncated;
};

struct RunResult {
  RunConfig config;
  std::vector<EpisodeLog> episodes;
  bool aborted = false;
  std::string abort_reason;
  std::unique_ptr<MetaController> meta;  // trained meta controller

  double final_window_mean(int window) const;    // mean return of the last `window` episodes
  double final_moving_average(int window) const; // last value of the moving-average curve
};

// Runs one full training run per Algorithm-style outer loop.
RunResult execute_run(const RunConfig& config);

// One episode: select goals, run the controller per goal, record (s, g, R)
// per decision, and hand the trajectory to the meta controller at the end.
// During exploration episodes goals are uniform random and nothing learns.
EpisodeLog run_episode(int episode_index, Environment& env, MetaController& meta,
                       Controller& controller, bool exploring, std::mt19937_64& explore_rng);

// Runs every config. The parallel path distributes runs over OpenMP threads;
// the serial path is the reference implementation and must produce identical
// results (each run owns its RNG streams, so scheduling cannot matter).
std::vector<RunResult> execute_runs_parallel(std::span<const RunConfig> configs);
std::vector<RunResult> execute_runs_serial(std::span<const RunConfig> configs);

std::vector<double> moving_average(const std::vector<double>& values, int window);

struct AggregateCurve {
  std::vector<double> mean_ma100;
};

// Per-episode mean over runs of each run's 100-episode moving average.
// Aborted runs are skipped.
AggregateCurve aggregate_runs(const std::vector<RunResult>& results, int window = 100);

// File outputs. Run directory: <out_dir>/<config.name()>/ with episodes.csv,
// config.txt and params.txt.
std::string write_run_outputs(const RunResult& result, const std::string& out_dir);
void write_aggregate_csv(const AggregateCurve& curve, const std::string& path);

struct TheoryReport {
  int recurrence = 0;
  std::string grammar_text;
  bool derivation_completed = false;
  bool looping_policy = false;
  std::string trajectory;       // derived state-goal trajectory prefix
  double replay_return = 0.0;   // reward earned replaying it in the environment
  bool replay_matches = false;  // replayed meta states equal the trajectory's
  std::optional<HfWitness> witness;

  std::string to_string() const;
};

// Policy -> grammar -> derivation bridge: extracts the k-recurrent grammar of
// the trained meta controller's argmax policy, derives from the start state,
// replays the derived trajectory in a fresh environment, and checks it for a
// witness that no constrained grammar could generate it. Deterministic
// environments only.
TheoryReport verify_against_theory(MetaController& meta, EnvKind env_kind, int k);

// Controller fates for every (state, goal) pair, probed without a step
// budget in the way.
OutcomeMap probe_controller_outcomes(EnvKind env_kind);

}  // namespace rhf
