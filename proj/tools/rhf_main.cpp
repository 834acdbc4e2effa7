#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "rhf/grammar_text.hpp"
#include "rhf/harness.hpp"

namespace fs = std::filesystem;
using namespace rhf;

namespace {

int default_recurrence(EnvKind env) { return env == EnvKind::Grid ? 6 : 3; }

void add_hyper_options(CLI::App* cmd, Hyperparams& h) {
  cmd->add_option("--learning-rate", h.learning_rate, "Optimizer learning rate");
  cmd->add_option("--gru-units", h.gru_units, "GRU layer width (rh-reinforce)");
  cmd->add_option("--dense1-units", h.dense1_units, "First dense layer width");
  cmd->add_option("--dense2-units", h.dense2_units, "Second dense layer width");
  cmd->add_option("--replay-size", h.replay_size, "Replay buffer capacity (h-dqn)");
  cmd->add_option("--batch-size", h.batch_size, "Replay batch size (h-dqn)");
  cmd->add_option("--target-update-rate", h.target_update_rate, "Target soft-update rate (h-dqn)");
  cmd->add_option("--epsilon-start", h.epsilon_start, "Initial epsilon (h-dqn)");
  cmd->add_option("--epsilon-end", h.epsilon_end, "Final epsilon (h-dqn)");
  cmd->add_option("--epsilon-decay-steps", h.epsilon_decay_steps,
                  "Meta decisions over which epsilon decays (h-dqn)");
  cmd->add_option("--gamma-meta", h.gamma_meta, "Meta-level discount");
  cmd->add_option("--gamma-controller", h.gamma_controller, "Controller discount (learned)");
  cmd->add_option("--intrinsic-reward", h.intrinsic_reward,
                  "Intrinsic reward on goal achievement (learned controller)");
}

std::unique_ptr<MetaController> load_meta(EnvKind env_kind, SystemKind system,
                                          const Hyperparams& hyper, const std::string& params) {
  auto env = make_env(env_kind, 0);
  auto meta = make_meta(system, env->state_count(), env->goal_count(), hyper, 0);
  load_tensors(meta->named_tensors(), params);
  return meta;
}

struct ReplicateStats {
  int runs = 0;
  int aborted = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-trajectory grammars and hierarchical reinforcement learning experiments"};
  app.require_subcommand(1);

  // --- derive ---------------------------------------------------------
  auto* cmd_derive = app.add_subcommand("derive", "Derive a string from a grammar file");
  std::string derive_grammar, derive_start;
  int derive_max_steps = kDefaultMaxDeriveSteps;
  cmd_derive->add_option("--grammar", derive_grammar, "Grammar file")->required();
  cmd_derive->add_option("--start", derive_start, "Start state symbol")->required();
  cmd_derive->add_option("--max-steps", derive_max_steps, "Rule application budget");
  cmd_derive->callback([&] {
    Grammar g = load_grammar_file(derive_grammar);
    DerivationResult res = derive(g, g.symbols.require_state(derive_start), derive_max_steps);
    switch (res.status) {
      case DeriveStatus::Completed:
        std::cout << g.symbols.render(res.tokens) << '\n';
        return;
      case DeriveStatus::Looping:
        if (res.loop_cause == LoopCause::LoopRule)
          throw DomainError("derivation loops on (" + g.symbols.state_name(res.loop_state) +
                            ", " + g.symbols.goal_name(res.loop_goal) + ")");
        throw DomainError("derivation exceeded " + std::to_string(derive_max_steps) +
                          " steps without completing");
      case DeriveStatus::Stuck:
        throw DomainError("derivation stuck: " + res.stuck_reason + " [form: " +
                          g.symbols.render(res.tokens) + "]");
    }
  });

  // --- validate-grammar -----------------------------------------------
  auto* cmd_validate =
      app.add_subcommand("validate-grammar", "Check a grammar file against its definition");
  cmd_validate->alias("validate");
  std::string validate_grammar;
  cmd_validate->add_option("--grammar", validate_grammar, "Grammar file")->required();
  cmd_validate->callback([&] {
    Grammar g = load_grammar_file(validate_grammar);
    ValidationReport report = validate(g);
    std::cout << report.to_string();
    if (!report.ok()) throw DomainError("grammar is invalid");
  });

  // --- check-hf-feasible ------------------------------------------------
  auto* cmd_check = app.add_subcommand(
      "check-hf-feasible", "Look for a state paired with two distinct goals in a trajectory");
  std::string check_trajectory;
  cmd_check->add_option("--trajectory", check_trajectory, "State-goal trajectory text")
      ->required();
  cmd_check->callback([&] {
    TrajectoryString traj = parse_trajectory(check_trajectory);
    auto witness = hf_infeasible(traj);
    if (witness)
      std::cout << "witness (" << witness->state << ", " << witness->goal_a << ", "
                << witness->goal_b << ")\n";
    else
      std::cout << "none\n";
  });

  // --- train -------------------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "Train one system on one environment");
  cmd_train->set_config("--config", "", "Config file with key=value lines");
  std::string train_env = "corridor", train_system = "rh-reinforce",
              train_controller = "optimal", train_out = "runs";
  RunConfig train_cfg;
  bool train_verify = false;
  int train_recurrence = -1;
  cmd_train->add_option("--env", train_env, "corridor|stochastic-corridor|grid");
  cmd_train->add_option("--system", train_system, "rh-reinforce|h-reinforce|h-dqn");
  cmd_train->add_option("--seed", train_cfg.seed, "Run seed");
  cmd_train->add_option("--episodes", train_cfg.episodes, "Training episodes (0 = default)");
  cmd_train->add_option("--exploration-episodes", train_cfg.exploration_episodes,
                        "Uniform-goal episodes before learning (-1 = default)");
  cmd_train->add_option("--controller", train_controller, "optimal|learned");
  cmd_train->add_option("--out-dir", train_out, "Output directory");
  cmd_train->add_flag("--verify-theory", train_verify,
                      "Extract the trained policy's grammar and check it");
  cmd_train->add_option("--recurrence", train_recurrence,
                        "Meta memory length k for --verify-theory (-1 = per-env default)");
  add_hyper_options(cmd_train, train_cfg.hyper);
  cmd_train->callback([&] {
    train_cfg.env = parse_env_kind(train_env);
    train_cfg.system = parse_system_kind(train_system);
    if (train_controller != "optimal" && train_controller != "learned")
      throw CLI::ValidationError("--controller", "must be 'optimal' or 'learned'");
    train_cfg.learned_controller = train_controller == "learned";

    RunResult result = execute_run(train_cfg);
    std::string dir = write_run_outputs(result, train_out);
    if (result.aborted) throw DomainError("run aborted: " + result.abort_reason);
    std::cout << "run " << result.config.name() << ": final ma100 = "
              << result.final_moving_average(100) << ", outputs in " << dir << '\n';

    if (train_verify && result.meta) {
      int k = train_recurrence >= 0 ? train_recurrence : default_recurrence(train_cfg.env);
      TheoryReport report = verify_against_theory(*result.meta, train_cfg.env, k);
      std::ofstream(fs::path(dir) / "theory.txt") << report.to_string();
      std::cout << report.to_string();
    }
  });

  // --- replicate -----------------------------------------------------------
  auto* cmd_rep = app.add_subcommand(
      "replicate", "Run the full experiment suite and write curves, reports and summaries");
  cmd_rep->set_config("--config", "", "Config file with key=value lines");
  std::string rep_out = "replication";
  int rep_seeds = 10;
  int rep_episodes = 0;
  bool rep_serial = false;
  Hyperparams rep_hyper;
  std::vector<std::string> rep_envs{"corridor", "stochastic-corridor", "grid"};
  std::vector<std::string> rep_systems{"rh-reinforce", "h-reinforce", "h-dqn"};
  cmd_rep->add_option("--out-dir", rep_out, "Output directory");
  cmd_rep->add_option("--seeds", rep_seeds, "Number of seeds per (env, system)");
  cmd_rep->add_option("--episodes", rep_episodes, "Episode override for every run (0 = defaults)");
  cmd_rep->add_flag("--serial", rep_serial, "Use the serial reference runner");
  cmd_rep->add_option("--envs", rep_envs, "Environments to include");
  cmd_rep->add_option("--systems", rep_systems, "Systems to include");
  add_hyper_options(cmd_rep, rep_hyper);
  cmd_rep->callback([&] {
    fs::create_directories(rep_out);
    std::ofstream summary(fs::path(rep_out) / "summary.txt");
    ReplicateStats stats;

    for (const auto& env_name : rep_envs) {
      EnvKind env_kind = parse_env_kind(env_name);
      for (const auto& system_name : rep_systems) {
        SystemKind system = parse_system_kind(system_name);
        std::vector<RunConfig> configs(rep_seeds);
        for (int s = 0; s < rep_seeds; ++s) {
          configs[s].env = env_kind;
          configs[s].system = system;
          configs[s].seed = static_cast<std::uint64_t>(s);
          configs[s].episodes = rep_episodes;
          configs[s].hyper = rep_hyper;
        }
        std::vector<RunResult> results =
            rep_serial ? execute_runs_serial(configs) : execute_runs_parallel(configs);

        AggregateCurve curve = aggregate_runs(results);
        write_aggregate_csv(curve, (fs::path(rep_out) / (env_name + "_" + system_name +
                                                         "_aggregate.csv")).string());
        double final_ma_sum = 0.0, final1000_sum = 0.0;
        int used = 0;
        for (auto& r : results) {
          ++stats.runs;
          write_run_outputs(r, rep_out);
          if (r.aborted) {
            ++stats.aborted;
            summary << env_name << ' ' << system_name << " seed " << r.config.seed
                    << " ABORTED: " << r.abort_reason << '\n';
            continue;
          }
          ++used;
          final_ma_sum += r.final_moving_average(100);
          final1000_sum += r.final_window_mean(1000);

          if (env_kind != EnvKind::StochasticCorridor && r.meta) {
            try {
              TheoryReport report =
                  verify_against_theory(*r.meta, env_kind, default_recurrence(env_kind));
              std::ofstream(fs::path(rep_out) / r.config.name() / "theory.txt")
                  << report.to_string();
            } catch (const DomainError& e) {
              std::ofstream(fs::path(rep_out) / r.config.name() / "theory.txt")
                  << "verification failed: " << e.what() << '\n';
            }
          }
        }
        if (used > 0) {
          summary << env_name << ' ' << system_name << ": runs = " << used
                  << ", mean final ma100 = " << final_ma_sum / used
                  << ", mean final-1000 return = " << final1000_sum / used << '\n';
        }
      }

      if (env_kind == EnvKind::StochasticCorridor) {
        auto env = make_env(env_kind, 7);
        double base = random_policy_baseline(*env, 100000, 7);
        summary << env_name << " random-policy baseline (100000 episodes) = " << base
                << "  # final-1000 averaging window is a reporting choice\n";
      }
    }
    summary << "total runs = " << stats.runs << ", aborted = " << stats.aborted << '\n';
    std::cout << "replication outputs written to " << rep_out << '\n';
    if (stats.aborted > 0)
      std::cerr << "warning: " << stats.aborted << " run(s) aborted; see summary.txt\n";
  });

  // --- extract-grammar -------------------------------------------------------
  auto* cmd_extract = app.add_subcommand(
      "extract-grammar", "Extract the grammar of a trained meta controller's argmax policy");
  std::string ex_env = "corridor", ex_system = "rh-reinforce", ex_params, ex_out;
  int ex_recurrence = -1;
  Hyperparams ex_hyper;
  cmd_extract->add_option("--env", ex_env, "Environment");
  cmd_extract->add_option("--system", ex_system, "System");
  cmd_extract->add_option("--params", ex_params, "Checkpoint file (params.txt)")->required();
  cmd_extract->add_option("--recurrence", ex_recurrence, "Meta memory length k (-1 = default)");
  cmd_extract->add_option("--out", ex_out, "Write the grammar here instead of stdout");
  add_hyper_options(cmd_extract, ex_hyper);
  cmd_extract->callback([&] {
    EnvKind env_kind = parse_env_kind(ex_env);
    SystemKind system = parse_system_kind(ex_system);
    int k = ex_recurrence >= 0 ? ex_recurrence : default_recurrence(env_kind);
    auto meta = load_meta(env_kind, system, ex_hyper, ex_params);

    auto env = make_env(env_kind, 0);
    OptimalController controller;
    GreedyRollout rollout = deterministic_policy_map(*meta, *env, controller, k);
    OutcomeMap outcomes = probe_controller_outcomes(env_kind);
    Grammar g = extract_grammar(env->symbol_table(), rollout.policy, outcomes,
                                {env->state_to_symbol(env->start_state())}, k);
    if (ex_out.empty())
      std::cout << print_grammar(g);
    else
      save_grammar_file(g, ex_out);
  });

  // --- verify-theory ---------------------------------------------------------
  auto* cmd_verify = app.add_subcommand(
      "verify-theory", "Grammar-extraction report for a trained meta controller");
  std::string vt_env = "corridor", vt_system = "rh-reinforce", vt_params;
  int vt_recurrence = -1;
  Hyperparams vt_hyper;
  cmd_verify->add_option("--env", vt_env, "Environment");
  cmd_verify->add_option("--system", vt_system, "System");
  cmd_verify->add_option("--params", vt_params, "Checkpoint file (params.txt)")->required();
  cmd_verify->add_option("--recurrence", vt_recurrence, "Meta memory length k (-1 = default)");
  add_hyper_options(cmd_verify, vt_hyper);
  cmd_verify->callback([&] {
    EnvKind env_kind = parse_env_kind(vt_env);
    SystemKind system = parse_system_kind(vt_system);
    int k = vt_recurrence >= 0 ? vt_recurrence : default_recurrence(env_kind);
    auto meta = load_meta(env_kind, system, vt_hyper, vt_params);
    TheoryReport report = verify_against_theory(*meta, env_kind, k);
    std::cout << report.to_string();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
