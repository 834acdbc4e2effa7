#include <doctest.h>

#include "oracles.hpp"
#include "rhf/derivation.hpp"
#include "rhf/extract.hpp"
#include "rhf/grammar_text.hpp"
#include "rhf/trajectory.hpp"

using namespace rhf;

namespace {

Grammar load_fixture(const std::string& name) {
  return load_grammar_file(std::string(RHF_SOURCE_DIR) + "/data/" + name);
}

std::string derive_text(const Grammar& g, const std::string& start) {
  DerivationResult res = derive(g, g.symbols.require_state(start));
  REQUIRE(res.completed());
  return g.symbols.render(res.tokens);
}

}  // namespace

TEST_SUITE_BEGIN("grammar");

TEST_CASE("corridor single-visit grammar derives its trajectory") {
  Grammar g1 = load_fixture("g1.csg");
  CHECK(validate(g1).ok());
  CHECK(derive_text(g1, "s3") == "s3 g6 s6 g0 s0 s6 s3");

  DerivationResult res = derive(g1, g1.symbols.require_state("s3"));
  CHECK(res.steps == 5);
}

TEST_CASE("corridor double-visit grammar derives its trajectory") {
  Grammar g2 = load_fixture("g2.csg");
  CHECK(g2.kind == GrammarKind::Recurrent);
  CHECK(g2.recurrence == 3);
  CHECK(validate(g2).ok());
  CHECK(derive_text(g2, "s3") == "s3 g6 s6 g5 s5 g6 s6 g0 s0 s6 s5 s6 s3");
}

TEST_CASE("double-visit grammar contexts exceed a smaller recurrence bound") {
  Grammar g2 = load_fixture("g2.csg");
  g2.recurrence = 2;
  ValidationReport report = validate(g2);
  CHECK(!report.ok());  // context s5 s6 s3 is longer than k=2
}

TEST_CASE("validation flags duplicate META rules for a state") {
  Grammar g1 = load_fixture("g1.csg");
  g1.meta_rules.push_back({g1.symbols.require_state("s3"), {}, g1.symbols.require_goal("g1")});
  ValidationReport report = validate(g1);
  CHECK(!report.ok());
  bool found = false;
  for (const auto& v : report.violations) found |= v.clause == "3(b)";
  CHECK(found);
}

TEST_CASE("validation lists every violated clause") {
  SymbolTable sym({"q0", "q1"}, {"u0"}, "end");
  Grammar g;
  g.symbols = sym;
  // No start rule, no META rule for q1, no ACT rule for (q1, u0), two for (q0, u0).
  g.meta_rules.push_back({0, {}, 0});
  g.act_rules.push_back({0, 0, ActKind::Terminate});
  g.act_rules.push_back({0, 0, ActKind::Loop});
  ValidationReport report = validate(g);
  CHECK(report.violations.size() == 4);
}

TEST_CASE("validation warns on overlapping META contexts") {
  Grammar g2 = load_fixture("g2.csg");
  ValidationReport clean = validate(g2);
  CHECK(clean.warnings.empty());
  // Add a rule whose context prefixes an existing one.
  g2.meta_rules.push_back({g2.symbols.require_state("s6"), {}, g2.symbols.require_goal("g1")});
  ValidationReport report = validate(g2);
  CHECK(report.ok());
  CHECK(report.warnings.size() >= 1);
}

TEST_CASE("loop rules stop derivation immediately") {
  Grammar g1 = load_fixture("g1.csg");
  int s3 = g1.symbols.require_state("s3");
  int g6 = g1.symbols.require_goal("g6");
  for (auto& r : g1.act_rules)
    if (r.state == s3 && r.goal == g6) r = {s3, g6, ActKind::Loop};
  DerivationResult res = derive(g1, s3);
  CHECK(res.status == DeriveStatus::Looping);
  CHECK(res.loop_cause == LoopCause::LoopRule);
  CHECK(res.loop_state == s3);
  CHECK(res.loop_goal == g6);
}

TEST_CASE("a state cycle runs out the step budget") {
  SymbolTable sym({"q0", "q1"}, {"u0"}, "end");
  Grammar g;
  g.symbols = sym;
  g.start_rules.push_back({0});
  g.meta_rules.push_back({0, {}, 0});
  g.meta_rules.push_back({1, {}, 0});
  g.act_rules.push_back({0, 0, ActKind::Return, 1});
  g.act_rules.push_back({1, 0, ActKind::Return, 0});
  REQUIRE(validate(g).ok());
  DerivationResult res = derive(g, 0, 100);
  CHECK(res.status == DeriveStatus::Looping);
  CHECK(res.loop_cause == LoopCause::StepBudget);
}

TEST_CASE("missing recurrent context reports Stuck with the history") {
  Grammar g2 = load_fixture("g2.csg");
  // Remove the context-free rule for s3 reached later in a different history:
  // change the start state to s5, whose only rule demands context s6 s3.
  g2.start_rules.clear();
  g2.start_rules.push_back({g2.symbols.require_state("s5")});
  DerivationResult res = derive(g2, g2.symbols.require_state("s5"));
  CHECK(res.status == DeriveStatus::Stuck);
  CHECK(res.stuck_state == g2.symbols.require_state("s5"));
  CHECK(res.missing_context.empty());  // history right of <META> was empty
}

TEST_CASE("derive requires a start rule") {
  Grammar g1 = load_fixture("g1.csg");
  CHECK_THROWS_AS(derive(g1, g1.symbols.require_state("s4")), DomainError);
}

TEST_CASE("split separates the trajectory from the reversed-state suffix") {
  Grammar g2 = load_fixture("g2.csg");
  DerivationResult res = derive(g2, g2.symbols.require_state("s3"));
  SplitResult split = split_completed(res, g2.symbols);
  CHECK(g2.symbols.render(split.trajectory) == "s3 g6 s6 g5 s5 g6 s6 g0 s0");
  std::vector<std::string> suffix;
  for (int s : split.reversed_states) suffix.push_back(g2.symbols.state_name(s));
  CHECK(suffix == std::vector<std::string>{"s6", "s5", "s6", "s3"});

  // Concatenation reproduces the input and the suffix counts META applications.
  CHECK(split.trajectory.size() + split.reversed_states.size() == res.tokens.size());
  CHECK(split.reversed_states.size() == 4);
}

TEST_CASE("split rejects malformed strings") {
  SymbolTable sym({"q0"}, {"u0"}, "end");
  DerivationResult fake;
  fake.status = DeriveStatus::Completed;
  fake.tokens = {state_token(0), state_token(0), tau_token()};
  CHECK_THROWS_AS(split_completed(fake, sym), DomainError);
  fake.tokens = {state_token(0), goal_token(0), state_token(0)};
  CHECK_THROWS_AS(split_completed(fake, sym), DomainError);
}

TEST_CASE("hf_infeasible witnesses") {
  auto w = hf_infeasible(parse_trajectory("s3 g6 s6 g5 s5 g6 s6 g0 s0"));
  REQUIRE(w.has_value());
  CHECK(*w == HfWitness{"s6", "g5", "g0"});

  CHECK(!hf_infeasible(parse_trajectory("s3 g6 s6 g0 s0")).has_value());
  CHECK(!hf_infeasible(parse_trajectory("s g s")).has_value());
  CHECK_THROWS_AS(parse_trajectory("s3 g6"), DomainError);
  CHECK_THROWS_AS(parse_trajectory("   "), DomainError);
}

TEST_CASE("derivation is deterministic") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    Grammar g = test::random_constrained_grammar(rng);
    for (const auto& start : g.start_rules) {
      DerivationResult a = derive(g, start.state);
      DerivationResult b = derive(g, start.state);
      CHECK(a.status == b.status);
      CHECK(a.tokens == b.tokens);
      CHECK(a.steps == b.steps);
    }
  }
}

TEST_CASE("completed strings of random constrained grammars carry no witness") {
  std::mt19937_64 rng(17);
  int completed = 0;
  for (int i = 0; i < 300; ++i) {
    Grammar g = test::random_constrained_grammar(rng);
    REQUIRE(validate(g).ok());
    for (const auto& start : g.start_rules) {
      DerivationResult res = derive(g, start.state);
      if (!res.completed()) continue;
      ++completed;
      SplitResult split = split_completed(res, g.symbols);
      auto witness = hf_infeasible(to_trajectory(split.trajectory, g.symbols));
      CHECK(!witness.has_value());
      // String-shape law: the suffix is the reverse of the states the META
      // rules consumed, i.e. every state of the trajectory except the last.
      std::vector<int> meta_states;
      for (size_t t = 0; t + 1 < split.trajectory.size(); t += 2)
        meta_states.push_back(split.trajectory[t].index);
      std::vector<int> reversed(meta_states.rbegin(), meta_states.rend());
      CHECK(split.reversed_states == reversed);
    }
  }
  CHECK(completed > 100);
}

TEST_CASE("zero-recurrent conversion is derivation-equivalent") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    Grammar g = test::random_constrained_grammar(rng);
    Grammar z = to_zero_recurrent(g);
    CHECK(z.kind == GrammarKind::Recurrent);
    CHECK(z.recurrence == 0);
    CHECK(validate(z).ok());
    for (const auto& start : g.start_rules) {
      DerivationResult a = derive(g, start.state);
      DerivationResult b = derive(z, start.state);
      CHECK(a.status == b.status);
      CHECK(a.tokens == b.tokens);
      CHECK(a.steps == b.steps);
    }
  }
}

TEST_CASE("zero-recurrent conversion rejects invalid grammars") {
  Grammar empty;
  empty.symbols = SymbolTable({"q0"}, {"u0"}, "end");
  CHECK_THROWS_AS(to_zero_recurrent(empty), DomainError);
}

TEST_CASE("grammar text round-trips") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    Grammar g = i % 2 == 0 ? test::random_constrained_grammar(rng)
                           : test::random_recurrent_grammar(rng);
    Grammar back = parse_grammar_text(print_grammar(g));
    CHECK(back.same_rules(g));
  }
}

TEST_CASE("parser reports line numbers") {
  try {
    parse_grammar_text("states q0\ngoals u0\nterminal end\nq0 <META> -> q0 u0 <ACT>\n");
    FAIL("expected a parse error");
  } catch (const GrammarParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse_grammar_text("S -> q0 <META>\n"), GrammarParseError);
}

TEST_CASE("extraction rebuilds the double-visit rules from the optimal policy") {
  Grammar g2 = load_fixture("g2.csg");
  const SymbolTable& sym = g2.symbols;
  int s3 = sym.require_state("s3"), s5 = sym.require_state("s5"), s6 = sym.require_state("s6");
  int gl0 = sym.require_goal("g0"), gl5 = sym.require_goal("g5"), gl6 = sym.require_goal("g6");

  PolicyMap policy{
      {{s3}, gl6},
      {{s6, s3}, gl5},
      {{s5, s6, s3}, gl6},
      {{s6, s5, s6, s3}, gl0},
  };
  OutcomeMap outcomes;
  for (int s = 0; s < sym.state_count(); ++s) {
    for (int gl = 0; gl < sym.goal_count(); ++gl) {
      if (gl == gl0) outcomes[{s, gl}] = {ActKind::Terminate};
      else outcomes[{s, gl}] = {ActKind::Return, gl - 1};  // goal g_j targets state s_j
    }
  }

  Grammar extracted = extract_grammar(sym, policy, outcomes, {s3}, 3);
  CHECK(validate(extracted).ok());
  CHECK(extracted.same_rules(g2));

  // A loop outcome shows up as a Loop rule and derivation reports it.
  outcomes[{s3, gl6}] = {ActKind::Loop};
  Grammar looping = extract_grammar(sym, policy, outcomes, {s3}, 3);
  DerivationResult res = derive(looping, s3);
  CHECK(res.status == DeriveStatus::Looping);
  CHECK(res.loop_cause == LoopCause::LoopRule);
}

TEST_CASE("extraction names the missing history") {
  SymbolTable sym({"q0", "q1"}, {"u0"}, "end");
  PolicyMap policy{{{0}, 0}};
  OutcomeMap outcomes;
  outcomes[{0, 0}] = {ActKind::Return, 1};
  outcomes[{1, 0}] = {ActKind::Terminate};
  CHECK_THROWS_WITH_AS(extract_grammar(sym, policy, outcomes, {0}, 1),
                       doctest::Contains("q1 q0"), DomainError);
}

TEST_CASE("extraction and derivation agree on random policies") {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 100; ++round) {
    int n_states = std::uniform_int_distribution<int>(2, 5)(rng);
    int n_goals = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<std::string> states, goals;
    for (int i = 0; i < n_states; ++i) states.push_back("q" + std::to_string(i));
    for (int i = 0; i < n_goals; ++i) goals.push_back("u" + std::to_string(i));
    SymbolTable sym(states, goals, "end");
    int k = std::uniform_int_distribution<int>(0, 3)(rng);

    OutcomeMap outcomes;
    for (int s = 0; s < n_states; ++s)
      for (int gl = 0; gl < n_goals; ++gl) {
        double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (roll < 0.7)
          outcomes[{s, gl}] = {ActKind::Return,
                               std::uniform_int_distribution<int>(0, n_states - 1)(rng)};
        else
          outcomes[{s, gl}] = {ActKind::Terminate};
      }

    // Total random policy over every possible key, so each rollout is covered.
    PolicyMap policy;
    std::vector<HistoryKey> frontier;
    for (int s = 0; s < n_states; ++s) frontier.push_back({s});
    while (!frontier.empty()) {
      HistoryKey key = frontier.back();
      frontier.pop_back();
      if (policy.count(key)) continue;
      policy[key] = std::uniform_int_distribution<int>(0, n_goals - 1)(rng);
      if (static_cast<int>(key.size()) < k + 1) {
        for (int s = 0; s < n_states; ++s) {
          HistoryKey longer{s};
          longer.insert(longer.end(), key.begin(), key.end());
          // Only histories extended from the key's own head are reachable,
          // but covering extras costs nothing here.
          frontier.push_back(longer);
        }
      }
    }

    int start = std::uniform_int_distribution<int>(0, n_states - 1)(rng);
    Grammar g = extract_grammar(sym, policy, outcomes, {start}, k);
    CHECK(validate(g).ok());

    // Reference rollout of the policy + outcomes.
    std::vector<int> rollout_states{start};
    std::vector<int> rollout_goals;
    std::vector<int> history{start};
    bool terminated = false;
    for (int step = 0; step < 200; ++step) {
      HistoryKey key(history.begin(),
                     history.begin() + std::min<size_t>(history.size(), k + 1));
      int goal = policy.at(key);
      rollout_goals.push_back(goal);
      ControllerFate fate = outcomes.at({key[0], goal});
      if (fate.kind != ActKind::Return) {
        terminated = true;
        break;
      }
      rollout_states.push_back(fate.next_state);
      history.insert(history.begin(), fate.next_state);
    }

    DerivationResult res = derive(g, start);
    if (terminated) {
      REQUIRE(res.completed());
      SplitResult split = split_completed(res, sym);
      // Trajectory prefix states/goals must replay the rollout exactly.
      for (size_t i = 0; i < rollout_goals.size(); ++i) {
        CHECK(split.trajectory[2 * i].index == rollout_states[i]);
        CHECK(split.trajectory[2 * i + 1].index == rollout_goals[i]);
      }
    } else {
      CHECK(res.status == DeriveStatus::Looping);
    }
  }
}

TEST_SUITE_END();
