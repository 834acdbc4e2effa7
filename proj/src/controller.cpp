#include "rhf/controller.hpp"

namespace rhf {

namespace {

constexpr int kLeft = 0, kRight = 1;
constexpr int kUp = 0, kDown = 1, kGridLeft = 2, kGridRight = 3;

int corridor_act(int state, int goal) {
  if (goal < 0 || goal > 6 || state < 1 || state > 6)
    throw DomainError("optimal controller: corridor state/goal out of range");
  int target = goal;  // g_i is achieved in s_i
  if (state == target) {
    // Entering the target is required, so step off and come back. For s6 the
    // only neighbor is s5; elsewhere the right neighbor avoids the terminal.
    return state == 6 ? kLeft : kRight;
  }
  return target > state ? kRight : kLeft;
}

int grid_act(int state, int goal) {
  if (state < 0 || state > 24) throw DomainError("optimal controller: grid state out of range");
  int row = state / 5, col = state % 5;
  int trow, tcol;
  switch (goal) {
    case 0: trow = 0; tcol = 0; break;
    case 1: trow = 0; tcol = 4; break;
    case 2: trow = 4; tcol = 0; break;
    case 3: trow = 4; tcol = 4; break;
    case 4:
      // Terminal sits above (0,2); route there, then up.
      if (row == 0 && col == 2) return kUp;
      trow = 0; tcol = 2;
      break;
    default:
      throw DomainError("optimal controller: grid goal out of range");
  }
  if (row == trow && col == tcol) {
    // Re-entry: leave downward (or upward from the bottom row) and return.
    return row < 4 ? kDown : kUp;
  }
  if (col != tcol) return col < tcol ? kGridRight : kGridLeft;
  return row < trow ? kDown : kUp;
}

}  // namespace

int optimal_controller_act(EnvKind kind, int state, int goal) {
  switch (kind) {
    case EnvKind::Corridor:
    case EnvKind::StochasticCorridor:
      return corridor_act(state, goal);
    case EnvKind::Grid:
      return grid_act(state, goal);
  }
  throw DomainError("optimal controller: unknown environment");
}

SubEpisodeOutcome run_controller(Controller& controller, Environment& env, int goal) {
  SubEpisodeOutcome res;
  res.external_reward = 0.0;
  int state = env.current_state();
  while (true) {
    int action = controller.act(env, state, goal);
    StepOutcome out = env.step(action);
    controller.on_transition(env, state, goal, action, out);
    res.external_reward += out.reward;
    ++res.actions;
    res.final_state = out.next;
    if (out.done && !out.truncated) {
      res.kind = SubEpisodeOutcome::Kind::Terminated;
      return res;
    }
    if (env.goal_achieved(goal, state, out.next)) {
      res.kind = SubEpisodeOutcome::Kind::GoalReached;
      return res;
    }
    if (out.done) {
      res.kind = SubEpisodeOutcome::Kind::Truncated;
      return res;
    }
    state = out.next;
  }
}

ActorCriticController::ActorCriticController(const Environment& env, std::uint64_t seed,
                                             double gamma, double learning_rate,
                                             double intrinsic_reward, int hidden1, int hidden2)
    : a1_(hidden1, env.state_count() + env.goal_count(), Activation::Relu),
      a2_(hidden2, hidden1, Activation::Relu),
      a_head_(env.action_count(), hidden2, Activation::Linear),
      v1_(hidden1, env.state_count() + env.goal_count(), Activation::Relu),
      v2_(hidden2, hidden1, Activation::Relu),
      v_head_(1, hidden2, Activation::Linear),
      gamma_(gamma), lr_(learning_rate), intrinsic_(intrinsic_reward), rng_(seed) {
  init_dense(a1_, rng_);
  init_dense(a2_, rng_);
  init_dense(a_head_, rng_);
  init_dense(v1_, rng_);
  init_dense(v2_, rng_);
  init_dense(v_head_, rng_);
}

Vec ActorCriticController::encode(const Environment& env, int state, int goal) const {
  Vec x(env.state_count() + env.goal_count(), 0.0);
  if (state >= 0) x[state] = 1.0;
  x[env.state_count() + goal] = 1.0;
  return x;
}

Vec ActorCriticController::policy_probs(const Environment& env, int state, int goal) const {
  Vec x = encode(env, state, goal);
  return softmax(a_head_.forward(a2_.forward(a1_.forward(x))));
}

double ActorCriticController::value(const Environment& env, int state, int goal) const {
  Vec x = encode(env, state, goal);
  return v_head_.forward(v2_.forward(v1_.forward(x)))[0];
}

int ActorCriticController::act(const Environment& env, int state, int goal) {
  return sample_categorical(policy_probs(env, state, goal), rng_);
}

void ActorCriticController::on_transition(const Environment& env, int prev, int goal, int action,
                                          const StepOutcome& out) {
  double intrinsic = env.goal_achieved(goal, prev, out.next) ? intrinsic_ : 0.0;
  bool terminal = out.done && !out.truncated;
  double v_next = terminal ? 0.0 : value(env, out.next, goal);
  double v_cur = value(env, prev, goal);
  double delta = intrinsic + gamma_ * v_next - v_cur;
  if (!std::isfinite(delta)) throw DomainError("actor-critic: non-finite TD error");

  // Actor: ascend delta * grad(ln pi(a|s,g)).
  {
    Vec x = encode(env, prev, goal);
    Vec z1 = a1_.affine(x);
    Vec y1 = z1;
    for (double& v : y1) v = v > 0 ? v : 0;
    Vec z2 = a2_.affine(y1);
    Vec y2 = z2;
    for (double& v : y2) v = v > 0 ? v : 0;
    Vec logits = a_head_.affine(y2);
    Vec probs = softmax(logits);
    Vec dlogits(probs.size());
    for (size_t i = 0; i < probs.size(); ++i)
      dlogits[i] = ((int)i == action ? 1.0 : 0.0) - probs[i];
    DenseGrad gh(a_head_), g2(a2_), g1(a1_);
    Vec dy2 = dense_backward(a_head_, y2, logits, dlogits, gh);
    Vec dy1 = dense_backward(a2_, y1, z2, dy2, g2);
    dense_backward(a1_, x, z1, dy1, g1);
    double step = lr_ * delta;
    axpy(step, gh.dw.a, a_head_.w.a);
    axpy(step, gh.db, a_head_.b);
    axpy(step, g2.dw.a, a2_.w.a);
    axpy(step, g2.db, a2_.b);
    axpy(step, g1.dw.a, a1_.w.a);
    axpy(step, g1.db, a1_.b);
  }

  // Critic: move along delta * grad(v), which reduces the squared TD error.
  {
    Vec x = encode(env, prev, goal);
    Vec z1 = v1_.affine(x);
    Vec y1 = z1;
    for (double& v : y1) v = v > 0 ? v : 0;
    Vec z2 = v2_.affine(y1);
    Vec y2 = z2;
    for (double& v : y2) v = v > 0 ? v : 0;
    Vec zout = v_head_.affine(y2);
    DenseGrad gh(v_head_), g2(v2_), g1(v1_);
    Vec dy2 = dense_backward(v_head_, y2, zout, {1.0}, gh);
    Vec dy1 = dense_backward(v2_, y1, z2, dy2, g2);
    dense_backward(v1_, x, z1, dy1, g1);
    double step = lr_ * delta;
    axpy(step, gh.dw.a, v_head_.w.a);
    axpy(step, gh.db, v_head_.b);
    axpy(step, g2.dw.a, v2_.w.a);
    axpy(step, g2.db, v2_.b);
    axpy(step, g1.dw.a, v1_.w.a);
    axpy(step, g1.db, v1_.b);
  }
}

std::vector<TensorRef> ActorCriticController::named_tensors() {
  std::vector<TensorRef> out;
  for (auto& [prefix, layer] : std::initializer_list<std::pair<const char*, Dense*>>{
           {"actor.l1", &a1_}, {"actor.l2", &a2_}, {"actor.head", &a_head_},
           {"critic.l1", &v1_}, {"critic.l2", &v2_}, {"critic.head", &v_head_}}) {
    auto ts = dense_tensors(prefix, *layer);
    out.insert(out.end(), ts.begin(), ts.end());
  }
  return out;
}

}  // namespace rhf
