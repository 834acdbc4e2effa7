#include "rhf/meta.hpp"

#include <algorithm>
#include <cmath>

namespace rhf {

std::string system_kind_name(SystemKind kind) {
  switch (kind) {
    case SystemKind::RhReinforce: return "rh-reinforce";
    case SystemKind::HReinforce: return "h-reinforce";
    case SystemKind::HDqn: return "h-dqn";
  }
  return "?";
}

SystemKind parse_system_kind(const std::string& name) {
  if (name == "rh-reinforce") return SystemKind::RhReinforce;
  if (name == "h-reinforce") return SystemKind::HReinforce;
  if (name == "h-dqn") return SystemKind::HDqn;
  throw DomainError("unknown system '" + name + "'");
}

double EpsilonSchedule::value() const {
  if (steps >= decay_steps) return end;
  return start - (start - end) * static_cast<double>(steps) / static_cast<double>(decay_steps);
}

void ReplayBuffer::push(const ReplayEntry& e) {
  if (entries_.size() < capacity_) {
    entries_.push_back(e);
  } else {
    entries_[cursor_] = e;  // overwrite the oldest entry
    cursor_ = (cursor_ + 1) % capacity_;
  }
}

const ReplayEntry& ReplayBuffer::sample(std::mt19937_64& rng) const {
  std::uniform_int_distribution<size_t> pick(0, entries_.size() - 1);
  return entries_[pick(rng)];
}

namespace {

// Undiscounted-by-default suffix sums of the decision rewards.
Vec returns_per_decision(const std::vector<MetaDecision>& trajectory, double gamma) {
  Vec g(trajectory.size(), 0.0);
  double acc = 0.0;
  for (int t = static_cast<int>(trajectory.size()) - 1; t >= 0; --t) {
    acc = trajectory[t].reward + gamma * acc;
    g[t] = acc;
  }
  return g;
}

}  // namespace

std::unique_ptr<MetaController> make_meta(SystemKind kind, int state_count, int goal_count,
                                          const Hyperparams& hyper, std::uint64_t seed) {
  switch (kind) {
    case SystemKind::RhReinforce:
      return std::make_unique<RhReinforceMeta>(state_count, goal_count, hyper, seed);
    case SystemKind::HReinforce:
      return std::make_unique<HReinforceMeta>(state_count, goal_count, hyper, seed);
    case SystemKind::HDqn:
      return std::make_unique<HDqnMeta>(state_count, goal_count, hyper, seed);
  }
  throw DomainError("unknown system kind");
}

// ---------------------------------------------------------------------------
// Rh-REINFORCE

RhReinforceMeta::RhReinforceMeta(int state_count, int goal_count, const Hyperparams& hyper,
                                 std::uint64_t seed)
    : gru_(hyper.gru_units, state_count),
      head_(goal_count, hyper.gru_units, Activation::Linear),
      opt_(hyper.learning_rate),
      gamma_(hyper.gamma_meta),
      state_count_(state_count),
      rng_(seed),
      hidden_(hyper.gru_units, 0.0),
      eval_hidden_(hyper.gru_units, 0.0) {
  init_gru(gru_, rng_);
  init_dense(head_, rng_);
}

Vec RhReinforceMeta::encode(int state) const {
  Vec x(state_count_, 0.0);
  x[state] = 1.0;
  return x;
}

Vec RhReinforceMeta::advance(const Vec& x) { return gru_forward(gru_, x, hidden_); }

void RhReinforceMeta::begin_episode() {
  std::fill(hidden_.begin(), hidden_.end(), 0.0);
  tape_states_.clear();
  tape_goals_.clear();
}

Vec RhReinforceMeta::goal_probabilities(int state) {
  hidden_ = advance(encode(state));
  return softmax(head_.forward(hidden_));
}

int RhReinforceMeta::select_goal(int state) {
  Vec probs = goal_probabilities(state);
  int goal = sample_categorical(probs, rng_);
  tape_states_.push_back(state);
  tape_goals_.push_back(goal);
  return goal;
}

void RhReinforceMeta::finish_episode(const std::vector<MetaDecision>& trajectory) {
  if (trajectory.empty()) return;
  if (trajectory.size() != tape_states_.size())
    throw DomainError("rh-reinforce: trajectory and tape lengths differ");
  Vec g = returns_per_decision(trajectory, gamma_);
  if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) return;

  const size_t T = tape_states_.size();

  // Recompute the forward pass over the stored state sequence.
  std::vector<GruCache> caches(T);
  std::vector<Vec> probs(T);
  Vec h(gru_.hidden_size(), 0.0);
  for (size_t t = 0; t < T; ++t) {
    caches[t] = gru_forward_cached(gru_, encode(tape_states_[t]), h);
    h = caches[t].h;
    probs[t] = softmax(head_.forward(h));
  }

  // Backpropagation through time of sum_t G_t * ln pi(g_t | history_t).
  GruGrad ggrad(gru_);
  DenseGrad hgrad(head_);
  Vec dh(gru_.hidden_size(), 0.0);
  for (int t = static_cast<int>(T) - 1; t >= 0; --t) {
    Vec dlogits(probs[t].size());
    for (size_t i = 0; i < probs[t].size(); ++i)
      dlogits[i] = g[t] * ((static_cast<int>(i) == tape_goals_[t] ? 1.0 : 0.0) - probs[t][i]);
    outer_acc(dlogits, caches[t].h, hgrad.dw);
    axpy(1.0, dlogits, hgrad.db);
    matvec_t_acc(head_.w, dlogits, dh);
    dh = gru_backward(gru_, caches[t], dh, ggrad);
  }

  auto params = named_tensors();
  auto grads = gru_grad_tensors("gru", ggrad);
  auto hg = dense_grad_tensors("head", hgrad);
  grads.insert(grads.end(), hg.begin(), hg.end());
  opt_.apply(params, grads, UpdateDirection::Ascend);
}

void RhReinforceMeta::begin_greedy() {
  std::fill(eval_hidden_.begin(), eval_hidden_.end(), 0.0);
}

int RhReinforceMeta::greedy_goal(int state) {
  eval_hidden_ = gru_forward(gru_, encode(state), eval_hidden_);
  return argmax(head_.forward(eval_hidden_));
}

std::vector<TensorRef> RhReinforceMeta::named_tensors() {
  auto out = gru_tensors("gru", gru_);
  auto hs = dense_tensors("head", head_);
  out.insert(out.end(), hs.begin(), hs.end());
  return out;
}

// ---------------------------------------------------------------------------
// h-REINFORCE

HReinforceMeta::HReinforceMeta(int state_count, int goal_count, const Hyperparams& hyper,
                               std::uint64_t seed)
    : l1_(hyper.dense1_units, state_count, Activation::Relu),
      l2_(hyper.dense2_units, hyper.dense1_units, Activation::Relu),
      head_(goal_count, hyper.dense2_units, Activation::Linear),
      opt_(hyper.learning_rate),
      gamma_(hyper.gamma_meta),
      state_count_(state_count),
      rng_(seed) {
  init_dense(l1_, rng_);
  init_dense(l2_, rng_);
  init_dense(head_, rng_);
}

Vec HReinforceMeta::encode(int state) const {
  Vec x(state_count_, 0.0);
  x[state] = 1.0;
  return x;
}

Vec HReinforceMeta::goal_probabilities(int state) const {
  return softmax(head_.forward(l2_.forward(l1_.forward(encode(state)))));
}

void HReinforceMeta::begin_episode() {
  tape_states_.clear();
  tape_goals_.clear();
}

int HReinforceMeta::select_goal(int state) {
  int goal = sample_categorical(goal_probabilities(state), rng_);
  tape_states_.push_back(state);
  tape_goals_.push_back(goal);
  return goal;
}

void HReinforceMeta::finish_episode(const std::vector<MetaDecision>& trajectory) {
  if (trajectory.empty()) return;
  if (trajectory.size() != tape_states_.size())
    throw DomainError("h-reinforce: trajectory and tape lengths differ");
  Vec g = returns_per_decision(trajectory, gamma_);
  if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) return;

  DenseGrad g1(l1_), g2(l2_), gh(head_);
  for (size_t t = 0; t < tape_states_.size(); ++t) {
    Vec x = encode(tape_states_[t]);
    Vec z1 = l1_.affine(x);
    Vec y1 = z1;
    for (double& v : y1) v = v > 0 ? v : 0;
    Vec z2 = l2_.affine(y1);
    Vec y2 = z2;
    for (double& v : y2) v = v > 0 ? v : 0;
    Vec logits = head_.affine(y2);
    Vec probs = softmax(logits);
    Vec dlogits(probs.size());
    for (size_t i = 0; i < probs.size(); ++i)
      dlogits[i] = g[t] * ((static_cast<int>(i) == tape_goals_[t] ? 1.0 : 0.0) - probs[i]);
    Vec dy2 = dense_backward(head_, y2, logits, dlogits, gh);
    Vec dy1 = dense_backward(l2_, y1, z2, dy2, g2);
    dense_backward(l1_, x, z1, dy1, g1);
  }

  auto params = named_tensors();
  auto grads = dense_grad_tensors("l1", g1);
  auto g2t = dense_grad_tensors("l2", g2);
  auto ght = dense_grad_tensors("head", gh);
  grads.insert(grads.end(), g2t.begin(), g2t.end());
  grads.insert(grads.end(), ght.begin(), ght.end());
  opt_.apply(params, grads, UpdateDirection::Ascend);
}

int HReinforceMeta::greedy_goal(int state) { return argmax(goal_probabilities(state)); }

std::vector<TensorRef> HReinforceMeta::named_tensors() {
  auto out = dense_tensors("l1", l1_);
  auto l2t = dense_tensors("l2", l2_);
  auto ht = dense_tensors("head", head_);
  out.insert(out.end(), l2t.begin(), l2t.end());
  out.insert(out.end(), ht.begin(), ht.end());
  return out;
}

// ---------------------------------------------------------------------------
// h-DQN meta controller

HDqnMeta::HDqnMeta(int state_count, int goal_count, const Hyperparams& hyper, std::uint64_t seed)
    : l1_(hyper.dense1_units, state_count, Activation::Relu),
      l2_(hyper.dense2_units, hyper.dense1_units, Activation::Relu),
      head_(goal_count, hyper.dense2_units, Activation::Linear),
      opt_(hyper.learning_rate),
      buffer_(hyper.replay_size),
      schedule_{hyper.epsilon_start, hyper.epsilon_end, hyper.epsilon_decay_steps, 0},
      batch_size_(hyper.batch_size),
      gamma_(hyper.gamma_meta),
      target_rate_(hyper.target_update_rate),
      state_count_(state_count),
      rng_(seed) {
  init_dense(l1_, rng_);
  init_dense(l2_, rng_);
  init_dense(head_, rng_);
  t1_ = l1_;
  t2_ = l2_;
  t_head_ = head_;
}

Vec HDqnMeta::encode(int state) const {
  Vec x(state_count_, 0.0);
  x[state] = 1.0;
  return x;
}

Vec HDqnMeta::q_forward(const Dense& l1, const Dense& l2, const Dense& head, int state) const {
  return head.forward(l2.forward(l1.forward(encode(state))));
}

Vec HDqnMeta::q_values(int state) const { return q_forward(l1_, l2_, head_, state); }

Vec HDqnMeta::target_q_values(int state) const { return q_forward(t1_, t2_, t_head_, state); }

int HDqnMeta::select_goal(int state) {
  double eps = schedule_.value();
  schedule_.advance();
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < eps) {
    return std::uniform_int_distribution<int>(0, head_.out_size() - 1)(rng_);
  }
  return argmax(q_values(state));
}

int HDqnMeta::greedy_goal(int state) { return argmax(q_values(state)); }

void HDqnMeta::observe(const MetaDecision& decision, int next_state, bool done) {
  buffer_.push({decision.state, decision.goal, decision.reward, next_state, done});
  if (buffer_.size() >= static_cast<size_t>(batch_size_)) train_batch();
}

void HDqnMeta::train_batch() {
  DenseGrad g1(l1_), g2(l2_), gh(head_);
  const double scale = 1.0 / batch_size_;
  for (int b = 0; b < batch_size_; ++b) {
    const ReplayEntry& e = buffer_.sample(rng_);
    double y = e.reward;
    if (!e.done) {
      Vec tq = target_q_values(e.next_state);
      y += gamma_ * *std::max_element(tq.begin(), tq.end());
    }
    Vec x = encode(e.state);
    Vec z1 = l1_.affine(x);
    Vec y1 = z1;
    for (double& v : y1) v = v > 0 ? v : 0;
    Vec z2 = l2_.affine(y1);
    Vec y2 = z2;
    for (double& v : y2) v = v > 0 ? v : 0;
    Vec q = head_.affine(y2);
    HuberValue hv = huber_loss(q[e.goal], y);
    Vec dq(q.size(), 0.0);
    dq[e.goal] = hv.grad * scale;
    Vec dy2 = dense_backward(head_, y2, q, dq, gh);
    Vec dy1 = dense_backward(l2_, y1, z2, dy2, g2);
    dense_backward(l1_, x, z1, dy1, g1);
  }

  auto params = named_tensors();
  auto grads = dense_grad_tensors("l1", g1);
  auto g2t = dense_grad_tensors("l2", g2);
  auto ght = dense_grad_tensors("head", gh);
  grads.insert(grads.end(), g2t.begin(), g2t.end());
  grads.insert(grads.end(), ght.begin(), ght.end());
  opt_.apply(params, grads, UpdateDirection::Descend);

  // theta_target <- (1 - rate) * theta_target + rate * theta
  auto soft = [&](Dense& target, const Dense& online) {
    for (size_t i = 0; i < target.w.a.size(); ++i)
      target.w.a[i] += target_rate_ * (online.w.a[i] - target.w.a[i]);
    for (size_t i = 0; i < target.b.size(); ++i)
      target.b[i] += target_rate_ * (online.b[i] - target.b[i]);
  };
  soft(t1_, l1_);
  soft(t2_, l2_);
  soft(t_head_, head_);
}

std::vector<TensorRef> HDqnMeta::named_tensors() {
  auto out = dense_tensors("l1", l1_);
  auto l2t = dense_tensors("l2", l2_);
  auto ht = dense_tensors("head", head_);
  out.insert(out.end(), l2t.begin(), l2t.end());
  out.insert(out.end(), ht.begin(), ht.end());
  return out;
}

// ---------------------------------------------------------------------------

GreedyRollout deterministic_policy_map(MetaController& meta, Environment& env,
                                       Controller& controller, int k) {
  if (k < 0) throw DomainError("deterministic_policy_map: k must be nonnegative");
  GreedyRollout out;
  int state = env.reset();
  meta.begin_greedy();
  std::vector<int> history{env.state_to_symbol(state)};

  while (!env.episode_done()) {
    HistoryKey key(history.begin(),
                   history.begin() + std::min<size_t>(history.size(), static_cast<size_t>(k) + 1));
    int goal = meta.greedy_goal(state);
    auto it = out.policy.find(key);
    if (it != out.policy.end()) {
      if (it->second != goal)
        throw DomainError(
            "deterministic_policy_map: two visits to the same length-" +
            std::to_string(key.size()) +
            " history pick different goals; k is too small to express this policy");
      // Same truncated history, same goal: the rollout is cycling through
      // known territory and the episode budget will end it.
    } else {
      out.policy.emplace(key, goal);
    }
    out.meta_states.push_back(state);
    out.goals.push_back(goal);

    SubEpisodeOutcome sub = run_controller(controller, env, goal);
    out.episode_return += sub.external_reward;
    if (sub.kind == SubEpisodeOutcome::Kind::Terminated) {
      out.reached_terminal = true;
      break;
    }
    if (sub.kind == SubEpisodeOutcome::Kind::Truncated) {
      out.looping = true;
      break;
    }
    state = sub.final_state;
    history.insert(history.begin(), env.state_to_symbol(state));
  }
  return out;
}

}  // namespace rhf
