#include "dreamer/behavior/behavior.hpp"

#include <cmath>
#include <stdexcept>

namespace dreamer::behavior {

using namespace dreamer::net;

std::vector<double> lambda_returns(const std::vector<double>& rewards,
                                   const std::vector<double>& values, double gamma,
                                   double lambda) {
  const size_t horizon = rewards.size();
  if (values.size() != horizon + 1)
    throw std::invalid_argument("lambda_returns needs horizon+1 values");
  std::vector<double> returns(horizon);
  double next = values[horizon];
  for (size_t t = horizon; t-- > 0;) {
    next = rewards[t] + gamma * ((1.0 - lambda) * values[t + 1] + lambda * next);
    returns[t] = next;
  }
  return returns;
}

Behavior::Behavior(int feature_dim, ActionSpec action, BehaviorConfig cfg, uint64_t seed)
    : feature_dim_(feature_dim), action_(std::move(action)), cfg_(cfg) {
  Rng rng(seed);
  init_mlp(actor_, "actor", actor_spec(), rng);
  init_mlp(critic_, "critic", critic_spec(), rng);
  Rng target_rng(seed);
  init_mlp(target_, "critic", critic_spec(), target_rng);
  target_.copy_values_from(critic_);
}

net::MlpSpec Behavior::actor_spec() const {
  const int out = action_.kind == ActionSpec::Kind::discrete ? action_.n : 2 * action_.dim;
  return MlpSpec{feature_dim_, cfg_.mlp_layers, cfg_.mlp_units, out, cfg_.layer_norm,
                 /*zero_head=*/true};
}

net::MlpSpec Behavior::critic_spec() const {
  return MlpSpec{feature_dim_, cfg_.mlp_layers, cfg_.mlp_units, 1, cfg_.layer_norm,
                 /*zero_head=*/true};
}

int Behavior::build_actor_head(net::Tape& t, const net::ParamVars& v, int feat) const {
  return mlp_apply(t, v, "actor", actor_spec(), feat);
}

int Behavior::build_critic_head(net::Tape& t, const net::ParamVars& v, int feat) const {
  return sum_last(t, mlp_apply(t, v, "critic", critic_spec(), feat), 1);
}

Action Behavior::sample_action(const LatentState& s, Rng& rng, bool mode) const {
  Tape t;
  auto v = register_params(t, actor_, false);
  std::array<int, 2> fs{t.leaf(&s.h, false), t.leaf(&s.z, false)};
  int head = build_actor_head(t, v, concat_cols(t, fs));

  Action a;
  a.kind = action_.kind;
  if (action_.kind == ActionSpec::Kind::discrete) {
    const Tensor& logits = t.value(head);
    if (mode) {
      int best = 0;
      for (int i = 1; i < action_.n; ++i)
        if (logits.data[static_cast<size_t>(i)] > logits.data[static_cast<size_t>(best)]) best = i;
      a.index = best;
    } else {
      a.index = sample_categorical_row(logits.data.data(), action_.n, rng);
    }
  } else {
    auto sample = squashed_gaussian(t, head, action_.dim, rng, mode);
    const Tensor& value = t.value(sample.action);
    a.values.assign(value.data.begin(), value.data.end());
  }
  return a;
}

LatentState Behavior::subsample_starts(const LatentState& starts, Rng& rng) const {
  if (cfg_.imagine_starts <= 0 || cfg_.imagine_starts >= starts.n()) return starts;
  const int n = cfg_.imagine_starts;
  LatentState out;
  out.h = Tensor({n, starts.h.cols()});
  out.z = Tensor({n, starts.z.cols()});
  for (int i = 0; i < n; ++i) {
    const int src = static_cast<int>(rng.uniform_int64(starts.n()));
    out.h.mat().row(i) = starts.h.mat().row(src);
    out.z.mat().row(i) = starts.z.mat().row(src);
  }
  return out;
}

ImaginedRollout Behavior::imagine(const wm::WorldModel& wm, const LatentState& starts, int horizon,
                                  Rng& rng, bool differentiable) const {
  ImaginedRollout out;
  out.n = starts.n();
  out.horizon = horizon;
  auto tape = std::make_shared<Tape>();
  Tape& t = *tape;
  out.world_vars = register_params(t, wm.params(), false);
  out.actor_vars = register_params(t, actor_, differentiable);
  auto target_vars = register_params(t, target_, false);

  const bool discrete = action_.kind == ActionSpec::Kind::discrete;
  const bool reward_on_origin = wm.config().reward_alignment == "origin";
  const int n = out.n;

  int h = t.constant(starts.h);
  int z = t.constant(starts.z);
  out.h.push_back(starts.h);
  out.z.push_back(starts.z);
  out.rewards = Tensor({horizon, n});
  out.values = Tensor({horizon + 1, n});

  for (int step = 0; step < horizon; ++step) {
    std::array<int, 2> fs{h, z};
    int feat = concat_cols(t, fs);
    int value = build_critic_head(t, target_vars, feat);
    out.id_value.push_back(value);
    std::copy(t.value(value).data.begin(), t.value(value).data.end(),
              out.values.data.begin() + static_cast<size_t>(step) * n);

    int head = build_actor_head(t, out.actor_vars, feat);
    int action_id;
    if (discrete) {
      const Tensor& logits = t.value(head);
      std::vector<int> idx(static_cast<size_t>(n));
      for (int r = 0; r < n; ++r)
        idx[static_cast<size_t>(r)] =
            sample_categorical_row(logits.data.data() + static_cast<size_t>(r) * action_.n,
                                   action_.n, rng);
      action_id = t.constant(one_hot_rows(idx, action_.n));
      out.action_idx.push_back(std::move(idx));
    } else {
      auto sample = squashed_gaussian(t, head, action_.dim, rng, false);
      action_id = sample.action;
      out.id_log_prob.push_back(sample.log_prob);
    }
    out.actions.push_back(t.value(action_id));

    if (reward_on_origin) {
      int reward = wm.build_reward_head(t, out.world_vars, feat);
      out.id_reward.push_back(reward);
      std::copy(t.value(reward).data.begin(), t.value(reward).data.end(),
                out.rewards.data.begin() + static_cast<size_t>(step) * n);
    }

    auto ids = wm.build_prior_step(t, out.world_vars, h, z, action_id, {}, rng);
    h = ids.h;
    z = ids.z;
    out.h.push_back(t.value(h));
    out.z.push_back(t.value(z));

    if (!reward_on_origin) {
      std::array<int, 2> fs_next{h, z};
      int feat_next = concat_cols(t, fs_next);
      int reward = wm.build_reward_head(t, out.world_vars, feat_next);
      out.id_reward.push_back(reward);
      std::copy(t.value(reward).data.begin(), t.value(reward).data.end(),
                out.rewards.data.begin() + static_cast<size_t>(step) * n);
    }
    if (!t.value(h).finite()) throw std::runtime_error("non-finite imagined state");
  }
  std::array<int, 2> fs{h, z};
  int value = build_critic_head(t, target_vars, concat_cols(t, fs));
  out.id_value.push_back(value);
  std::copy(t.value(value).data.begin(), t.value(value).data.end(),
            out.values.data.begin() + static_cast<size_t>(horizon) * n);

  if (differentiable) out.tape = tape;
  return out;
}

net::Tensor Behavior::lambda_returns_batch(const net::Tensor& rewards,
                                           const net::Tensor& values) const {
  const int horizon = rewards.shape[0];
  const int n = rewards.shape[1];
  Tensor returns({horizon, n});
  std::vector<double> r(static_cast<size_t>(horizon)), v(static_cast<size_t>(horizon) + 1);
  for (int col = 0; col < n; ++col) {
    for (int step = 0; step < horizon; ++step)
      r[static_cast<size_t>(step)] = rewards.data[static_cast<size_t>(step) * n + col];
    for (int step = 0; step <= horizon; ++step)
      v[static_cast<size_t>(step)] = values.data[static_cast<size_t>(step) * n + col];
    auto ret = lambda_returns(r, v, cfg_.discount, cfg_.return_lambda);
    for (int step = 0; step < horizon; ++step)
      returns.data[static_cast<size_t>(step) * n + col] = static_cast<float>(ret[static_cast<size_t>(step)]);
  }
  return returns;
}

LossGraph Behavior::critic_loss_graph(const wm::WorldModel& wm, const ImaginedRollout& rollout,
                                      const net::Tensor& returns) const {
  LossGraph g;
  g.tape = std::make_shared<Tape>();
  Tape& t = *g.tape;
  g.world_vars = register_params(t, wm.params(), false);
  g.critic_vars = register_params(t, critic_, true);

  const int horizon = rollout.horizon;
  std::vector<int> preds;
  for (int step = 0; step < horizon; ++step) {
    std::array<int, 2> fs{t.constant(rollout.h[static_cast<size_t>(step)]),
                          t.constant(rollout.z[static_cast<size_t>(step)])};
    preds.push_back(build_critic_head(t, g.critic_vars, concat_cols(t, fs)));
  }
  int pred_all = concat_rows(t, preds);  // [H*N]
  Tensor target({horizon * rollout.n});
  target.data = returns.data;
  g.loss = mean_all(t, square(t, sub(t, pred_all, t.constant(std::move(target)))));
  return g;
}

LossGraph Behavior::actor_loss_discrete_graph(const wm::WorldModel& wm,
                                              const ImaginedRollout& rollout,
                                              const net::Tensor& returns) const {
  LossGraph g;
  g.tape = std::make_shared<Tape>();
  Tape& t = *g.tape;
  g.world_vars = register_params(t, wm.params(), false);
  g.actor_vars = register_params(t, actor_, true);

  const int horizon = rollout.horizon;
  const int n = rollout.n;
  // Baseline v(s_t) inside the stop-gradient: target copy by default, the
  // online critic when configured; either way it enters as plain numbers.
  Tensor baselines = cfg_.baseline_target_critic ? rollout.values
                                                 : eval_critic_values(rollout, critic_);
  std::vector<int> terms;
  for (int step = 0; step < horizon; ++step) {
    std::array<int, 2> fs{t.constant(rollout.h[static_cast<size_t>(step)]),
                          t.constant(rollout.z[static_cast<size_t>(step)])};
    int feat = concat_cols(t, fs);
    int logits = build_actor_head(t, g.actor_vars, feat);
    int log_probs = log_softmax_last(t, logits, action_.n);
    int log_pi = gather_last(t, log_probs, action_.n, rollout.action_idx[static_cast<size_t>(step)]);
    int entropy = categorical_entropy(t, logits, action_.n);

    Tensor adv({n});
    for (int col = 0; col < n; ++col)
      adv.data[static_cast<size_t>(col)] =
          returns.data[static_cast<size_t>(step) * n + col] -
          baselines.data[static_cast<size_t>(step) * n + col];
    int term = add(t, mul(t, log_pi, t.constant(std::move(adv))), scale(t, entropy, cfg_.eta));
    terms.push_back(term);
  }
  g.loss = neg(t, mean_all(t, concat_rows(t, terms)));
  return g;
}

int Behavior::actor_loss_reparam_graph(ImaginedRollout& rollout) const {
  if (!rollout.tape) throw std::logic_error("rollout was not built differentiably");
  Tape& t = *rollout.tape;
  const int horizon = rollout.horizon;

  // Lambda returns as tape nodes so gradients flow through rewards, values,
  // and the dynamics into the sampled actions.
  std::vector<int> ret_ids(static_cast<size_t>(horizon));
  int next = rollout.id_value[static_cast<size_t>(horizon)];
  for (int step = horizon - 1; step >= 0; --step) {
    int mix = add(t, scale(t, rollout.id_value[static_cast<size_t>(step) + 1], 1.0f - cfg_.return_lambda),
                  scale(t, next, cfg_.return_lambda));
    next = add(t, rollout.id_reward[static_cast<size_t>(step)], scale(t, mix, cfg_.discount));
    ret_ids[static_cast<size_t>(step)] = next;
  }
  std::vector<int> terms;
  for (int step = 0; step < horizon; ++step) {
    int entropy = neg(t, rollout.id_log_prob[static_cast<size_t>(step)]);
    terms.push_back(add(t, ret_ids[static_cast<size_t>(step)], scale(t, entropy, cfg_.eta)));
  }
  return neg(t, mean_all(t, concat_rows(t, terms)));
}

net::Tensor Behavior::eval_critic_values(const ImaginedRollout& rollout,
                                         const net::ParamSet& which) const {
  Tape t;
  auto v = register_params(t, which, false);
  Tensor out({static_cast<int>(rollout.h.size()), rollout.n});
  for (size_t step = 0; step < rollout.h.size(); ++step) {
    std::array<int, 2> fs{t.leaf(&rollout.h[step], false), t.leaf(&rollout.z[step], false)};
    int value = build_critic_head(t, v, concat_cols(t, fs));
    std::copy(t.value(value).data.begin(), t.value(value).data.end(),
              out.data.begin() + step * static_cast<size_t>(rollout.n));
  }
  return out;
}

void Behavior::target_update() { target_.copy_values_from(critic_); }

void Behavior::adopt_params(net::ParamSet actor, net::ParamSet critic, net::ParamSet target) {
  auto check = [](const net::ParamSet& incoming, const net::ParamSet& current) {
    if (incoming.tensors().size() != current.tensors().size())
      throw std::runtime_error("checkpoint parameter set does not match the policy");
    for (const auto& [name, tensor] : current.tensors()) {
      if (!incoming.contains(name))
        throw std::runtime_error("checkpoint missing parameter '" + name + "'");
      if (!incoming.at(name).same_shape(tensor))
        throw std::runtime_error("checkpoint shape mismatch for '" + name + "'");
    }
  };
  check(actor, actor_);
  check(critic, critic_);
  check(target, target_);
  actor_ = std::move(actor);
  critic_ = std::move(critic);
  target_ = std::move(target);
}

BehaviorTrainResult Behavior::train_step(const wm::WorldModel& wm, const LatentState& starts,
                                         Rng& rng) {
  BehaviorTrainResult result;
  const bool discrete = action_.kind == ActionSpec::Kind::discrete;
  LatentState entry = subsample_starts(starts, rng);
  ImaginedRollout rollout = imagine(wm, entry, cfg_.horizon, rng, /*differentiable=*/!discrete);
  Tensor returns = lambda_returns_batch(rollout.rewards, rollout.values);

  const int64_t world_version = wm.params().version();

  float actor_loss_value = 0.0f;
  float entropy_mean = 0.0f;
  GradMap actor_grads;
  if (discrete) {
    LossGraph g = actor_loss_discrete_graph(wm, rollout, returns);
    actor_loss_value = g.value();
    if (std::isfinite(actor_loss_value)) {
      g.tape->backward(g.loss);
      actor_grads = harvest_grads(*g.tape, actor_, g.actor_vars);
    }
    // Mean policy entropy for the metrics.
    Tape& t = *g.tape;
    std::array<int, 2> fs{t.constant(rollout.h[0]), t.constant(rollout.z[0])};
    int ent = categorical_entropy(t, build_actor_head(t, g.actor_vars, concat_cols(t, fs)),
                                  action_.n);
    entropy_mean = t.value(mean_all(t, ent)).data[0];
  } else {
    int loss = actor_loss_reparam_graph(rollout);
    actor_loss_value = rollout.tape->value(loss).data[0];
    if (std::isfinite(actor_loss_value)) {
      rollout.tape->backward(loss);
      actor_grads = harvest_grads(*rollout.tape, actor_, rollout.actor_vars);
    }
    double ent = 0.0;
    for (int step = 0; step < rollout.horizon; ++step)
      ent -= rollout.tape->value(rollout.id_log_prob[static_cast<size_t>(step)]).arr().mean();
    entropy_mean = static_cast<float>(ent / rollout.horizon);
    rollout.tape.reset();
  }
  if (actor_grads.empty()) {
    result.error = "non-finite actor loss";
    return result;
  }
  auto actor_step = actor_.adam_step(actor_grads, cfg_.lr, cfg_.adam_eps, cfg_.grad_clip);
  if (!actor_step.applied) {
    result.error = actor_step.error;
    return result;
  }

  LossGraph cg = critic_loss_graph(wm, rollout, returns);
  const float critic_loss_value = cg.value();
  if (!std::isfinite(critic_loss_value)) {
    result.error = "non-finite critic loss";
    return result;
  }
  cg.tape->backward(cg.loss);
  GradMap critic_grads = harvest_grads(*cg.tape, critic_, cg.critic_vars);
  cg.tape.reset();
  auto critic_step = critic_.adam_step(critic_grads, cfg_.lr, cfg_.adam_eps, cfg_.grad_clip);
  if (!critic_step.applied) {
    result.error = critic_step.error;
    return result;
  }
  ++critic_updates_;
  if (critic_updates_ % cfg_.target_interval == 0) target_update();

  if (wm.params().version() != world_version)
    throw std::logic_error("behavior training touched world model parameters");

  result.applied = true;
  result.metrics["behavior/actor_loss"] = actor_loss_value;
  result.metrics["behavior/critic_loss"] = critic_loss_value;
  result.metrics["behavior/entropy"] = entropy_mean;
  result.metrics["behavior/return_mean"] = returns.arr().mean();
  result.metrics["behavior/value_mean"] = rollout.values.arr().mean();
  result.metrics["behavior/actor_grad_norm"] = actor_step.grad_norm;
  result.metrics["behavior/critic_grad_norm"] = critic_step.grad_norm;
  result.metrics["behavior/critic_updates"] = static_cast<float>(critic_updates_);
  return result;
}

}  // namespace dreamer::behavior
