#include <doctest.h>

#include <cmath>

#include "dreamer/behavior/behavior.hpp"
#include "test_util.hpp"

using namespace dreamer;
using namespace dreamer::behavior;
using dreamer::testutil::finite_difference;
using dreamer::testutil::grad_rel_error;
using dreamer::testutil::random_tensor;

namespace {

wm::WorldModelConfig tiny_wm_config() {
  wm::WorldModelConfig cfg;
  cfg.rssm = 8;
  cfg.latents = 2;
  cfg.classes = 3;
  cfg.embed = 12;
  cfg.mlp_layers = 2;
  cfg.mlp_units = 12;
  cfg.vec_layers = 1;
  return cfg;
}

BehaviorConfig tiny_behavior_config() {
  BehaviorConfig cfg;
  cfg.mlp_layers = 2;
  cfg.mlp_units = 16;
  cfg.horizon = 4;
  return cfg;
}

SpaceSpec discrete_spec(int n = 4) {
  SpaceSpec spec;
  spec.modalities.push_back({"state", ModalitySpec::Kind::vec, {1}});
  spec.action = ActionSpec::make_discrete(n);
  return spec;
}

SpaceSpec continuous_spec(int dim = 2) {
  SpaceSpec spec;
  spec.modalities.push_back({"state", ModalitySpec::Kind::vec, {1}});
  spec.action = ActionSpec::make_continuous(dim, -1.0f, 1.0f);
  return spec;
}

// Explicit lambda-weighted mixture of n-step returns; the brute-force oracle.
std::vector<double> n_step_mixture(const std::vector<double>& rewards,
                                   const std::vector<double>& values, double gamma,
                                   double lambda) {
  const int horizon = static_cast<int>(rewards.size());
  std::vector<double> out(static_cast<size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const int max_n = horizon - t;
    auto n_step = [&](int n) {
      double g = 0.0;
      double disc = 1.0;
      for (int k = 0; k < n; ++k) {
        g += disc * rewards[static_cast<size_t>(t + k)];
        disc *= gamma;
      }
      return g + disc * values[static_cast<size_t>(t + n)];
    };
    double total = 0.0;
    double weight = 1.0 - lambda;
    double lam_pow = 1.0;
    for (int n = 1; n < max_n; ++n) {
      total += weight * lam_pow * n_step(n);
      lam_pow *= lambda;
    }
    total += lam_pow * n_step(max_n);
    out[static_cast<size_t>(t)] = total;
  }
  return out;
}

bool all_zero(const net::GradMap& grads) {
  for (const auto& [name, g] : grads)
    for (float v : g.data)
      if (v != 0.0f) return false;
  return true;
}

bool any_nonzero(const net::GradMap& grads) { return !all_zero(grads); }

}  // namespace

TEST_CASE("lambda=0 collapses to one-step bootstrap") {
  std::vector<double> r{0.5, -1.0, 2.0};
  std::vector<double> v{9.0, 1.0, 2.0, 3.0};
  auto ret = lambda_returns(r, v, 0.9, 0.0);
  CHECK(ret[0] == doctest::Approx(0.5 + 0.9 * 1.0));
  CHECK(ret[1] == doctest::Approx(-1.0 + 0.9 * 2.0));
  CHECK(ret[2] == doctest::Approx(2.0 + 0.9 * 3.0));
}

TEST_CASE("hand-evaluated two-step recursion") {
  std::vector<double> r{1.0, 1.0};
  std::vector<double> v{0.0, 5.0, 10.0};
  auto ret = lambda_returns(r, v, 0.9, 0.5);
  CHECK(ret[1] == doctest::Approx(10.0));
  CHECK(ret[0] == doctest::Approx(7.75));
  // Cross-check against the explicit mixture.
  auto mix = n_step_mixture(r, v, 0.9, 0.5);
  CHECK(ret[0] == doctest::Approx(mix[0]).epsilon(1e-12));
  CHECK(ret[1] == doctest::Approx(mix[1]).epsilon(1e-12));
}

TEST_CASE("recursion equals the n-step mixture for random inputs") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int horizon = 1 + rng.uniform_int(8);
    std::vector<double> r(static_cast<size_t>(horizon)), v(static_cast<size_t>(horizon) + 1);
    for (auto& x : r) x = rng.uniform(-2.0f, 2.0f);
    for (auto& x : v) x = rng.uniform(-2.0f, 2.0f);
    const double gamma = rng.uniform(0.0f, 1.0f);
    const double lambda = rng.uniform(0.0f, 1.0f);
    auto ret = lambda_returns(r, v, gamma, lambda);
    auto mix = n_step_mixture(r, v, gamma, lambda);
    for (int t = 0; t < horizon; ++t) CHECK(std::abs(ret[static_cast<size_t>(t)] - mix[static_cast<size_t>(t)]) < 1e-6);
  }
}

TEST_CASE("imagine: horizon 0 keeps only the start states") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 3);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 5);
  Rng init(1);
  LatentState starts = world.initial_state(6, init);
  Rng rng(2);
  auto rollout = behavior.imagine(world, starts, 0, rng, false);
  CHECK(rollout.h.size() == 1);
  CHECK(rollout.actions.empty());
  CHECK(rollout.values.shape == std::vector<int>{1, 6});
}

TEST_CASE("imagine: start count carries through as parallel rollouts") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 3);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 5);
  Rng init(1);
  LatentState starts = world.initial_state(32, init);
  Rng rng(2);
  auto rollout = behavior.imagine(world, starts, 5, rng, false);
  CHECK(rollout.n == 32);
  CHECK(rollout.h.size() == 6);
  for (const auto& h : rollout.h) CHECK(h.rows() == 32);
  CHECK(rollout.rewards.shape == std::vector<int>{5, 32});
  CHECK(rollout.values.shape == std::vector<int>{6, 32});
}

TEST_CASE("imagine is deterministic under a fixed rng") {
  SpaceSpec spec = continuous_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 7);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 9);
  Rng init(1);
  LatentState starts = world.initial_state(4, init);
  Rng r1(6), r2(6);
  auto a = behavior.imagine(world, starts, 4, r1, false);
  auto b = behavior.imagine(world, starts, 4, r2, false);
  CHECK(a.rewards.data == b.rewards.data);
  CHECK(a.values.data == b.values.data);
  for (size_t i = 0; i < a.actions.size(); ++i) CHECK(a.actions[i].data == b.actions[i].data);
}

TEST_CASE("critic loss: zero at its own values, offset c gives c^2") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 11);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 13);
  Rng init(1);
  LatentState starts = world.initial_state(5, init);
  Rng rng(3);
  auto rollout = behavior.imagine(world, starts, 4, rng, false);

  // Targets identical to the online critic's own outputs -> zero loss.
  net::Tensor own = behavior.eval_critic_values(rollout, behavior.critic_params());
  net::Tensor targets({rollout.horizon, rollout.n});
  for (int t = 0; t < rollout.horizon; ++t)
    for (int col = 0; col < rollout.n; ++col)
      targets.data[static_cast<size_t>(t) * rollout.n + col] =
          own.data[static_cast<size_t>(t) * rollout.n + col];
  auto zero_graph = behavior.critic_loss_graph(world, rollout, targets);
  CHECK(zero_graph.value() == doctest::Approx(0.0f));

  const float offset = 0.75f;
  for (auto& v : targets.data) v += offset;
  auto offset_graph = behavior.critic_loss_graph(world, rollout, targets);
  CHECK(offset_graph.value() == doctest::Approx(offset * offset).epsilon(1e-4));
}

TEST_CASE("gradient isolation: critic loss never reaches world or actor") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 17);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 19);
  Rng init(1);
  LatentState starts = world.initial_state(5, init);
  Rng rng(4);
  auto rollout = behavior.imagine(world, starts, 4, rng, false);
  net::Tensor returns = behavior.lambda_returns_batch(rollout.rewards, rollout.values);
  returns.arr() += 1.0f;  // freshly initialized heads are zero; force a residual

  auto g = behavior.critic_loss_graph(world, rollout, returns);
  g.tape->backward(g.loss);
  CHECK(all_zero(harvest_grads(*g.tape, world.params(), g.world_vars)));
  CHECK(any_nonzero(harvest_grads(*g.tape, behavior.critic_params(), g.critic_vars)));
  CHECK(g.actor_vars.ids.empty());  // actor parameters are not in the graph at all
}

TEST_CASE("gradient isolation: discrete actor loss leaves the world model untouched") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 23);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 29);
  Rng init(1);
  LatentState starts = world.initial_state(5, init);
  Rng rng(5);
  auto rollout = behavior.imagine(world, starts, 4, rng, false);
  net::Tensor returns = behavior.lambda_returns_batch(rollout.rewards, rollout.values);
  // A non-zero advantage on half the rollouts keeps the Reinforce term live.
  for (size_t i = 0; i < returns.data.size(); i += 2) returns.data[i] += 1.0f;

  auto g = behavior.actor_loss_discrete_graph(world, rollout, returns);
  g.tape->backward(g.loss);
  CHECK(all_zero(harvest_grads(*g.tape, world.params(), g.world_vars)));
  CHECK(any_nonzero(harvest_grads(*g.tape, behavior.actor_params(), g.actor_vars)));
}

TEST_CASE("gradient isolation: reparameterized loss under the frozen-world mask") {
  SpaceSpec spec = continuous_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 31);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 37);
  Rng init(1);
  LatentState starts = world.initial_state(5, init);
  Rng rng(6);
  auto rollout = behavior.imagine(world, starts, 4, rng, true);
  int loss = behavior.actor_loss_reparam_graph(rollout);
  rollout.tape->backward(loss);
  CHECK(all_zero(harvest_grads(*rollout.tape, world.params(), rollout.world_vars)));
  CHECK(any_nonzero(harvest_grads(*rollout.tape, behavior.actor_params(), rollout.actor_vars)));
}

TEST_CASE("stopgrad correctness: critic perturbation moves the loss, not its gradient path") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 41);
  BehaviorConfig cfg = tiny_behavior_config();
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 43);
  Rng init(1);
  LatentState starts = world.initial_state(4, init);
  Rng rng(7);
  auto rollout = behavior.imagine(world, starts, 3, rng, false);
  net::Tensor returns = behavior.lambda_returns_batch(rollout.rewards, rollout.values);

  auto g = behavior.actor_loss_discrete_graph(world, rollout, returns);
  const float base_value = g.value();
  g.tape->backward(g.loss);

  // Perturb the target critic (the baseline inside the stop-gradient): the
  // loss value shifts, but no gradient ever flows into critic parameters.
  for (auto& [name, tensor] : behavior.target_params().tensors())
    if (name.find("head/b") != std::string::npos) tensor.arr() += 0.5f;
  auto rollout2 = rollout;  // same states/actions; only the baseline changed
  rollout2.values.arr() += 0.5f;
  auto g2 = behavior.actor_loss_discrete_graph(world, rollout2, returns);
  CHECK(g2.value() != doctest::Approx(base_value));
  g2.tape->backward(g2.loss);
  CHECK(g2.critic_vars.ids.empty());
  CHECK(g2.world_vars.ids.size() > 0);
  CHECK(all_zero(harvest_grads(*g2.tape, world.params(), g2.world_vars)));
}

TEST_CASE("discrete actor loss: zero advantage and zero eta give zero loss and gradient") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 47);
  BehaviorConfig cfg = tiny_behavior_config();
  cfg.eta = 0.0f;
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 53);
  Rng init(1);
  LatentState starts = world.initial_state(4, init);
  Rng rng(8);
  auto rollout = behavior.imagine(world, starts, 3, rng, false);

  // Returns exactly equal to the baseline -> advantage identically zero.
  net::Tensor returns({rollout.horizon, rollout.n});
  for (int t = 0; t < rollout.horizon; ++t)
    for (int col = 0; col < rollout.n; ++col)
      returns.data[static_cast<size_t>(t) * rollout.n + col] =
          rollout.values.data[static_cast<size_t>(t) * rollout.n + col];

  auto g = behavior.actor_loss_discrete_graph(world, rollout, returns);
  CHECK(g.value() == doctest::Approx(0.0f));
  g.tape->backward(g.loss);
  CHECK(all_zero(harvest_grads(*g.tape, behavior.actor_params(), g.actor_vars)));
}

TEST_CASE("uniform categorical policy contributes eta * ln(n) entropy per step") {
  const int n_actions = 32;
  SpaceSpec spec = discrete_spec(n_actions);
  wm::WorldModel world(spec, tiny_wm_config(), 59);
  BehaviorConfig cfg = tiny_behavior_config();
  cfg.eta = 0.01f;
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 61);
  // Zero-initialized actor head: exactly uniform logits.
  Rng init(1);
  LatentState starts = world.initial_state(4, init);
  Rng rng(9);
  auto rollout = behavior.imagine(world, starts, 3, rng, false);
  net::Tensor returns({rollout.horizon, rollout.n});
  for (int t = 0; t < rollout.horizon; ++t)
    for (int col = 0; col < rollout.n; ++col)
      returns.data[static_cast<size_t>(t) * rollout.n + col] =
          rollout.values.data[static_cast<size_t>(t) * rollout.n + col];
  auto g = behavior.actor_loss_discrete_graph(world, rollout, returns);
  // Advantage is zero, log pi is -ln(n): loss = -eta * ln(n).
  CHECK(g.value() == doctest::Approx(-cfg.eta * std::log(static_cast<float>(n_actions)))
                         .epsilon(1e-4));
}

TEST_CASE("one-step update raises the probability of a rewarded action") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 67);
  BehaviorConfig cfg = tiny_behavior_config();
  cfg.lr = 1e-2f;
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 71);
  Rng init(1);
  LatentState starts = world.initial_state(1, init);
  Rng rng(10);
  auto rollout = behavior.imagine(world, starts, 1, rng, false);
  const int chosen = rollout.action_idx[0][0];

  auto prob_of = [&](int action) {
    LatentState s{rollout.h[0], rollout.z[0]};
    int hits = 0;
    Rng sample_rng(123);
    for (int i = 0; i < 4000; ++i)
      if (behavior.sample_action(s, sample_rng, false).index == action) ++hits;
    return static_cast<double>(hits) / 4000.0;
  };
  const double before = prob_of(chosen);

  net::Tensor returns({1, 1});
  returns.data[0] = rollout.values.data[0] + 5.0f;  // strong positive advantage
  auto g = behavior.actor_loss_discrete_graph(world, rollout, returns);
  g.tape->backward(g.loss);
  auto grads = harvest_grads(*g.tape, behavior.actor_params(), g.actor_vars);
  behavior.actor_params().adam_step(grads, cfg.lr, cfg.adam_eps, cfg.grad_clip);

  CHECK(prob_of(chosen) > before);
}

TEST_CASE("reparam loss: constant objective yields exactly zero actor gradient") {
  SpaceSpec spec = continuous_spec();
  wm::WorldModelConfig wcfg = tiny_wm_config();
  wm::WorldModel world(spec, wcfg, 73);
  // Reward head and critic both all-zero, eta = 0: the objective is constant.
  for (auto& [name, tensor] : world.params().tensors())
    if (name.rfind("reward/", 0) == 0 && name.find("ln_g") == std::string::npos)
      tensor.arr() = 0.0f;
  BehaviorConfig cfg = tiny_behavior_config();
  cfg.eta = 0.0f;
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 79);
  for (auto& [name, tensor] : behavior.target_params().tensors())
    if (name.find("ln_g") == std::string::npos) tensor.arr() = 0.0f;

  Rng init(1);
  LatentState starts = world.initial_state(3, init);
  Rng rng(11);
  auto rollout = behavior.imagine(world, starts, 3, rng, true);
  int loss = behavior.actor_loss_reparam_graph(rollout);
  CHECK(rollout.tape->value(loss).data[0] == doctest::Approx(0.0f));
  rollout.tape->backward(loss);
  CHECK(all_zero(harvest_grads(*rollout.tape, behavior.actor_params(), rollout.actor_vars)));
}

TEST_CASE("reparam gradient matches finite differences on a one-step toy") {
  SpaceSpec spec = continuous_spec(1);
  wm::WorldModelConfig wcfg = tiny_wm_config();
  wm::WorldModel world(spec, wcfg, 83);
  // Constant prior logits keep the categorical samples stable under
  // parameter perturbations, so the pathwise objective is smooth.
  for (auto& [name, tensor] : world.params().tensors())
    if (name.rfind("prior/", 0) == 0 && name.find("ln_g") == std::string::npos)
      tensor.arr() = 0.0f;

  BehaviorConfig cfg = tiny_behavior_config();
  cfg.eta = 1e-3f;
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 89);
  // Non-degenerate actor head so gradients are informative.
  Rng jitter(17);
  for (auto& [name, tensor] : behavior.actor_params().tensors())
    if (name.find("head/") != std::string::npos)
      for (auto& v : tensor.data) v = jitter.uniform(-0.3f, 0.3f);

  Rng init(1);
  LatentState starts = world.initial_state(2, init);

  auto loss_with_actor = [&](const net::ParamSet& actor) {
    Behavior probe(world.config().feature_dim(), spec.action, cfg, 89);
    probe.actor_params().copy_values_from(actor);
    probe.target_params().copy_values_from(behavior.target_params());
    Rng rng(12);
    auto rollout = probe.imagine(world, starts, 1, rng, true);
    int loss = probe.actor_loss_reparam_graph(rollout);
    return static_cast<double>(rollout.tape->value(loss).data[0]);
  };

  Rng rng(12);
  auto rollout = behavior.imagine(world, starts, 1, rng, true);
  int loss = behavior.actor_loss_reparam_graph(rollout);
  rollout.tape->backward(loss);
  auto grads = harvest_grads(*rollout.tape, behavior.actor_params(), rollout.actor_vars);

  // Spot-check a sample of parameter coordinates against central differences.
  Rng pick(21);
  double diff_sq = 0.0, ref_sq = 0.0;
  for (const auto& [name, grad] : grads) {
    for (int probe_i = 0; probe_i < 3; ++probe_i) {
      const size_t idx = static_cast<size_t>(pick.uniform_int(static_cast<int>(grad.data.size())));
      net::ParamSet perturbed_up;
      const double h = 1e-3;
      net::ParamSet copy_up = behavior.actor_params();
      copy_up.at(name).data[idx] += static_cast<float>(h);
      net::ParamSet copy_dn = behavior.actor_params();
      copy_dn.at(name).data[idx] -= static_cast<float>(h);
      const double fd = (loss_with_actor(copy_up) - loss_with_actor(copy_dn)) / (2.0 * h);
      const double d = fd - grad.data[idx];
      diff_sq += d * d;
      ref_sq += fd * fd;
    }
  }
  CHECK(std::sqrt(diff_sq / std::max(ref_sq, 1e-20)) < 1e-2);
}

TEST_CASE("target critic: exact copy on update, frozen in between") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 97);
  BehaviorConfig cfg = tiny_behavior_config();
  cfg.target_interval = 3;
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 101);
  Rng init(1);
  LatentState starts = world.initial_state(6, init);

  auto target_snapshot = [&] {
    std::map<std::string, net::FloatVec> snap;
    for (const auto& [name, tensor] : behavior.target_params().tensors()) snap[name] = tensor.data;
    return snap;
  };

  auto before = target_snapshot();
  Rng rng(13);
  auto r1 = behavior.train_step(world, starts, rng);
  REQUIRE(r1.applied);
  auto r2 = behavior.train_step(world, starts, rng);
  REQUIRE(r2.applied);
  // Two critic updates happened, interval is 3: target unchanged.
  CHECK(target_snapshot() == before);

  auto r3 = behavior.train_step(world, starts, rng);
  REQUIRE(r3.applied);
  CHECK(behavior.critic_updates() == 3);
  // Third update crossed the interval: target now equals the online critic.
  for (const auto& [name, tensor] : behavior.critic_params().tensors())
    CHECK(behavior.target_params().at(name).data == tensor.data);

  // And the copy agrees pointwise on random features.
  Rng probe_rng(14);
  LatentState s = world.initial_state(3, probe_rng);
  auto online = behavior.eval_critic_values(
      ImaginedRollout{3, 0, {s.h}, {s.z}, {}, {}, net::Tensor({1, 3}), net::Tensor({1, 3})},
      behavior.critic_params());
  auto target = behavior.eval_critic_values(
      ImaginedRollout{3, 0, {s.h}, {s.z}, {}, {}, net::Tensor({1, 3}), net::Tensor({1, 3})},
      behavior.target_params());
  CHECK(online.data == target.data);
}

TEST_CASE("train_step leaves world parameters untouched and reports metrics") {
  SpaceSpec spec = discrete_spec();
  wm::WorldModel world(spec, tiny_wm_config(), 103);
  Behavior behavior(world.config().feature_dim(), spec.action, tiny_behavior_config(), 107);
  Rng init(1);
  LatentState starts = world.initial_state(8, init);

  auto world_before = world.params().tensors();
  Rng rng(15);
  auto result = behavior.train_step(world, starts, rng);
  REQUIRE(result.applied);
  for (const auto& [name, tensor] : world.params().tensors())
    CHECK(tensor.data == world_before.at(name).data);
  CHECK(result.metrics.count("behavior/actor_loss") == 1);
  CHECK(result.metrics.count("behavior/critic_loss") == 1);
  CHECK(result.metrics.count("behavior/entropy") == 1);
  CHECK(result.metrics.count("behavior/return_mean") == 1);
  CHECK(result.metrics.at("behavior/entropy") >= 0.0f);
}

namespace {

// Hand-wired world model where the reward depends only on the previous
// action: candidate units mirror the one-hot action, and the reward MLP reads
// the unit favored below. Returns the rigged model and the best action.
std::pair<wm::WorldModel, int> make_bandit_world(const SpaceSpec& spec) {
  wm::WorldModelConfig cfg;
  cfg.rssm = 8;
  cfg.latents = 2;
  cfg.classes = 3;
  cfg.embed = 8;
  cfg.mlp_layers = 1;
  cfg.mlp_units = 8;
  cfg.vec_layers = 1;
  cfg.head_layers = 1;
  wm::WorldModel world(spec, cfg, 113);
  const int best = 2;
  for (auto& [name, tensor] : world.params().tensors())
    if (name.find("ln_g") == std::string::npos) tensor.arr() = 0.0f;

  const int zdim = cfg.z_dim();  // 6
  const int n_actions = spec.action.n;
  // GRU input is [z, a, h]; route action j into candidate unit j.
  net::Tensor& gru_w = world.params().at("gru/w");
  const int gru_cols = 3 * cfg.rssm;
  for (int j = 0; j < n_actions; ++j) {
    const int row = zdim + j;                  // action block of the input
    const int col = cfg.rssm + j;              // candidate section
    gru_w.data[static_cast<size_t>(row) * gru_cols + col] = 6.0f;
  }
  // Reward head: hidden unit 0 reads recurrent unit `best`, output reads
  // hidden unit 0.
  net::Tensor& l0 = world.params().at("reward/l0/w");
  l0.data[static_cast<size_t>(best) * cfg.mlp_units + 0] = 6.0f;
  net::Tensor& head = world.params().at("reward/head/w");
  head.data[0] = 2.0f;
  return {std::move(world), best};
}

}  // namespace

TEST_CASE("bandit toy: rigged reward favors one action and the actor finds it") {
  SpaceSpec spec = discrete_spec(3);
  auto [world, best] = make_bandit_world(spec);

  // Oracle check: enumerate actions, measure the imagined one-step reward.
  Rng oracle_rng(16);
  LatentState start = world.initial_state(1, oracle_rng);
  std::vector<float> mean_reward(3, 0.0f);
  for (int action = 0; action < 3; ++action) {
    net::Tensor enc({1, 3});
    enc.data[static_cast<size_t>(action)] = 1.0f;
    float total = 0.0f;
    for (int i = 0; i < 64; ++i) {
      auto out = world.prior_step(start, enc, oracle_rng);
      LatentState next = out.state;
      total += world.decode(next).reward.data[0];
    }
    mean_reward[static_cast<size_t>(action)] = total / 64.0f;
  }
  for (int action = 0; action < 3; ++action)
    if (action != best) CHECK(mean_reward[static_cast<size_t>(best)] > mean_reward[static_cast<size_t>(action)] + 0.05f);

  BehaviorConfig cfg;
  cfg.mlp_layers = 2;
  cfg.mlp_units = 16;
  cfg.horizon = 3;
  cfg.lr = 3e-3f;
  cfg.target_interval = 50;
  Behavior behavior(world.config().feature_dim(), spec.action, cfg, 127);

  Rng init(2);
  LatentState starts = world.initial_state(16, init);
  Rng rng(17);
  for (int step = 0; step < 500; ++step) {
    auto result = behavior.train_step(world, starts, rng);
    REQUIRE(result.applied);
  }
  Rng sample_rng(18);
  int hits = 0;
  const int trials = 2000;
  LatentState one{net::Tensor({1, 8}), net::Tensor({1, 6})};
  one.h.mat() = starts.h.mat().row(0);
  one.z.mat() = starts.z.mat().row(0);
  for (int i = 0; i < trials; ++i)
    if (behavior.sample_action(one, sample_rng, false).index == best) ++hits;
  CHECK(static_cast<double>(hits) / trials > 0.95);
}
