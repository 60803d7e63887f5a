#include "dreamer/runtime/loops.hpp"

#include <chrono>

#include "dreamer/core/serialize.hpp"

namespace dreamer::runtime {

namespace {

double wall_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ActorDriver::ActorDriver(envs::Env& env, ReplayBuffer& replay, SnapshotSlot& slot,
                         const RuntimeConfig& cfg, Rng rng, MetricsLogger* env_log,
                         std::function<double()> now)
    : env_(env), replay_(replay), slot_(slot), cfg_(cfg), rng_(rng), env_log_(env_log),
      now_(std::move(now)) {
  const auto& action = env_.space().action;
  if (action.kind == ActionSpec::Kind::continuous) {
    const float cutoff = cfg_.cutoff_hz > 0.0f ? cfg_.cutoff_hz : cfg_.control_rate_hz / 5.0f;
    filter_.emplace(action.dim, cutoff, cfg_.control_rate_hz);
  }
  const auto snap = slot_.fetch();
  belief_.h = net::Tensor({1, snap->world.config().rssm});
  belief_.z = net::Tensor({1, snap->world.config().z_dim()});
  last_action_ = Action::null_for(action);
}

bool ActorDriver::prefill_active() const {
  return replay_.stats().total_appended < cfg_.start_learning;
}

Action ActorDriver::random_action() {
  const auto& spec = env_.space().action;
  Action a;
  a.kind = spec.kind;
  if (spec.kind == ActionSpec::Kind::continuous) {
    for (int i = 0; i < spec.dim; ++i) a.values.push_back(rng_.uniform(-1.0f, 1.0f));
  } else {
    a.index = rng_.uniform_int(spec.n);
  }
  return a;
}

void ActorDriver::step() {
  const auto& action_spec = env_.space().action;
  if (fresh_) {
    current_obs_ = env_.reset();
    last_action_ = Action::null_for(action_spec);
    Transition start;
    start.obs = current_obs_;
    start.action = last_action_;
    start.is_first = true;
    replay_.append(std::move(start));
    if (filter_) filter_->reset();
    first_flag_ = true;
    fresh_ = false;
    episode_return_ = 0.0f;
    episode_length_ = 0;
  }

  const double t0 = wall_seconds();
  auto snap = slot_.fetch();
  net::Tensor embed = snap->world.encode(current_obs_);
  net::Tensor a_enc = wm::encode_action(last_action_, action_spec);
  belief_ = snap->world
                .posterior_step(belief_, a_enc, embed, {static_cast<uint8_t>(first_flag_ ? 1 : 0)},
                                rng_)
                .state;
  first_flag_ = false;

  Action act = prefill_active() ? random_action() : snap->policy.sample_action(belief_, rng_, false);
  if (filter_) act.values = filter_->apply(act.values);
  max_compute_seconds_ = std::max(max_compute_seconds_, wall_seconds() - t0);

  envs::StepResult result;
  bool fault = false;
  try {
    result = env_.step(act);
  } catch (const std::exception&) {
    fault = true;
  }

  Transition t;
  if (fault) {
    // Abort the episode in place; the loop continues with a fresh reset.
    t.obs = current_obs_;
    t.action = act;
    t.reward = 0.0f;
    t.is_last = true;
  } else {
    t.obs = result.obs;
    t.action = act;
    t.reward = result.reward;
    t.is_last = result.is_last;
  }
  const bool ended = t.is_last;
  const float reward = t.reward;
  if (!fault) current_obs_ = result.obs;
  last_action_ = act;
  replay_.append(std::move(t));

  ++env_steps_;
  episode_return_ += reward;
  ++episode_length_;
  if (env_log_) {
    nlohmann::json record{{"kind", "env"},
                          {"env_step", env_steps_},
                          {"time", now_()},
                          {"reward", reward}};
    if (ended) {
      record["episode_return"] = episode_return_;
      record["episode_length"] = episode_length_;
      record["fault"] = fault;
    }
    env_log_->append(record);
  }
  if (ended) {
    ++episodes_;
    fresh_ = true;
  }
}

void ActorDriver::save_state(std::ostream& os) const {
  io::write_u64(os, rng_.state());
  io::write_i64(os, env_steps_);
  io::write_i64(os, episodes_);
  io::write_u8(os, fresh_ ? 1 : 0);
  io::write_u8(os, first_flag_ ? 1 : 0);
  io::write_f32(os, episode_return_);
  io::write_i64(os, episode_length_);
  io::write_f32_array(os, belief_.h.data);
  io::write_f32_array(os, belief_.z.data);
  io::write_u8(os, last_action_.kind == ActionSpec::Kind::continuous ? 0 : 1);
  io::write_f32_array(os, last_action_.values);
  io::write_i64(os, last_action_.index);
  write_observation(os, current_obs_);
  io::write_u8(os, filter_.has_value() ? 1 : 0);
  if (filter_) filter_->save_state(os);
}

void ActorDriver::load_state(std::istream& is) {
  rng_.set_state(io::read_u64(is));
  env_steps_ = io::read_i64(is);
  episodes_ = io::read_i64(is);
  fresh_ = io::read_u8(is) != 0;
  first_flag_ = io::read_u8(is) != 0;
  episode_return_ = io::read_f32(is);
  episode_length_ = io::read_i64(is);
  io::read_f32_vector(is, belief_.h.data);
  io::read_f32_vector(is, belief_.z.data);
  last_action_.kind = io::read_u8(is) == 0 ? ActionSpec::Kind::continuous : ActionSpec::Kind::discrete;
  last_action_.values = io::read_f32_array(is);
  last_action_.index = static_cast<int>(io::read_i64(is));
  current_obs_ = read_observation(is);
  const bool has_filter = io::read_u8(is) != 0;
  if (has_filter != filter_.has_value())
    throw std::runtime_error("checkpoint filter presence mismatch");
  if (filter_) filter_->load_state(is);
}

LearnerDriver::LearnerDriver(ReplayBuffer& replay, wm::WorldModel& world,
                             behavior::Behavior& policy, SnapshotSlot& slot,
                             const RuntimeConfig& cfg, Rng rng, MetricsLogger* train_log,
                             std::function<double()> now)
    : replay_(replay), world_(world), policy_(policy), slot_(slot), cfg_(cfg), rng_(rng),
      train_log_(train_log), now_(std::move(now)) {}

bool LearnerDriver::ready() const {
  const auto stats = replay_.stats();
  return stats.total_appended >= cfg_.start_learning && stats.length >= cfg_.batch_length;
}

void LearnerDriver::publish_now() {
  slot_.publish(std::make_shared<const PolicySnapshot>(world_.params().version(), world_, policy_));
}

bool LearnerDriver::step() {
  if (!ready()) return false;
  SequenceBatch batch = replay_.sample(cfg_.batch_size, cfg_.batch_length, rng_);
  wm::BatchData data = wm::make_batch_data(batch, world_.space());
  auto wm_result = world_.train_step(data, rng_);
  std::map<std::string, float> metrics = wm_result.metrics;
  if (wm_result.applied) {
    auto bh_result = policy_.train_step(world_, wm_result.starts, rng_);
    metrics.insert(bh_result.metrics.begin(), bh_result.metrics.end());
    if (!bh_result.applied) {
      ++skipped_;
      metrics["behavior/skipped"] = 1.0f;
    }
  } else {
    ++skipped_;
    metrics["wm/skipped"] = 1.0f;
  }
  ++iterations_;
  if (iterations_ % cfg_.publish_every == 0) publish_now();

  if (train_log_) {
    nlohmann::json record{{"kind", "train"},
                          {"learner_step", iterations_},
                          {"time", now_()},
                          {"replay_length", replay_.stats().length},
                          {"replay_total", replay_.stats().total_appended}};
    for (const auto& [name, value] : metrics) record[name] = value;
    train_log_->append(record);
  }
  return true;
}

void LearnerDriver::save_state(std::ostream& os) const {
  io::write_u64(os, rng_.state());
  io::write_i64(os, iterations_);
  io::write_i64(os, skipped_);
}

void LearnerDriver::load_state(std::istream& is) {
  rng_.set_state(io::read_u64(is));
  iterations_ = io::read_i64(is);
  skipped_ = io::read_i64(is);
}

Runtime::Runtime(envs::Env& env, ReplayBuffer& replay, wm::WorldModel& world,
                 behavior::Behavior& policy, const RuntimeConfig& cfg, uint64_t seed,
                 MetricsLogger* train_log, MetricsLogger* env_log)
    : env_(env), cfg_(cfg),
      slot_(std::make_shared<const PolicySnapshot>(world.params().version(), world, policy)) {
  Rng master(seed);
  actor_ = std::make_unique<ActorDriver>(env_, replay, slot_, cfg_, master.child(1), env_log,
                                         wall_seconds);
  learner_ = std::make_unique<LearnerDriver>(replay, world, policy, slot_, cfg_, master.child(2),
                                             train_log, wall_seconds);
}

void Runtime::start() {
  stop_.store(false);
  actor_thread_ = std::thread([this] {
    while (!stop_.load(std::memory_order_relaxed)) {
      if (cfg_.env_step_budget > 0 && actor_->env_steps() >= cfg_.env_step_budget) break;
      actor_->step();
    }
    actor_backward_calls_.store(net::backward_calls_this_thread());
  });
  learner_thread_ = std::thread([this] {
    while (!stop_.load(std::memory_order_relaxed)) {
      if (!learner_->step())
        std::this_thread::sleep_for(std::chrono::microseconds(500));
    }
  });
}

void Runtime::request_stop() { stop_.store(true); }

void Runtime::join() {
  if (actor_thread_.joinable()) actor_thread_.join();
  stop_.store(true);  // actor budget exhaustion also drains the learner
  if (learner_thread_.joinable()) learner_thread_.join();
}

LockstepHarness::LockstepHarness(envs::Env& env, ReplayBuffer& replay, wm::WorldModel& world,
                                 behavior::Behavior& policy, const RuntimeConfig& cfg,
                                 const LockstepSchedule& schedule, uint64_t seed,
                                 MetricsLogger* train_log, MetricsLogger* env_log)
    : cfg_(cfg), schedule_(schedule),
      slot_(std::make_shared<const PolicySnapshot>(world.params().version(), world, policy)) {
  Rng master(seed);
  auto sim_now = [this] { return sim_time(); };
  actor_ = std::make_unique<ActorDriver>(env, replay, slot_, cfg_, master.child(1), env_log,
                                         sim_now);
  learner_ = std::make_unique<LearnerDriver>(replay, world, policy, slot_, cfg_, master.child(2),
                                             train_log, sim_now);
}

double LockstepHarness::sim_time() const {
  return static_cast<double>(actor_->env_steps()) / cfg_.control_rate_hz;
}

void LockstepHarness::run_until_env_steps(int64_t env_steps) {
  while (actor_->env_steps() < env_steps) {
    for (int i = 0; i < schedule_.env_steps_per_round && actor_->env_steps() < env_steps; ++i)
      actor_->step();
    if (learner_->ready())
      for (int i = 0; i < schedule_.learner_steps_per_round; ++i) learner_->step();
  }
}

}  // namespace dreamer::runtime
