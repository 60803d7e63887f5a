#include "dreamer/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "dreamer/runtime/checkpoint.hpp"

namespace fs = std::filesystem;

namespace dreamer::cli {

namespace {

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      std::optional<uint64_t> seed, std::optional<int64_t> steps) {
  RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::parse_file(path);
  cfg.apply_overrides(overrides);
  if (seed) cfg.seed = *seed;
  if (steps) cfg.steps = *steps;
  return cfg;
}

void write_config_copy(const RunConfig& cfg, const std::string& logdir) {
  fs::create_directories(logdir);
  std::ofstream out(fs::path(logdir) / "config.cfg");
  out << cfg.serialize();
  if (!out) throw std::runtime_error("cannot write config copy into '" + logdir + "'");
}

// Belief-tracking policy over a frozen world model + actor head.
class CheckpointPolicy {
 public:
  CheckpointPolicy(const wm::WorldModel& world, const behavior::Behavior& policy, uint64_t seed,
                   bool mode)
      : world_(world), policy_(policy), rng_(seed), mode_(mode) {
    belief_.h = net::Tensor({1, world.config().rssm});
    belief_.z = net::Tensor({1, world.config().z_dim()});
    last_action_ = Action::null_for(world.space().action);
  }

  Action operator()(const Observation& obs, bool is_first) {
    if (is_first) last_action_ = Action::null_for(world_.space().action);
    net::Tensor embed = world_.encode(obs);
    net::Tensor a_enc = wm::encode_action(last_action_, world_.space().action);
    belief_ = world_
                  .posterior_step(belief_, a_enc, embed,
                                  {static_cast<uint8_t>(is_first ? 1 : 0)}, rng_)
                  .state;
    last_action_ = policy_.sample_action(belief_, rng_, mode_);
    return last_action_;
  }

  const LatentState& belief() const { return belief_; }

 private:
  const wm::WorldModel& world_;
  const behavior::Behavior& policy_;
  Rng rng_;
  bool mode_;
  LatentState belief_;
  Action last_action_;
};

void write_ppm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

}  // namespace

int cmd_train(const TrainOptions& options) {
  try {
    if (options.logdir.empty()) throw std::invalid_argument("train needs --logdir");
    RunConfig cfg = load_config(options.config_path, options.overrides, options.seed,
                                options.steps);
    write_config_copy(cfg, options.logdir);

    Rng master(cfg.seed);
    auto env = cfg.build_env(master.child(10).state());
    wm::WorldModel world(env->space(), cfg.world_config(), master.child(11).state());
    behavior::Behavior policy(world.config().feature_dim(), env->space().action,
                              cfg.behavior_config(), master.child(12).state());
    ReplayBuffer replay(cfg.replay_capacity);
    runtime::MetricsLogger train_log((fs::path(options.logdir) / "train.jsonl").string());
    runtime::MetricsLogger env_log((fs::path(options.logdir) / "env.jsonl").string());

    const int64_t learner_budget = cfg.steps;
    int64_t env_steps = 0;
    int64_t learner_steps = 0;
    if (cfg.runtime == "lockstep") {
      runtime::LockstepHarness harness(*env, replay, world, policy, cfg.runtime_config(), {1, 1},
                                       master.child(13).state(), &train_log, &env_log);
      while (learner_budget > 0 && harness.learner().iterations() < learner_budget) {
        harness.run_until_env_steps(harness.actor().env_steps() + 1);
      }
      env_steps = harness.actor().env_steps();
      learner_steps = harness.learner().iterations();
      runtime::CheckpointContents contents;
      contents.world = &world;
      contents.policy = &policy;
      if (cfg.checkpoint_replay) contents.replay = &replay;
      contents.actor = &harness.actor();
      contents.learner = &harness.learner();
      if (env->supports_state_io()) contents.env = env.get();
      contents.learner_iterations = learner_steps;
      contents.meta = {{"config", cfg.to_json()}};
      runtime::save_checkpoint((fs::path(options.logdir) / "checkpoint").string(), contents);
    } else {
      runtime::Runtime rt(*env, replay, world, policy, cfg.runtime_config(),
                          master.child(13).state(), &train_log, &env_log);
      rt.start();
      while (learner_budget > 0 && rt.learner().iterations() < learner_budget)
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      rt.request_stop();
      rt.join();
      env_steps = rt.actor().env_steps();
      learner_steps = rt.learner().iterations();
      runtime::CheckpointContents contents;
      contents.world = &world;
      contents.policy = &policy;
      if (cfg.checkpoint_replay) contents.replay = &replay;
      contents.actor = &rt.actor();
      contents.learner = &rt.learner();
      if (env->supports_state_io()) contents.env = env.get();
      contents.learner_iterations = learner_steps;
      contents.meta = {{"config", cfg.to_json()}};
      runtime::save_checkpoint((fs::path(options.logdir) / "checkpoint").string(), contents);
    }
    std::cout << "trained " << learner_steps << " learner steps over " << env_steps
              << " env steps; checkpoint in " << options.logdir << "/checkpoint\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 1;
  }
}

RestoredRun restore_run(const std::string& checkpoint_dir, uint64_t env_seed,
                        const std::vector<std::string>& config_overrides) {
  std::ifstream mf(fs::path(checkpoint_dir) / "manifest.json");
  if (!mf) throw std::runtime_error("no checkpoint manifest in '" + checkpoint_dir + "'");
  nlohmann::json manifest = nlohmann::json::parse(mf);
  RestoredRun run;
  run.config = RunConfig::from_json(manifest.at("meta").at("config"));
  run.config.apply_overrides(config_overrides);
  run.env = run.config.build_env(env_seed);
  auto loaded = runtime::load_checkpoint(checkpoint_dir, run.env->space());

  run.world = std::make_unique<wm::WorldModel>(run.env->space(), run.config.world_config(), 0);
  run.world->adopt_params(std::move(loaded.world_params));
  run.policy = std::make_unique<behavior::Behavior>(run.world->config().feature_dim(),
                                                    run.env->space().action,
                                                    run.config.behavior_config(), 0);
  run.policy->adopt_params(std::move(loaded.actor_params), std::move(loaded.critic_params),
                           std::move(loaded.target_params));
  run.policy->set_critic_updates(loaded.critic_updates);
  return run;
}

nlohmann::json EvalSummary::to_json() const {
  return {{"episodes", episodes},
          {"steps", steps},
          {"mean_return", mean_return},
          {"mean_step_reward", mean_step_reward},
          {"mean_distance", mean_distance},
          {"pick_events", pick_events},
          {"placement_events", placement_events},
          {"picks_per_minute", picks_per_minute},
          {"placements_per_minute", placements_per_minute},
          {"episode_returns", episode_returns}};
}

EvalSummary eval_run(envs::Env& env, const PolicyFn& policy, int episodes, int max_episode_steps,
                     float control_rate_hz) {
  EvalSummary summary;
  summary.episodes = episodes;
  double reward_total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Observation obs = env.reset();
    bool is_first = true;
    double episode_return = 0.0;
    for (int step = 0; step < max_episode_steps; ++step) {
      Action a = policy(obs, is_first);
      is_first = false;
      auto out = env.step(a);
      obs = out.obs;
      episode_return += out.reward;
      reward_total += out.reward;
      ++summary.steps;
      if (out.reward == 1.0f) ++summary.pick_events;
      if (out.reward >= 10.0f) ++summary.placement_events;
      if (out.is_last) break;
    }
    summary.episode_returns.push_back(episode_return);
    summary.mean_return += episode_return;
  }
  if (episodes > 0) summary.mean_return /= episodes;
  if (summary.steps > 0) {
    summary.mean_step_reward = reward_total / static_cast<double>(summary.steps);
    summary.mean_distance = -summary.mean_step_reward;
    const double minutes =
        static_cast<double>(summary.steps) / static_cast<double>(control_rate_hz) / 60.0;
    if (minutes > 0.0) {
      summary.picks_per_minute = static_cast<double>(summary.pick_events) / minutes;
      summary.placements_per_minute = static_cast<double>(summary.placement_events) / minutes;
    }
  }
  return summary;
}

int cmd_eval(const EvalOptions& options) {
  try {
    const uint64_t seed = options.seed.value_or(0);
    // Evaluation episodes need a bound even on reset-free environments.
    std::vector<std::string> overrides;
    overrides.push_back("env_episode_limit=" + std::to_string(options.episode_steps));
    RestoredRun run = restore_run(options.checkpoint, seed, overrides);

    CheckpointPolicy policy(*run.world, *run.policy, Rng(seed).child(1).state(), /*mode=*/true);
    EvalSummary summary = eval_run(*run.env, std::ref(policy), options.episodes,
                                   options.episode_steps, run.config.control_rate_hz);
    nlohmann::json out = summary.to_json();
    out["env"] = run.config.env;
    out["seed"] = seed;
    std::cout << out.dump(2) << "\n";
    const std::string out_path =
        options.out.empty() ? (fs::path(options.checkpoint) / "eval.json").string() : options.out;
    std::ofstream os(out_path);
    os << out.dump(2) << "\n";
    if (!os) throw std::runtime_error("cannot write '" + out_path + "'");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "eval: " << e.what() << "\n";
    return 1;
  }
}

int cmd_imagine(const ImagineOptions& options) {
  try {
    const uint64_t seed = options.seed.value_or(0);
    RestoredRun run = restore_run(options.checkpoint, seed);
    const auto& spec = run.env->space();
    const ModalitySpec* image = nullptr;
    for (const auto& m : spec.modalities)
      if (m.kind == ModalitySpec::Kind::image) image = &m;
    if (!image) throw std::invalid_argument("environment has no image modality to decode");

    Rng rng(Rng(seed).child(2).state());
    CheckpointPolicy policy(*run.world, *run.policy, rng.child(3).state(), /*mode=*/true);
    Observation obs = run.env->reset();
    bool is_first = true;
    for (int step = 0; step < options.context; ++step) {
      Action a = policy(obs, is_first);
      is_first = false;
      obs = run.env->step(a).obs;
    }
    // One last belief refresh on the final context observation.
    LatentState context_state = policy.belief();

    const int frames = (options.horizon + options.stride - 1) / options.stride;
    const int tile = image->shape[0];
    const int pad = 2;
    const int width = frames * (tile + pad) + pad;
    const int height = options.rollouts * (tile + pad) + pad;
    std::vector<uint8_t> canvas(static_cast<size_t>(width) * height * 3, 30);

    for (int row = 0; row < options.rollouts; ++row) {
      LatentState state;
      state.h = context_state.h;
      state.z = context_state.z;
      int col = 0;
      for (int step = 0; step < options.horizon; ++step) {
        Action a = run.policy->sample_action(state, rng, false);
        state = run.world->prior_step(state, wm::encode_action(a, spec.action), rng).state;
        if (step % options.stride != 0) continue;
        auto decoded = run.world->decode(state);
        const net::Tensor& img = decoded.recon.at(image->name);  // [1, c, h, w]
        const int c = image->shape[2], h = image->shape[0], w = image->shape[1];
        const int ox = pad + col * (tile + pad);
        const int oy = pad + row * (tile + pad);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < 3; ++ch) {
              const int source = std::min(ch, c - 1);
              float v = img.data[static_cast<size_t>((source * h + y) * w + x)];
              v = std::clamp(v, 0.0f, 1.0f);
              canvas[(static_cast<size_t>(oy + y) * width + (ox + x)) * 3 + ch] =
                  static_cast<uint8_t>(v * 255.0f);
            }
          }
        }
        ++col;
      }
    }
    write_ppm(options.out, width, height, canvas);
    std::cout << "wrote " << options.out << " (" << options.rollouts << " rollouts x " << frames
              << " frames)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "imagine: " << e.what() << "\n";
    return 1;
  }
}

std::vector<PlotBin> bin_rewards(const std::vector<nlohmann::json>& records, int bins) {
  std::vector<std::pair<double, double>> points;  // (time, reward)
  for (const auto& r : records)
    if (r.value("kind", "") == "env") points.push_back({r.at("time"), r.at("reward")});
  if (points.empty()) throw std::runtime_error("log contains no environment records");

  double t0 = points.front().first, t1 = points.front().first;
  for (const auto& [t, r] : points) {
    t0 = std::min(t0, t);
    t1 = std::max(t1, t);
  }
  if (t1 <= t0) t1 = t0 + 1.0;
  const int n = std::max(1, bins);
  std::vector<PlotBin> out(static_cast<size_t>(n));
  std::vector<double> sums(static_cast<size_t>(n), 0.0), sq(static_cast<size_t>(n), 0.0);
  for (int b = 0; b < n; ++b) {
    out[static_cast<size_t>(b)].t0 = t0 + (t1 - t0) * b / n;
    out[static_cast<size_t>(b)].t1 = t0 + (t1 - t0) * (b + 1) / n;
  }
  for (const auto& [t, r] : points) {
    int b = static_cast<int>((t - t0) / (t1 - t0) * n);
    b = std::clamp(b, 0, n - 1);
    sums[static_cast<size_t>(b)] += r;
    sq[static_cast<size_t>(b)] += r * r;
    ++out[static_cast<size_t>(b)].count;
  }
  for (int b = 0; b < n; ++b) {
    auto& bin = out[static_cast<size_t>(b)];
    if (bin.count == 0) continue;
    bin.mean = sums[static_cast<size_t>(b)] / static_cast<double>(bin.count);
    const double var =
        std::max(0.0, sq[static_cast<size_t>(b)] / static_cast<double>(bin.count) - bin.mean * bin.mean);
    bin.stddev = std::sqrt(var);
  }
  return out;
}

int cmd_plot(const PlotOptions& options) {
  try {
    const auto log_path = fs::path(options.logdir) / "env.jsonl";
    if (!fs::exists(log_path))
      throw std::runtime_error("no environment log at '" + log_path.string() + "'");
    auto records = runtime::read_jsonl(log_path.string());
    auto bins = bin_rewards(records, options.bins);

    // Episode-end markers (time, mean step reward of the episode).
    std::vector<std::pair<double, double>> markers;
    for (const auto& r : records)
      if (r.contains("episode_return"))
        markers.push_back({r.at("time"),
                           r.at("episode_return").get<double>() /
                               std::max<int64_t>(1, r.at("episode_length").get<int64_t>())});

    double lo = 1e30, hi = -1e30;
    for (const auto& bin : bins) {
      if (bin.count == 0) continue;
      lo = std::min(lo, bin.mean - bin.stddev);
      hi = std::max(hi, bin.mean + bin.stddev);
    }
    for (const auto& [t, v] : markers) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double t0 = bins.front().t0, t1 = bins.back().t1;
    const int w = 800, h = 400, margin = 50;
    auto sx = [&](double t) { return margin + (t - t0) / (t1 - t0) * (w - 2 * margin); };
    auto sy = [&](double v) { return h - margin - (v - lo) / (hi - lo) * (h - 2 * margin); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    // Shaded +-1 std band.
    std::ostringstream band_top, band_bottom;
    for (const auto& bin : bins) {
      if (bin.count == 0) continue;
      const double tc = (bin.t0 + bin.t1) / 2.0;
      band_top << sx(tc) << "," << sy(bin.mean + bin.stddev) << " ";
    }
    for (auto it = bins.rbegin(); it != bins.rend(); ++it) {
      if (it->count == 0) continue;
      const double tc = (it->t0 + it->t1) / 2.0;
      band_bottom << sx(tc) << "," << sy(it->mean - it->stddev) << " ";
    }
    svg << "<polygon points='" << band_top.str() << band_bottom.str()
        << "' fill='#9ecae1' opacity='0.5'/>\n";
    svg << "<polyline fill='none' stroke='#3182bd' stroke-width='2' points='";
    for (const auto& bin : bins) {
      if (bin.count == 0) continue;
      svg << sx((bin.t0 + bin.t1) / 2.0) << "," << sy(bin.mean) << " ";
    }
    svg << "'/>\n";
    for (const auto& [t, v] : markers)
      svg << "<circle cx='" << sx(t) << "' cy='" << sy(v) << "' r='4' fill='#de2d26'/>\n";
    svg << "<line x1='" << margin << "' y1='" << h - margin << "' x2='" << w - margin << "' y2='"
        << h - margin << "' stroke='black'/>\n";
    svg << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << h - margin << "' stroke='black'/>\n";
    svg << "<text x='" << w / 2 << "' y='" << h - 12 << "' font-size='13'>time</text>\n";
    svg << "<text x='8' y='" << h / 2 << "' font-size='13'>reward</text>\n";
    svg << "</svg>\n";

    std::ofstream out(options.out);
    out << svg.str();
    if (!out) throw std::runtime_error("cannot write '" + options.out + "'");

    const std::string csv_path = options.out + ".csv";
    std::ofstream csv(csv_path);
    csv << "t0,t1,mean,std,count\n";
    for (const auto& bin : bins)
      csv << bin.t0 << "," << bin.t1 << "," << bin.mean << "," << bin.stddev << "," << bin.count
          << "\n";
    if (!csv) throw std::runtime_error("cannot write '" + csv_path + "'");
    std::cout << "wrote " << options.out << " and " << csv_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "plot: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dreamer::cli
