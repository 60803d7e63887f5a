#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dreamer/cli/commands.hpp"
#include "dreamer/envs/grid_pick_place.hpp"
#include "dreamer/runtime/metrics.hpp"

using namespace dreamer;
using namespace dreamer::cli;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> tiny_model_overrides() {
  return {"rssm_size=16",  "latents=4",     "classes=4",   "mlp_layers=1", "mlp_units=16",
          "embed_units=16", "conv_depth=4",  "image_size=16", "batch_size=2", "batch_length=6",
          "start_learning=24", "replay_capacity=4096", "runtime=lockstep"};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config defaults match the hyperparameter table") {
  RunConfig cfg;
  CHECK(cfg.get("replay_capacity") == "1000000");
  CHECK(cfg.get("start_learning") == "10000");
  CHECK(cfg.get("batch_size") == "32");
  CHECK(cfg.get("batch_length") == "32");
  CHECK(cfg.get("mlp_layers") == "4");
  CHECK(cfg.get("mlp_units") == "512");
  CHECK(cfg.get("activation") == "layernorm_elu");
  CHECK(cfg.get("rssm_size") == "512");
  CHECK(cfg.get("latents") == "32");
  CHECK(cfg.get("classes") == "32");
  CHECK(std::stof(cfg.get("kl_balance")) == doctest::Approx(0.8f));
  CHECK(cfg.get("horizon") == "15");
  CHECK(std::stof(cfg.get("discount")) == doctest::Approx(0.95f));
  CHECK(std::stof(cfg.get("return_lambda")) == doctest::Approx(0.95f));
  CHECK(cfg.get("target_interval") == "100");
  CHECK(std::stof(cfg.get("grad_clip")) == doctest::Approx(100.0f));
  CHECK(std::stof(cfg.get("lr")) == doctest::Approx(1e-4f));
  CHECK(std::stof(cfg.get("adam_eps")) == doctest::Approx(1e-6f));
}

TEST_CASE("every schema key is overridable and no train-ratio key exists") {
  RunConfig cfg;
  for (const auto& [section, key] : RunConfig::schema()) {
    CHECK_NOTHROW(cfg.get(key));
    // Every key accepts its own serialized value back.
    CHECK_NOTHROW(cfg.set(key, cfg.get(key)));
  }
  // The learner runs freely; a training-frequency knob must not exist.
  for (const auto& [section, key] : RunConfig::schema()) {
    CHECK(key.find("train_ratio") == std::string::npos);
    CHECK(key.find("train_every") == std::string::npos);
    CHECK(key.find("updates_per_step") == std::string::npos);
  }
  CHECK_THROWS_WITH_AS(cfg.set("train_ratio", "4"), doctest::Contains("train_ratio"),
                       std::invalid_argument);
}

TEST_CASE("config parse -> serialize -> parse is the identity") {
  RunConfig cfg;
  cfg.apply_overrides({"env=grid_pick_place", "seed=7", "horizon=12", "eta=0.001",
                       "image_size=32", "env_tint=true", "cutoff_hz=3.5"});
  const std::string text = cfg.serialize();
  RunConfig round = RunConfig::parse_text(text);
  CHECK(round == cfg);
  CHECK(round.serialize() == text);
}

TEST_CASE("unknown keys and bad values are rejected by name") {
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(cfg.set("rsm_size", "64"), doctest::Contains("rsm_size"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.set("horizon", "abc"), doctest::Contains("horizon"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(RunConfig::parse_text("horizon 15\n"), doctest::Contains("key = value"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.apply_overrides({"horizon"}), doctest::Contains("key=value"),
                       std::invalid_argument);
}

TEST_CASE("config json round-trip") {
  RunConfig cfg;
  cfg.apply_overrides({"env=toy_quadruped", "upright_unit_range=true", "eta=0.003"});
  RunConfig back = RunConfig::from_json(cfg.to_json());
  CHECK(back == cfg);
}

TEST_CASE("cmd_train rejects an invalid environment naming the field") {
  TempDir dir("dreamer_cli_badenv");
  TrainOptions options;
  options.logdir = (dir.path / "run").string();
  options.overrides = {"env=warehouse"};
  CHECK(cmd_train(options) != 0);
}

TEST_CASE("cmd_train records overrides in the effective config copy") {
  TempDir dir("dreamer_cli_override");
  TrainOptions options;
  options.logdir = (dir.path / "run").string();
  options.overrides = tiny_model_overrides();
  options.overrides.push_back("env=toggle");
  options.overrides.push_back("horizon=16");
  options.steps = 3;
  options.seed = 5;
  REQUIRE(cmd_train(options) == 0);
  RunConfig copy = RunConfig::parse_file((dir.path / "run" / "config.cfg").string());
  CHECK(copy.horizon == 16);
  CHECK(copy.env == "toggle");
  CHECK(copy.seed == 5);
}

TEST_CASE("smoke run: debug-size navigation completes the learner budget") {
  TempDir dir("dreamer_cli_smoke");
  TrainOptions options;
  options.logdir = (dir.path / "run").string();
  options.overrides = tiny_model_overrides();
  options.overrides.push_back("env=point_nav");
  options.overrides.push_back("rssm_size=64");  // debug-size recurrent state
  options.steps = 1000;
  options.seed = 3;
  REQUIRE(cmd_train(options) == 0);

  auto records = runtime::read_jsonl((dir.path / "run" / "train.jsonl").string());
  CHECK(static_cast<int64_t>(records.size()) == 1000);
  CHECK(records.back().at("learner_step").get<int64_t>() == 1000);
  CHECK(fs::exists(dir.path / "run" / "checkpoint" / "manifest.json"));
  CHECK(fs::exists(dir.path / "run" / "env.jsonl"));
}

TEST_CASE("eval_run: scripted grid policy produces exact event counts") {
  envs::EnvParams params{{"grid", "6"}, {"image_size", "16"}, {"episode_limit", "300"}};
  envs::GridPickPlaceEnv env(params, 11);

  // Scripted controller: walk to an object, grasp, raise, carry right until
  // the auto-release fires, walk back, repeat.
  int expected_picks = 0;
  auto policy = [&](const Observation&, bool) -> Action {
    Action a;
    a.kind = ActionSpec::Kind::discrete;
    if (env.holding() >= 0) {
      a.index = env.gripper_z() == 0 ? 4 : 0;  // raise, then carry right
      return a;
    }
    // Find an object in the left bin.
    for (const auto& obj : env.objects()) {
      if (obj.x >= 6) continue;
      if (env.gripper_x() != obj.x) {
        a.index = env.gripper_x() < obj.x ? 0 : 1;
      } else if (env.gripper_y() != obj.y) {
        a.index = env.gripper_y() < obj.y ? 2 : 3;
      } else {
        a.index = 6;  // grasp
        ++expected_picks;
      }
      return a;
    }
    a.index = 1;  // everything moved; drift left
    return a;
  };

  auto summary = eval_run(env, policy, 1, 300, 20.0f);
  CHECK(summary.steps == 300);
  CHECK(summary.pick_events == expected_picks);
  CHECK(summary.placement_events == 3);  // all objects carried over
  const double minutes = static_cast<double>(summary.steps) / 20.0 / 60.0;
  CHECK(summary.picks_per_minute ==
        doctest::Approx(static_cast<double>(summary.pick_events) / minutes));
  CHECK(summary.mean_return == doctest::Approx(summary.episode_returns[0]));
}

TEST_CASE("eval_run with zero episodes gives an empty summary") {
  envs::EnvParams params{{"grid", "6"}, {"image_size", "16"}};
  envs::GridPickPlaceEnv env(params, 12);
  auto summary = eval_run(
      env, [](const Observation&, bool) { return Action{ActionSpec::Kind::discrete, {}, 0}; }, 0,
      100, 20.0f);
  CHECK(summary.episodes == 0);
  CHECK(summary.steps == 0);
  CHECK(summary.episode_returns.empty());
}

TEST_CASE("cmd_eval is deterministic and cmd_imagine writes valid media") {
  TempDir dir("dreamer_cli_evalimg");
  TrainOptions train;
  train.logdir = (dir.path / "run").string();
  train.overrides = tiny_model_overrides();
  train.overrides.push_back("env=grid_pick_place");
  train.overrides.push_back("env_grid=4");
  train.steps = 5;
  train.seed = 9;
  REQUIRE(cmd_train(train) == 0);
  const std::string checkpoint = (dir.path / "run" / "checkpoint").string();

  EvalOptions eval;
  eval.checkpoint = checkpoint;
  eval.episodes = 2;
  eval.episode_steps = 40;
  eval.seed = 4;
  eval.out = (dir.path / "eval1.json").string();
  REQUIRE(cmd_eval(eval) == 0);
  eval.out = (dir.path / "eval2.json").string();
  REQUIRE(cmd_eval(eval) == 0);
  auto read_file = [](const std::string& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  CHECK(read_file((dir.path / "eval1.json").string()) ==
        read_file((dir.path / "eval2.json").string()));

  ImagineOptions imagine;
  imagine.checkpoint = checkpoint;
  imagine.context = 4;
  imagine.horizon = 15;
  imagine.stride = 2;
  imagine.rollouts = 3;
  imagine.out = (dir.path / "rollout.ppm").string();
  REQUIRE(cmd_imagine(imagine) == 0);

  std::ifstream ppm(imagine.out, std::ios::binary);
  std::string magic;
  int width = 0, height = 0, depth = 0;
  ppm >> magic >> width >> height >> depth;
  CHECK(magic == "P6");
  CHECK(depth == 255);
  // ceil(15 / 2) = 8 tiles of 16px plus 2px separators.
  CHECK(width == 8 * 18 + 2);
  CHECK(height == 3 * 18 + 2);
  ppm.get();
  std::vector<char> payload(static_cast<size_t>(width) * height * 3);
  ppm.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  CHECK(ppm.gcount() == static_cast<std::streamsize>(payload.size()));

  // Stride 1 keeps every frame: horizon tiles.
  imagine.stride = 1;
  imagine.out = (dir.path / "rollout_full.ppm").string();
  REQUIRE(cmd_imagine(imagine) == 0);
  std::ifstream ppm2(imagine.out, std::ios::binary);
  ppm2 >> magic >> width >> height >> depth;
  CHECK(width == 15 * 18 + 2);
}

TEST_CASE("cmd_imagine rejects image-free environments") {
  TempDir dir("dreamer_cli_imgfree");
  TrainOptions train;
  train.logdir = (dir.path / "run").string();
  train.overrides = tiny_model_overrides();
  train.overrides.push_back("env=toggle");
  train.steps = 2;
  REQUIRE(cmd_train(train) == 0);

  ImagineOptions imagine;
  imagine.checkpoint = (dir.path / "run" / "checkpoint").string();
  imagine.out = (dir.path / "nope.ppm").string();
  CHECK(cmd_imagine(imagine) != 0);
}

TEST_CASE("plot: binned statistics match a synthetic log") {
  TempDir dir("dreamer_cli_plot");
  runtime::MetricsLogger env_log((dir.path / "env.jsonl").string());
  // Two bins: rewards {1, 3} then {10, 14}; means 2 and 12, stds 1 and 2.
  for (auto [t, r] : std::vector<std::pair<double, double>>{
           {0.0, 1.0}, {1.0, 3.0}, {6.0, 10.0}, {7.0, 14.0}})
    env_log.append({{"kind", "env"}, {"env_step", 1}, {"time", t}, {"reward", r}});

  PlotOptions plot;
  plot.logdir = dir.path.string();
  plot.out = (dir.path / "curve.svg").string();
  plot.bins = 2;
  REQUIRE(cmd_plot(plot) == 0);

  std::ifstream csv(plot.out + ".csv");
  std::string header, line1, line2;
  std::getline(csv, header);
  std::getline(csv, line1);
  std::getline(csv, line2);
  CHECK(header == "t0,t1,mean,std,count");
  double t0, t1, mean, stddev;
  long count;
  sscanf(line1.c_str(), "%lf,%lf,%lf,%lf,%ld", &t0, &t1, &mean, &stddev, &count);
  CHECK(mean == doctest::Approx(2.0));
  CHECK(stddev == doctest::Approx(1.0));
  CHECK(count == 2);
  sscanf(line2.c_str(), "%lf,%lf,%lf,%lf,%ld", &t0, &t1, &mean, &stddev, &count);
  CHECK(mean == doctest::Approx(12.0));
  CHECK(stddev == doctest::Approx(2.0));
  CHECK(count == 2);

  std::ifstream svg(plot.out);
  std::string body((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
  CHECK(body.find("<svg") != std::string::npos);
  CHECK(body.find("polyline") != std::string::npos);
}

TEST_CASE("plot: single-record log yields one flat bin; missing logdir fails") {
  TempDir dir("dreamer_cli_plot_edge");
  runtime::MetricsLogger env_log((dir.path / "env.jsonl").string());
  env_log.append({{"kind", "env"}, {"env_step", 1}, {"time", 2.0}, {"reward", 5.0}});
  PlotOptions plot;
  plot.logdir = dir.path.string();
  plot.out = (dir.path / "flat.svg").string();
  plot.bins = 1;
  REQUIRE(cmd_plot(plot) == 0);
  std::ifstream csv(plot.out + ".csv");
  std::string header, line;
  std::getline(csv, header);
  std::getline(csv, line);
  double t0, t1, mean, stddev;
  long count;
  sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%ld", &t0, &t1, &mean, &stddev, &count);
  CHECK(mean == doctest::Approx(5.0));
  CHECK(stddev == doctest::Approx(0.0));

  PlotOptions missing;
  missing.logdir = (dir.path / "nonexistent").string();
  missing.out = (dir.path / "x.svg").string();
  CHECK(cmd_plot(missing) != 0);
}
