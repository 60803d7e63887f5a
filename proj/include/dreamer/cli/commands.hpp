#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dreamer/cli/config.hpp"

namespace dreamer::cli {

struct TrainOptions {
  std::string config_path;  // empty = defaults
  std::string logdir;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
  std::optional<int64_t> steps;  // learner steps
};
int cmd_train(const TrainOptions& options);

struct EvalOptions {
  std::string checkpoint;
  int episodes = 10;
  int episode_steps = 500;  // cap for environments without natural episodes
  std::optional<uint64_t> seed;
  std::string out;  // summary json path; defaults into the checkpoint dir
};
int cmd_eval(const EvalOptions& options);

// Evaluation core, also driven directly by tests with scripted policies.
using PolicyFn = std::function<Action(const Observation& obs, bool is_first)>;

struct EvalSummary {
  int episodes = 0;
  int64_t steps = 0;
  double mean_return = 0.0;
  double mean_step_reward = 0.0;
  double mean_distance = 0.0;        // -mean_step_reward, navigation style
  int64_t pick_events = 0;           // reward == +1
  int64_t placement_events = 0;      // reward >= +10
  double picks_per_minute = 0.0;
  double placements_per_minute = 0.0;
  std::vector<double> episode_returns;
  nlohmann::json to_json() const;
};

EvalSummary eval_run(envs::Env& env, const PolicyFn& policy, int episodes, int max_episode_steps,
                     float control_rate_hz);

struct ImagineOptions {
  std::string checkpoint;
  int context = 8;
  int horizon = 15;
  int stride = 2;
  int rollouts = 4;
  std::optional<uint64_t> seed;
  std::string out;  // .ppm image strip
};
int cmd_imagine(const ImagineOptions& options);

struct PlotOptions {
  std::string logdir;
  std::string out;  // .svg; a .csv sidecar with the binned stats sits next to it
  int bins = 40;
};
int cmd_plot(const PlotOptions& options);

struct PlotBin {
  double t0 = 0.0, t1 = 0.0;
  double mean = 0.0, stddev = 0.0;
  int64_t count = 0;
};
std::vector<PlotBin> bin_rewards(const std::vector<nlohmann::json>& records, int bins);

// Shared by train and eval: reconstruct model + policy from a checkpoint.
struct RestoredRun {
  RunConfig config;
  std::unique_ptr<envs::Env> env;
  std::unique_ptr<wm::WorldModel> world;
  std::unique_ptr<behavior::Behavior> policy;
};
RestoredRun restore_run(const std::string& checkpoint_dir, uint64_t env_seed,
                        const std::vector<std::string>& config_overrides = {});

}  // namespace dreamer::cli
