#include <CLI11.hpp>

#include "dreamer/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"World-model reinforcement learning: training, evaluation, imagination, plots"};
  app.require_subcommand(1);

  dreamer::cli::TrainOptions train;
  uint64_t train_seed = 0;
  int64_t train_steps = 0;
  auto* train_cmd = app.add_subcommand("train", "Run the actor/learner training pipeline");
  train_cmd->add_option("--config", train.config_path, "Config file (defaults when omitted)");
  train_cmd->add_option("--logdir", train.logdir, "Run directory")->required();
  train_cmd->add_option("--override", train.overrides, "key=value config override (repeatable)");
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Random seed");
  auto* train_steps_opt = train_cmd->add_option("--steps", train_steps, "Learner step budget");

  dreamer::cli::EvalOptions eval;
  uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint with mode actions");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint directory")->required();
  eval_cmd->add_option("--episodes", eval.episodes, "Number of evaluation episodes");
  eval_cmd->add_option("--episode-steps", eval.episode_steps, "Step cap per episode");
  auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "Random seed");
  eval_cmd->add_option("--out", eval.out, "Summary json path");

  dreamer::cli::ImagineOptions imagine;
  uint64_t imagine_seed = 0;
  auto* imagine_cmd = app.add_subcommand("imagine", "Decode open-loop rollouts to an image strip");
  imagine_cmd->add_option("--checkpoint", imagine.checkpoint, "Checkpoint directory")->required();
  imagine_cmd->add_option("--context", imagine.context, "Live warm-up steps");
  imagine_cmd->add_option("--horizon", imagine.horizon, "Imagination steps");
  imagine_cmd->add_option("--stride", imagine.stride, "Keep every n-th frame");
  imagine_cmd->add_option("--rollouts", imagine.rollouts, "Rollout rows");
  auto* imagine_seed_opt = imagine_cmd->add_option("--seed", imagine_seed, "Random seed");
  imagine_cmd->add_option("--out", imagine.out, "Output .ppm path")->required();

  dreamer::cli::PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "Reward-versus-time learning curve");
  plot_cmd->add_option("--logdir", plot.logdir, "Run directory with env.jsonl")->required();
  plot_cmd->add_option("--out", plot.out, "Output .svg path")->required();
  plot_cmd->add_option("--bins", plot.bins, "Time bins");

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    if (*train_seed_opt) train.seed = train_seed;
    if (*train_steps_opt) train.steps = train_steps;
    return dreamer::cli::cmd_train(train);
  }
  if (eval_cmd->parsed()) {
    if (*eval_seed_opt) eval.seed = eval_seed;
    return dreamer::cli::cmd_eval(eval);
  }
  if (imagine_cmd->parsed()) {
    if (*imagine_seed_opt) imagine.seed = imagine_seed;
    return dreamer::cli::cmd_imagine(imagine);
  }
  if (plot_cmd->parsed()) return dreamer::cli::cmd_plot(plot);
  return 1;
}
