#include "dreamer/cli/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dreamer::cli {

namespace {

std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  return buf;
}

float parse_float(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const float v = std::stof(value, &used);
    if (used != value.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid value '" + value + "' for key '" + key + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid value '" + value + "' for key '" + key + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("invalid value '" + value + "' for key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& RunConfig::schema() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"run", "env"},
      {"run", "seed"},
      {"run", "steps"},
      {"run", "runtime"},
      {"run", "control_rate_hz"},
      {"replay", "replay_capacity"},
      {"replay", "start_learning"},
      {"replay", "batch_size"},
      {"replay", "batch_length"},
      {"model", "rssm_size"},
      {"model", "latents"},
      {"model", "classes"},
      {"model", "mlp_layers"},
      {"model", "mlp_units"},
      {"model", "activation"},
      {"model", "embed_units"},
      {"model", "conv_depth"},
      {"model", "image_size"},
      {"model", "kl_balance"},
      {"model", "kl_scale"},
      {"model", "kl_free"},
      {"model", "reward_alignment"},
      {"actor_critic", "horizon"},
      {"actor_critic", "discount"},
      {"actor_critic", "return_lambda"},
      {"actor_critic", "target_interval"},
      {"actor_critic", "eta"},
      {"actor_critic", "baseline_target_critic"},
      {"actor_critic", "imagine_starts"},
      {"optimizer", "grad_clip"},
      {"optimizer", "lr"},
      {"optimizer", "adam_eps"},
      {"runtime", "cutoff_hz"},
      {"runtime", "publish_every"},
      {"runtime", "checkpoint_replay"},
      {"env", "upright_unit_range"},
      {"env", "env_grid"},
      {"env", "env_objects"},
      {"env", "env_depth"},
      {"env", "env_tint"},
      {"env", "env_episode_limit"},
      {"env", "env_episode_steps"},
      {"env", "env_goal_x"},
      {"env", "env_goal_y"},
  };
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "env") {
    if (!envs::env_registered(value))
      throw std::invalid_argument("unknown environment '" + value + "' for key 'env'");
    env = value;
  } else if (key == "seed") {
    seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "steps") {
    steps = parse_int(key, value);
  } else if (key == "runtime") {
    if (value != "concurrent" && value != "lockstep")
      throw std::invalid_argument("invalid value '" + value + "' for key 'runtime'");
    runtime = value;
  } else if (key == "control_rate_hz") {
    control_rate_hz = parse_float(key, value);
  } else if (key == "replay_capacity") {
    replay_capacity = parse_int(key, value);
  } else if (key == "start_learning") {
    start_learning = parse_int(key, value);
  } else if (key == "batch_size") {
    batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "batch_length") {
    batch_length = static_cast<int>(parse_int(key, value));
  } else if (key == "rssm_size") {
    rssm_size = static_cast<int>(parse_int(key, value));
  } else if (key == "latents") {
    latents = static_cast<int>(parse_int(key, value));
  } else if (key == "classes") {
    classes = static_cast<int>(parse_int(key, value));
  } else if (key == "mlp_layers") {
    mlp_layers = static_cast<int>(parse_int(key, value));
  } else if (key == "mlp_units") {
    mlp_units = static_cast<int>(parse_int(key, value));
  } else if (key == "activation") {
    if (value != "layernorm_elu" && value != "elu")
      throw std::invalid_argument("invalid value '" + value + "' for key 'activation'");
    activation = value;
  } else if (key == "embed_units") {
    embed_units = static_cast<int>(parse_int(key, value));
  } else if (key == "conv_depth") {
    conv_depth = static_cast<int>(parse_int(key, value));
  } else if (key == "image_size") {
    image_size = static_cast<int>(parse_int(key, value));
  } else if (key == "kl_balance") {
    kl_balance = parse_float(key, value);
  } else if (key == "kl_scale") {
    kl_scale = parse_float(key, value);
  } else if (key == "kl_free") {
    kl_free = parse_float(key, value);
  } else if (key == "reward_alignment") {
    if (value != "successor" && value != "origin")
      throw std::invalid_argument("invalid value '" + value + "' for key 'reward_alignment'");
    reward_alignment = value;
  } else if (key == "horizon") {
    horizon = static_cast<int>(parse_int(key, value));
  } else if (key == "discount") {
    discount = parse_float(key, value);
  } else if (key == "return_lambda") {
    return_lambda = parse_float(key, value);
  } else if (key == "target_interval") {
    target_interval = static_cast<int>(parse_int(key, value));
  } else if (key == "eta") {
    eta = parse_float(key, value);
  } else if (key == "baseline_target_critic") {
    baseline_target_critic = parse_bool(key, value);
  } else if (key == "imagine_starts") {
    imagine_starts = static_cast<int>(parse_int(key, value));
  } else if (key == "grad_clip") {
    grad_clip = parse_float(key, value);
  } else if (key == "lr") {
    lr = parse_float(key, value);
  } else if (key == "adam_eps") {
    adam_eps = parse_float(key, value);
  } else if (key == "cutoff_hz") {
    cutoff_hz = parse_float(key, value);
  } else if (key == "publish_every") {
    publish_every = static_cast<int>(parse_int(key, value));
  } else if (key == "checkpoint_replay") {
    checkpoint_replay = parse_bool(key, value);
  } else if (key == "upright_unit_range") {
    upright_unit_range = parse_bool(key, value);
  } else if (key == "env_grid") {
    env_grid = static_cast<int>(parse_int(key, value));
  } else if (key == "env_objects") {
    env_objects = static_cast<int>(parse_int(key, value));
  } else if (key == "env_depth") {
    env_depth = parse_bool(key, value);
  } else if (key == "env_tint") {
    env_tint = parse_bool(key, value);
  } else if (key == "env_episode_limit") {
    env_episode_limit = static_cast<int>(parse_int(key, value));
  } else if (key == "env_episode_steps") {
    env_episode_steps = static_cast<int>(parse_int(key, value));
  } else if (key == "env_goal_x") {
    env_goal_x = parse_float(key, value);
  } else if (key == "env_goal_y") {
    env_goal_y = parse_float(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "env") return env;
  if (key == "seed") return std::to_string(seed);
  if (key == "steps") return std::to_string(steps);
  if (key == "runtime") return runtime;
  if (key == "control_rate_hz") return format_float(control_rate_hz);
  if (key == "replay_capacity") return std::to_string(replay_capacity);
  if (key == "start_learning") return std::to_string(start_learning);
  if (key == "batch_size") return std::to_string(batch_size);
  if (key == "batch_length") return std::to_string(batch_length);
  if (key == "rssm_size") return std::to_string(rssm_size);
  if (key == "latents") return std::to_string(latents);
  if (key == "classes") return std::to_string(classes);
  if (key == "mlp_layers") return std::to_string(mlp_layers);
  if (key == "mlp_units") return std::to_string(mlp_units);
  if (key == "activation") return activation;
  if (key == "embed_units") return std::to_string(embed_units);
  if (key == "conv_depth") return std::to_string(conv_depth);
  if (key == "image_size") return std::to_string(image_size);
  if (key == "kl_balance") return format_float(kl_balance);
  if (key == "kl_scale") return format_float(kl_scale);
  if (key == "kl_free") return format_float(kl_free);
  if (key == "reward_alignment") return reward_alignment;
  if (key == "horizon") return std::to_string(horizon);
  if (key == "discount") return format_float(discount);
  if (key == "return_lambda") return format_float(return_lambda);
  if (key == "target_interval") return std::to_string(target_interval);
  if (key == "eta") return format_float(eta);
  if (key == "baseline_target_critic") return baseline_target_critic ? "true" : "false";
  if (key == "imagine_starts") return std::to_string(imagine_starts);
  if (key == "grad_clip") return format_float(grad_clip);
  if (key == "lr") return format_float(lr);
  if (key == "adam_eps") return format_float(adam_eps);
  if (key == "cutoff_hz") return format_float(cutoff_hz);
  if (key == "publish_every") return std::to_string(publish_every);
  if (key == "checkpoint_replay") return checkpoint_replay ? "true" : "false";
  if (key == "upright_unit_range") return upright_unit_range ? "true" : "false";
  if (key == "env_grid") return std::to_string(env_grid);
  if (key == "env_objects") return std::to_string(env_objects);
  if (key == "env_depth") return env_depth ? "true" : "false";
  if (key == "env_tint") return env_tint ? "true" : "false";
  if (key == "env_episode_limit") return std::to_string(env_episode_limit);
  if (key == "env_episode_steps") return std::to_string(env_episode_steps);
  if (key == "env_goal_x") return format_float(env_goal_x);
  if (key == "env_goal_y") return format_float(env_goal_y);
  throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [sec, key] : schema()) {
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << key << " = " << get(key) << "\n";
  }
  return out.str();
}

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw std::invalid_argument("malformed section at line " + std::to_string(line_no));
      continue;  // sections are organizational; keys are globally unique
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key = value at line " + std::to_string(line_no));
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

void RunConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override '" + item + "' is not of the form key=value");
    set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  for (const auto& [sec, key] : schema()) j[key] = get(key);
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) cfg.set(it.key(), it.value().get<std::string>());
  return cfg;
}

bool RunConfig::operator==(const RunConfig& other) const {
  for (const auto& [sec, key] : schema())
    if (get(key) != other.get(key)) return false;
  return true;
}

wm::WorldModelConfig RunConfig::world_config() const {
  wm::WorldModelConfig cfg;
  cfg.rssm = rssm_size;
  cfg.latents = latents;
  cfg.classes = classes;
  cfg.embed = embed_units;
  cfg.conv_depth = conv_depth;
  cfg.mlp_layers = mlp_layers;
  cfg.mlp_units = mlp_units;
  cfg.layer_norm = activation == "layernorm_elu";
  cfg.kl_balance = kl_balance;
  cfg.kl_scale = kl_scale;
  cfg.kl_free = kl_free;
  cfg.lr = lr;
  cfg.adam_eps = adam_eps;
  cfg.grad_clip = grad_clip;
  cfg.reward_alignment = reward_alignment;
  return cfg;
}

behavior::BehaviorConfig RunConfig::behavior_config() const {
  behavior::BehaviorConfig cfg;
  cfg.horizon = horizon;
  cfg.discount = discount;
  cfg.return_lambda = return_lambda;
  cfg.eta = eta;
  cfg.target_interval = target_interval;
  cfg.lr = lr;
  cfg.adam_eps = adam_eps;
  cfg.grad_clip = grad_clip;
  cfg.baseline_target_critic = baseline_target_critic;
  cfg.mlp_layers = mlp_layers;
  cfg.mlp_units = mlp_units;
  cfg.layer_norm = activation == "layernorm_elu";
  cfg.imagine_starts = imagine_starts;
  return cfg;
}

runtime::RuntimeConfig RunConfig::runtime_config() const {
  runtime::RuntimeConfig cfg;
  cfg.batch_size = batch_size;
  cfg.batch_length = batch_length;
  cfg.start_learning = start_learning;
  cfg.control_rate_hz = control_rate_hz;
  cfg.cutoff_hz = cutoff_hz;
  cfg.publish_every = publish_every;
  return cfg;
}

envs::EnvParams RunConfig::env_params() const {
  envs::EnvParams params;
  params["image_size"] = std::to_string(image_size);
  params["upright_unit_range"] = upright_unit_range ? "true" : "false";
  params["grid"] = std::to_string(env_grid);
  params["objects"] = std::to_string(env_objects);
  params["depth"] = env_depth ? "true" : "false";
  params["tint"] = env_tint ? "true" : "false";
  params["episode_limit"] = std::to_string(env_episode_limit);
  params["episode_steps"] = std::to_string(env_episode_steps);
  params["goal_x"] = format_float(env_goal_x);
  params["goal_y"] = format_float(env_goal_y);
  return params;
}

std::unique_ptr<envs::Env> RunConfig::build_env(uint64_t env_seed) const {
  if (env.empty()) throw std::invalid_argument("config key 'env' must name an environment");
  return envs::make_env(env, env_params(), env_seed);
}

}  // namespace dreamer::cli
