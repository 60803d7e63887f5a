#include "dreamer/runtime/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include "dreamer/core/serialize.hpp"
#include "dreamer/net/checkpoint.hpp"

namespace fs = std::filesystem;

namespace dreamer::runtime {

void save_checkpoint(const std::string& dir, const CheckpointContents& contents) {
  if (!contents.world || !contents.policy)
    throw std::invalid_argument("checkpoint needs a world model and a policy");
  fs::create_directories(dir);

  {
    std::ofstream os(fs::path(dir) / "spec.bin", std::ios::binary);
    write_space_spec(os, contents.world->space());
    if (!os) throw std::runtime_error("cannot write checkpoint spec");
  }
  net::save_params_file((fs::path(dir) / "world.tnsr").string(), contents.world->params());
  net::save_params_file((fs::path(dir) / "actor.tnsr").string(), contents.policy->actor_params());
  net::save_params_file((fs::path(dir) / "critic.tnsr").string(),
                        contents.policy->critic_params());
  net::save_params_file((fs::path(dir) / "target.tnsr").string(),
                        contents.policy->target_params());

  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["critic_updates"] = contents.policy->critic_updates();
  manifest["learner_iterations"] = contents.learner_iterations;
  manifest["meta"] = contents.meta.is_null() ? nlohmann::json::object() : contents.meta;

  if (contents.replay) {
    contents.replay->save((fs::path(dir) / "replay").string());
    auto stats = contents.replay->stats();
    manifest["replay"] = {{"length", stats.length},
                          {"total_appended", stats.total_appended},
                          {"episodes_seen", stats.episodes_seen}};
  }
  if (contents.actor) {
    std::ofstream os(fs::path(dir) / "actor_state.bin", std::ios::binary);
    contents.actor->save_state(os);
    if (!os) throw std::runtime_error("cannot write actor state");
    manifest["actor_state"] = true;
  }
  if (contents.learner) {
    std::ofstream os(fs::path(dir) / "learner_state.bin", std::ios::binary);
    contents.learner->save_state(os);
    if (!os) throw std::runtime_error("cannot write learner state");
    manifest["learner_state"] = true;
  }
  if (contents.env) {
    if (!contents.env->supports_state_io())
      throw std::invalid_argument("environment does not support state serialization");
    std::ofstream os(fs::path(dir) / "env_state.bin", std::ios::binary);
    contents.env->save_state(os);
    if (!os) throw std::runtime_error("cannot write environment state");
    manifest["env_state"] = true;
  }

  std::ofstream mf(fs::path(dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  if (!mf) throw std::runtime_error("cannot write checkpoint manifest");
}

LoadedCheckpoint load_checkpoint(const std::string& dir, const SpaceSpec& expected_spec) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("no checkpoint manifest in '" + dir + "'");
  nlohmann::json manifest = nlohmann::json::parse(mf);
  if (manifest.at("format_version").get<int>() != kCheckpointFormatVersion)
    throw std::runtime_error("unsupported checkpoint format version");

  LoadedCheckpoint out;
  {
    std::ifstream is(fs::path(dir) / "spec.bin", std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint is missing its space spec");
    out.spec = read_space_spec(is);
  }
  if (!(out.spec == expected_spec))
    throw std::runtime_error("checkpoint space spec does not match the current setup");

  out.world_params = net::load_params_file((fs::path(dir) / "world.tnsr").string());
  out.actor_params = net::load_params_file((fs::path(dir) / "actor.tnsr").string());
  out.critic_params = net::load_params_file((fs::path(dir) / "critic.tnsr").string());
  out.target_params = net::load_params_file((fs::path(dir) / "target.tnsr").string());
  out.critic_updates = manifest.at("critic_updates").get<int64_t>();
  out.learner_iterations = manifest.at("learner_iterations").get<int64_t>();
  out.meta = manifest.at("meta");

  if (manifest.contains("replay"))
    out.replay = ReplayBuffer::load((fs::path(dir) / "replay").string());
  if (manifest.value("actor_state", false)) {
    out.has_actor_state = true;
    out.actor_state_path = (fs::path(dir) / "actor_state.bin").string();
  }
  if (manifest.value("learner_state", false)) {
    out.has_learner_state = true;
    out.learner_state_path = (fs::path(dir) / "learner_state.bin").string();
  }
  if (manifest.value("env_state", false)) {
    out.has_env_state = true;
    out.env_state_path = (fs::path(dir) / "env_state.bin").string();
  }
  return out;
}

void restore_actor(const LoadedCheckpoint& ckpt, ActorDriver& actor) {
  if (!ckpt.has_actor_state) throw std::runtime_error("checkpoint has no actor state");
  std::ifstream is(ckpt.actor_state_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open actor state");
  actor.load_state(is);
}

void restore_learner(const LoadedCheckpoint& ckpt, LearnerDriver& learner) {
  if (!ckpt.has_learner_state) throw std::runtime_error("checkpoint has no learner state");
  std::ifstream is(ckpt.learner_state_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open learner state");
  learner.load_state(is);
}

void restore_env(const LoadedCheckpoint& ckpt, envs::Env& env) {
  if (!ckpt.has_env_state) throw std::runtime_error("checkpoint has no environment state");
  std::ifstream is(ckpt.env_state_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open environment state");
  env.load_state(is);
}

}  // namespace dreamer::runtime
