#include <stdexcept>


#include "dreamer/envs/grid_pick_place.hpp"
#include "dreamer/envs/point_nav.hpp"
#include "dreamer/envs/toggle.hpp"
#include "dreamer/envs/toy_quadruped.hpp"

namespace dreamer::envs {

void Env::save_state(std::ostream&) const {
  throw std::logic_error("environment does not support state serialization");
}

void Env::load_state(std::istream&) {
  throw std::logic_error("environment does not support state serialization");
}

namespace detail {

int param_int(const EnvParams& p, const std::string& key, int fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : std::stoi(it->second);
}

float param_float(const EnvParams& p, const std::string& key, float fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : std::stof(it->second);
}

bool param_bool(const EnvParams& p, const std::string& key, bool fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  return it->second == "true" || it->second == "1";
}

}  // namespace detail

bool env_registered(const std::string& name) {
  return name == "toggle" || name == "toy_quadruped" || name == "grid_pick_place" ||
         name == "point_nav";
}

std::unique_ptr<Env> make_env(const std::string& name, const EnvParams& params, uint64_t seed) {
  if (name == "toggle") return std::make_unique<ToggleEnv>(params, seed);
  if (name == "toy_quadruped") return std::make_unique<ToyQuadrupedEnv>(params, seed);
  if (name == "grid_pick_place") return std::make_unique<GridPickPlaceEnv>(params, seed);
  if (name == "point_nav") return std::make_unique<PointNavEnv>(params, seed);
  throw std::invalid_argument("unknown environment '" + name + "'");
}

}  // namespace dreamer::envs
