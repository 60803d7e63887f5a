#pragma once
#include <iosfwd>

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "dreamer/core/rng.hpp"
#include "dreamer/core/transition.hpp"

namespace dreamer::envs {

struct StepResult {
  Observation obs;
  float reward = 0.0f;
  bool is_last = false;
};

// Environment contract consumed by the runtime, which synthesizes is_first.
// State serialization is an optional extension used by exact-resume
// checkpoints; environments without it simply restart on load.
class Env {
 public:
  virtual ~Env() = default;
  virtual const SpaceSpec& space() const = 0;
  virtual Observation reset() = 0;
  virtual StepResult step(const Action& action) = 0;

  virtual bool supports_state_io() const { return false; }
  virtual void save_state(std::ostream&) const;
  virtual void load_state(std::istream&);
};

using EnvParams = std::map<std::string, std::string>;

// Environments are constructed by registry name plus a key/value section.
std::unique_ptr<Env> make_env(const std::string& name, const EnvParams& params, uint64_t seed);
bool env_registered(const std::string& name);

namespace detail {
int param_int(const EnvParams& p, const std::string& key, int fallback);
float param_float(const EnvParams& p, const std::string& key, float fallback);
bool param_bool(const EnvParams& p, const std::string& key, bool fallback);
}  // namespace detail

}  // namespace dreamer::envs
