#pragma once

#include <string>

#include "dreamer/net/ops.hpp"
#include "dreamer/net/params.hpp"

namespace dreamer::net {

// Feed-forward block: `layers` hidden layers of `units`, each linear ->
// LayerNorm -> ELU, followed by a linear output head.
struct MlpSpec {
  int in_dim = 0;
  int layers = 4;
  int units = 512;
  int out_dim = 0;
  bool layer_norm = true;
  bool zero_head = false;  // zero-initialized head for reward/value style outputs
};

void init_mlp(ParamSet& params, const std::string& prefix, const MlpSpec& spec, Rng& rng);
int mlp_apply(Tape& tape, const ParamVars& vars, const std::string& prefix, const MlpSpec& spec,
              int x);

// Gated recurrent cell, state `units`, layer-normalized gate pre-activations.
// A single dense layer maps [input, state] to the reset/candidate/update
// parts; the update gate is biased toward keeping the previous state.
struct GruSpec {
  int in_dim = 0;
  int units = 512;
};

void init_gru(ParamSet& params, const std::string& prefix, const GruSpec& spec, Rng& rng);
int gru_step(Tape& tape, const ParamVars& vars, const std::string& prefix, const GruSpec& spec,
             int h, int x);

// Discrete-action helpers (plain, no tape).
int sample_categorical_row(const float* logits, int n, Rng& rng);
Tensor one_hot_rows(const std::vector<int>& idx, int n);

// Entropy of the categorical distribution per row group: [R].
int categorical_entropy(Tape& tape, int logits, int classes);

// Tanh-squashed Gaussian head. `head_out` is [N, 2*dim]: mean in the first
// half, raw stddev parameter in the second, mapped smoothly into
// [log_std_min, log_std_max].
struct SquashedGaussian {
  int action = -1;    // [N, dim], in (-1, 1)
  int log_prob = -1;  // [N]
};

SquashedGaussian squashed_gaussian(Tape& tape, int head_out, int dim, Rng& rng, bool mode,
                                   float log_std_min = -5.0f, float log_std_max = 2.0f);

}  // namespace dreamer::net
