#include "dreamer/net/modules.hpp"

#include <array>
#include <cmath>

namespace dreamer::net {

void init_mlp(ParamSet& params, const std::string& prefix, const MlpSpec& spec, Rng& rng) {
  int in = spec.in_dim;
  for (int l = 0; l < spec.layers; ++l) {
    const std::string base = prefix + "/l" + std::to_string(l);
    params.add(base + "/w", variance_scaled_uniform({in, spec.units}, in, spec.units, rng));
    params.add(base + "/b", zeros({1, spec.units}));
    if (spec.layer_norm) {
      params.add(base + "/ln_g", Tensor({1, spec.units}, 1.0f));
      params.add(base + "/ln_b", zeros({1, spec.units}));
    }
    in = spec.units;
  }
  if (spec.zero_head) {
    params.add(prefix + "/head/w", zeros({in, spec.out_dim}));
  } else {
    params.add(prefix + "/head/w",
               variance_scaled_uniform({in, spec.out_dim}, in, spec.out_dim, rng));
  }
  params.add(prefix + "/head/b", zeros({1, spec.out_dim}));
}

int mlp_apply(Tape& tape, const ParamVars& vars, const std::string& prefix, const MlpSpec& spec,
              int x) {
  int h = x;
  for (int l = 0; l < spec.layers; ++l) {
    const std::string base = prefix + "/l" + std::to_string(l);
    h = linear(tape, h, vars.at(base + "/w"), vars.at(base + "/b"));
    if (spec.layer_norm) h = layer_norm(tape, h, vars.at(base + "/ln_g"), vars.at(base + "/ln_b"));
    h = elu(tape, h);
  }
  return linear(tape, h, vars.at(prefix + "/head/w"), vars.at(prefix + "/head/b"));
}

void init_gru(ParamSet& params, const std::string& prefix, const GruSpec& spec, Rng& rng) {
  const int in = spec.in_dim + spec.units;
  const int out = 3 * spec.units;
  params.add(prefix + "/w", variance_scaled_uniform({in, out}, in, out, rng));
  params.add(prefix + "/b", zeros({1, out}));
  params.add(prefix + "/ln_g", Tensor({1, out}, 1.0f));
  params.add(prefix + "/ln_b", zeros({1, out}));
}

int gru_step(Tape& tape, const ParamVars& vars, const std::string& prefix, const GruSpec& spec,
             int h, int x) {
  const int units = spec.units;
  std::array<int, 2> xs{x, h};
  int joint = concat_cols(tape, xs);
  int parts = linear(tape, joint, vars.at(prefix + "/w"), vars.at(prefix + "/b"));
  parts = layer_norm(tape, parts, vars.at(prefix + "/ln_g"), vars.at(prefix + "/ln_b"));
  int reset = sigmoid(tape, slice_cols(tape, parts, 0, units));
  int cand = tanh_(tape, mul(tape, reset, slice_cols(tape, parts, units, units)));
  int update = sigmoid(tape, add_const(tape, slice_cols(tape, parts, 2 * units, units), -1.0f));
  // h' = u * cand + (1 - u) * h
  int keep = sub(tape, h, mul(tape, update, h));
  return add(tape, mul(tape, update, cand), keep);
}

int sample_categorical_row(const float* logits, int n, Rng& rng) {
  float mx = logits[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(static_cast<double>(logits[i] - mx));
  double u = rng.next_double() * z;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += std::exp(static_cast<double>(logits[i] - mx));
    if (u < acc) return i;
  }
  return n - 1;
}

Tensor one_hot_rows(const std::vector<int>& idx, int n) {
  Tensor t({static_cast<int>(idx.size()), n});
  for (size_t r = 0; r < idx.size(); ++r)
    if (idx[r] >= 0) t.data[r * static_cast<size_t>(n) + static_cast<size_t>(idx[r])] = 1.0f;
  return t;
}

int categorical_entropy(Tape& tape, int logits, int classes) {
  int lp = log_softmax_last(tape, logits, classes);
  int p = softmax_last(tape, logits, classes);
  return neg(tape, sum_last(tape, mul(tape, p, lp), classes));
}

SquashedGaussian squashed_gaussian(Tape& tape, int head_out, int dim, Rng& rng, bool mode,
                                   float log_std_min, float log_std_max) {
  const int n = tape.value(head_out).rows();
  int mean = slice_cols(tape, head_out, 0, dim);
  int raw = slice_cols(tape, head_out, dim, dim);
  // log_std mapped smoothly into [min, max]; keeps the entropy estimate finite.
  int log_std = add_const(
      tape, scale(tape, add_const(tape, tanh_(tape, raw), 1.0f), 0.5f * (log_std_max - log_std_min)),
      log_std_min);
  int std_ = exp_(tape, log_std);

  Tensor noise({n, dim});
  if (!mode)
    for (auto& v : noise.data) v = rng.normal();
  int eps = tape.constant(std::move(noise));
  int u = add(tape, mean, mul(tape, std_, eps));
  // Scaled slightly inside the open interval so saturated tanh never emits
  // exactly +-1 in float32.
  int action = scale(tape, tanh_(tape, u), 1.0f - 1e-6f);

  // log N(u | mean, std) summed over dims, with the tanh change of variables.
  int zn = mul(tape, sub(tape, u, mean), exp_(tape, neg(tape, log_std)));
  constexpr float kHalfLog2Pi = 0.9189385332046727f;
  int normal_term =
      sub(tape, scale(tape, square(tape, zn), -0.5f), add_const(tape, log_std, kHalfLog2Pi));
  int squash = log_(tape, add_const(tape, neg(tape, square(tape, action)), 1.0f + 1e-6f));
  int log_prob = sub(tape, sum_last(tape, normal_term, dim), sum_last(tape, squash, dim));

  SquashedGaussian out;
  out.action = action;
  out.log_prob = log_prob;
  return out;
}

}  // namespace dreamer::net
