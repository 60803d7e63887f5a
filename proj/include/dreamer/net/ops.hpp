#pragma once

#include <span>
#include <vector>

#include "dreamer/core/rng.hpp"
#include "dreamer/net/tape.hpp"

namespace dreamer::net {

// Elementwise and shape ops. All functions append one node and return its id.
int add(Tape& t, int a, int b);
int sub(Tape& t, int a, int b);
int mul(Tape& t, int a, int b);
int neg(Tape& t, int a);
int scale(Tape& t, int a, float s);
int add_const(Tape& t, int a, float c);
int square(Tape& t, int a);
int exp_(Tape& t, int a);
int log_(Tape& t, int a);
int sigmoid(Tape& t, int a);
// max(x, c) elementwise; gradient passes only where x > c.
int clamp_min_const(Tape& t, int a, float c);
int tanh_(Tape& t, int a);
int elu(Tape& t, int a);

// x [N,I] * w [I,O] + b [O] -> [N,O]
int linear(Tape& t, int x, int w, int b);
int linear_nobias(Tape& t, int x, int w);

// Row-wise normalization over the trailing axis.
int layer_norm(Tape& t, int x, int gamma, int beta, float eps = 1e-3f);

// Shape plumbing. Column ops act on the flattened trailing axis.
int concat_cols(Tape& t, std::span<const int> xs);
int slice_cols(Tape& t, int x, int offset, int len);
int concat_rows(Tape& t, std::span<const int> xs);
int slice_rows(Tape& t, int x, int offset, int len);
int tile_rows(Tape& t, int x, int n);  // x [1,D] -> [n,D]
int reshape(Tape& t, int x, std::vector<int> shape);

// Rows where mask != 0 come from a, the rest from b. a and b share shape.
int where_rows(Tape& t, const std::vector<uint8_t>& mask, int a, int b);

// Softmax family over groups of `classes` along the trailing axis.
int softmax_last(Tape& t, int x, int classes);
int log_softmax_last(Tape& t, int x, int classes);

// Forward: one categorical sample per row, emitted one-hot. Backward: the
// gradient of the softmax probabilities (straight-through estimator).
int straight_through_sample(Tape& t, int logits, int classes, Rng& rng);

// Reductions.
int sum_all(Tape& t, int x);
int mean_all(Tape& t, int x);
int sum_last(Tape& t, int x, int classes);  // [R*classes] view -> [R]
int mean_weighted(Tape& t, int x, Tensor weights);

// One entry per row group: out[r] = x[r, idx[r]].
int gather_last(Tape& t, int x, int classes, const std::vector<int>& idx);

int stopgrad(Tape& t, int x);

// Convolutions, kernel k, stride s, zero padding p. Input layout [N,C,H,W]
// flattened row-major; w [O, C*k*k], b [O]. deconv is the transposed map
// (output spatial size s*H when k = 2s and p = s/2).
struct ConvGeom {
  int in_c, in_h, in_w;
  int out_c;
  int k = 4, stride = 2, pad = 1;
  int out_h() const { return (in_h + 2 * pad - k) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - k) / stride + 1; }
};
int conv2d(Tape& t, int x, int w, int b, const ConvGeom& g);

struct DeconvGeom {
  int in_c, in_h, in_w;
  int out_c;
  int k = 4, stride = 2, pad = 1;
  int out_h() const { return (in_h - 1) * stride + k - 2 * pad; }
  int out_w() const { return (in_w - 1) * stride + k - 2 * pad; }
};
int deconv2d(Tape& t, int x, int w, int b, const DeconvGeom& g);

}  // namespace dreamer::net
