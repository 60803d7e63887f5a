#include "dreamer/net/ops.hpp"
#include <memory>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace dreamer::net {

namespace {
thread_local int64_t t_backward_calls = 0;
}

int64_t backward_calls_this_thread() { return t_backward_calls; }

void Tape::backward(int loss) {
  if (value(loss).numel() != 1) throw std::logic_error("backward target must be scalar");
  ++t_backward_calls;
  grad(loss).data[0] = 1.0f;
  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.needs || !n.has_grad || !n.back) continue;
    n.back(*this, id);
  }
}

namespace {

int unary(Tape& t, int a, Tensor out, std::function<void(const Tensor&, const Tensor&, Tensor&)> df) {
  // df(grad_out, value_out, grad_in_accum)
  return t.node(std::move(out), {a}, [a, df](Tape& tp, int self) {
    if (!tp.wants(a)) return;
    df(tp.grad(self), tp.value(self), tp.grad(a));
  });
}

}  // namespace

int add(Tape& t, int a, int b) {
  Tensor out = t.value(a);
  out.arr() += t.value(b).arr();
  return t.node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
    if (tp.wants(a)) tp.grad(a).arr() += tp.grad(self).arr();
    if (tp.wants(b)) tp.grad(b).arr() += tp.grad(self).arr();
  });
}

int sub(Tape& t, int a, int b) {
  Tensor out = t.value(a);
  out.arr() -= t.value(b).arr();
  return t.node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
    if (tp.wants(a)) tp.grad(a).arr() += tp.grad(self).arr();
    if (tp.wants(b)) tp.grad(b).arr() -= tp.grad(self).arr();
  });
}

int mul(Tape& t, int a, int b) {
  Tensor out = t.value(a);
  out.arr() *= t.value(b).arr();
  return t.node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
    if (tp.wants(a)) tp.grad(a).arr() += tp.grad(self).arr() * tp.value(b).arr();
    if (tp.wants(b)) tp.grad(b).arr() += tp.grad(self).arr() * tp.value(a).arr();
  });
}

int neg(Tape& t, int a) { return scale(t, a, -1.0f); }

int scale(Tape& t, int a, float s) {
  Tensor out = t.value(a);
  out.arr() *= s;
  return t.node(std::move(out), {a}, [a, s](Tape& tp, int self) {
    if (tp.wants(a)) tp.grad(a).arr() += s * tp.grad(self).arr();
  });
}

int add_const(Tape& t, int a, float c) {
  Tensor out = t.value(a);
  out.arr() += c;
  return t.node(std::move(out), {a}, [a](Tape& tp, int self) {
    if (tp.wants(a)) tp.grad(a).arr() += tp.grad(self).arr();
  });
}

int square(Tape& t, int a) {
  Tensor out = t.value(a);
  out.arr() = out.arr().square();
  return t.node(std::move(out), {a}, [a](Tape& tp, int self) {
    if (tp.wants(a)) tp.grad(a).arr() += 2.0f * tp.grad(self).arr() * tp.value(a).arr();
  });
}

int exp_(Tape& t, int a) {
  Tensor out = t.value(a);
  out.arr() = out.arr().exp();
  return unary(t, a, std::move(out), [](const Tensor& g, const Tensor& y, Tensor& gi) {
    gi.arr() += g.arr() * y.arr();
  });
}

int log_(Tape& t, int a) {
  Tensor out = t.value(a);
  out.arr() = out.arr().log();
  return t.node(std::move(out), {a}, [a](Tape& tp, int self) {
    if (tp.wants(a)) tp.grad(a).arr() += tp.grad(self).arr() / tp.value(a).arr();
  });
}

int clamp_min_const(Tape& t, int a, float c) {
  Tensor out = t.value(a);
  out.arr() = out.arr().max(c);
  return t.node(std::move(out), {a}, [a, c](Tape& tp, int self) {
    if (!tp.wants(a)) return;
    const Tensor& v = tp.value(a);
    Tensor& gi = tp.grad(a);
    gi.arr() += (v.arr() > c).select(tp.grad(self).arr(), Eigen::ArrayXf::Zero(v.arr().size()));
  });
}

int sigmoid(Tape& t, int a) {
  Tensor out = t.value(a);
  out.arr() = 1.0f / (1.0f + (-out.arr()).exp());
  return unary(t, a, std::move(out), [](const Tensor& g, const Tensor& y, Tensor& gi) {
    gi.arr() += g.arr() * y.arr() * (1.0f - y.arr());
  });
}

int tanh_(Tape& t, int a) {
  Tensor out = t.value(a);
  out.arr() = out.arr().tanh();
  return unary(t, a, std::move(out), [](const Tensor& g, const Tensor& y, Tensor& gi) {
    gi.arr() += g.arr() * (1.0f - y.arr().square());
  });
}

int elu(Tape& t, int a) {
  Tensor out = t.value(a);
  out.arr() = (out.arr() > 0.0f).select(out.arr(), out.arr().exp() - 1.0f);
  return unary(t, a, std::move(out), [](const Tensor& g, const Tensor& y, Tensor& gi) {
    gi.arr() += g.arr() * (y.arr() > 0.0f).select(Eigen::ArrayXf::Ones(y.arr().size()), y.arr() + 1.0f);
  });
}

int linear_nobias(Tape& t, int x, int w) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  Tensor out({xv.rows(), wv.cols()});
  out.mat().noalias() = xv.mat() * wv.mat();
  return t.node(std::move(out), {x, w}, [x, w](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    if (tp.wants(x)) tp.grad(x).mat().noalias() += g.mat() * tp.value(w).mat().transpose();
    if (tp.wants(w)) tp.grad(w).mat().noalias() += tp.value(x).mat().transpose() * g.mat();
  });
}

int linear(Tape& t, int x, int w, int b) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  Tensor out({xv.rows(), wv.cols()});
  out.mat().noalias() = xv.mat() * wv.mat();
  out.mat().rowwise() += bv.mat().row(0);
  return t.node(std::move(out), {x, w, b}, [x, w, b](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    if (tp.wants(x)) tp.grad(x).mat().noalias() += g.mat() * tp.value(w).mat().transpose();
    if (tp.wants(w)) tp.grad(w).mat().noalias() += tp.value(x).mat().transpose() * g.mat();
    if (tp.wants(b)) tp.grad(b).mat().row(0) += g.mat().colwise().sum();
  });
}

int layer_norm(Tape& t, int x, int gamma, int beta, float eps) {
  const Tensor& xv = t.value(x);
  const int rows = xv.rows();
  const int cols = xv.cols();
  Tensor norm({rows, cols});  // x-hat, saved for backward
  for (int r = 0; r < rows; ++r) {
    ConstArrMap row(xv.data.data() + static_cast<size_t>(r) * cols, cols);
    float mean = row.mean();
    float var = (row - mean).square().mean();
    float inv = 1.0f / std::sqrt(var + eps);
    ArrMap(norm.data.data() + static_cast<size_t>(r) * cols, cols) = (row - mean) * inv;
  }
  Tensor out = norm;
  out.mat().array().rowwise() *= t.value(gamma).mat().row(0).array();
  out.mat().rowwise() += t.value(beta).mat().row(0);
  auto saved = std::make_shared<Tensor>(std::move(norm));
  return t.node(std::move(out), {x, gamma, beta},
                [x, gamma, beta, eps, saved](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const int rows = g.rows();
    const int cols = g.cols();
    if (tp.wants(gamma))
      tp.grad(gamma).mat().row(0).array() +=
          (g.mat().array() * saved->mat().array()).colwise().sum();
    if (tp.wants(beta)) tp.grad(beta).mat().row(0) += g.mat().colwise().sum();
    if (!tp.wants(x)) return;
    const Tensor& xv = tp.value(x);
    auto gamma_row = tp.value(gamma).mat().row(0).array();
    Tensor& gx = tp.grad(x);
    for (int r = 0; r < rows; ++r) {
      ConstArrMap xrow(xv.data.data() + static_cast<size_t>(r) * cols, cols);
      ConstArrMap grow(g.data.data() + static_cast<size_t>(r) * cols, cols);
      ConstArrMap nrow(saved->data.data() + static_cast<size_t>(r) * cols, cols);
      ArrMap gxrow(gx.data.data() + static_cast<size_t>(r) * cols, cols);
      Eigen::ArrayXf dn = grow * gamma_row.transpose();
      float mean = xrow.mean();
      float var = (xrow - mean).square().mean();
      float inv = 1.0f / std::sqrt(var + eps);
      float dn_mean = dn.mean();
      float proj = (dn * nrow).mean();
      gxrow += inv * (dn - dn_mean - nrow * proj);
    }
  });
}

int concat_cols(Tape& t, std::span<const int> xs) {
  const int rows = t.value(xs[0]).rows();
  int total = 0;
  for (int id : xs) total += t.value(id).cols();
  Tensor out({rows, total});
  int off = 0;
  for (int id : xs) {
    const Tensor& v = t.value(id);
    out.mat().middleCols(off, v.cols()) = v.mat();
    off += v.cols();
  }
  std::vector<int> parents(xs.begin(), xs.end());
  return t.node(std::move(out), parents, [parents](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    int off = 0;
    for (int id : parents) {
      int c = tp.value(id).cols();
      if (tp.wants(id)) tp.grad(id).mat() += g.mat().middleCols(off, c);
      off += c;
    }
  });
}

int slice_cols(Tape& t, int x, int offset, int len) {
  const Tensor& v = t.value(x);
  Tensor out({v.rows(), len});
  out.mat() = v.mat().middleCols(offset, len);
  return t.node(std::move(out), {x}, [x, offset, len](Tape& tp, int self) {
    if (tp.wants(x)) tp.grad(x).mat().middleCols(offset, len) += tp.grad(self).mat();
  });
}

int concat_rows(Tape& t, std::span<const int> xs) {
  const int cols = t.value(xs[0]).cols();
  int total = 0;
  for (int id : xs) total += t.value(id).rows();
  Tensor out({total, cols});
  int off = 0;
  for (int id : xs) {
    const Tensor& v = t.value(id);
    out.mat().middleRows(off, v.rows()) = v.mat();
    off += v.rows();
  }
  std::vector<int> parents(xs.begin(), xs.end());
  return t.node(std::move(out), parents, [parents](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    int off = 0;
    for (int id : parents) {
      int r = tp.value(id).rows();
      if (tp.wants(id)) tp.grad(id).mat() += g.mat().middleRows(off, r);
      off += r;
    }
  });
}

int slice_rows(Tape& t, int x, int offset, int len) {
  const Tensor& v = t.value(x);
  Tensor out({len, v.cols()});
  out.mat() = v.mat().middleRows(offset, len);
  return t.node(std::move(out), {x}, [x, offset, len](Tape& tp, int self) {
    if (tp.wants(x)) tp.grad(x).mat().middleRows(offset, len) += tp.grad(self).mat();
  });
}

int tile_rows(Tape& t, int x, int n) {
  const Tensor& v = t.value(x);
  Tensor out({n, v.cols()});
  out.mat() = v.mat().row(0).replicate(n, 1);
  return t.node(std::move(out), {x}, [x](Tape& tp, int self) {
    if (tp.wants(x)) tp.grad(x).mat().row(0) += tp.grad(self).mat().colwise().sum();
  });
}

int reshape(Tape& t, int x, std::vector<int> shape) {
  Tensor out = t.value(x);
  out.shape = std::move(shape);
  if (out.numel() != t.value(x).numel()) throw std::logic_error("reshape changes element count");
  return t.node(std::move(out), {x}, [x](Tape& tp, int self) {
    if (tp.wants(x)) tp.grad(x).arr() += tp.grad(self).arr();
  });
}

int where_rows(Tape& t, const std::vector<uint8_t>& mask, int a, int b) {
  const Tensor& av = t.value(a);
  Tensor out = t.value(b);
  const int cols = out.cols();
  for (int r = 0; r < out.rows(); ++r)
    if (mask[static_cast<size_t>(r)])
      out.mat().row(r) = av.mat().row(r);
  auto m = std::make_shared<std::vector<uint8_t>>(mask);
  return t.node(std::move(out), {a, b}, [a, b, m, cols](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    for (int r = 0; r < g.rows(); ++r) {
      int target = (*m)[static_cast<size_t>(r)] ? a : b;
      if (tp.wants(target)) tp.grad(target).mat().row(r) += g.mat().row(r);
    }
  });
}

namespace {

void softmax_rows(const float* in, float* out, int rows, int classes) {
  for (int r = 0; r < rows; ++r) {
    ConstArrMap x(in + static_cast<size_t>(r) * classes, classes);
    ArrMap y(out + static_cast<size_t>(r) * classes, classes);
    float mx = x.maxCoeff();
    y = (x - mx).exp();
    y /= y.sum();
  }
}

}  // namespace

int softmax_last(Tape& t, int x, int classes) {
  const Tensor& v = t.value(x);
  const int rows = static_cast<int>(v.numel() / classes);
  Tensor out = v;
  softmax_rows(v.data.data(), out.data.data(), rows, classes);
  return unary(t, x, std::move(out), [classes](const Tensor& g, const Tensor& y, Tensor& gi) {
    const int rows = static_cast<int>(y.numel() / classes);
    for (int r = 0; r < rows; ++r) {
      ConstArrMap p(y.data.data() + static_cast<size_t>(r) * classes, classes);
      ConstArrMap gr(g.data.data() + static_cast<size_t>(r) * classes, classes);
      ArrMap gir(gi.data.data() + static_cast<size_t>(r) * classes, classes);
      float dot = (gr * p).sum();
      gir += p * (gr - dot);
    }
  });
}

int log_softmax_last(Tape& t, int x, int classes) {
  const Tensor& v = t.value(x);
  const int rows = static_cast<int>(v.numel() / classes);
  Tensor out = v;
  for (int r = 0; r < rows; ++r) {
    ConstArrMap xr(v.data.data() + static_cast<size_t>(r) * classes, classes);
    ArrMap yr(out.data.data() + static_cast<size_t>(r) * classes, classes);
    float mx = xr.maxCoeff();
    float lse = mx + std::log((xr - mx).exp().sum());
    yr = xr - lse;
  }
  return unary(t, x, std::move(out), [classes](const Tensor& g, const Tensor& y, Tensor& gi) {
    const int rows = static_cast<int>(y.numel() / classes);
    for (int r = 0; r < rows; ++r) {
      ConstArrMap lp(y.data.data() + static_cast<size_t>(r) * classes, classes);
      ConstArrMap gr(g.data.data() + static_cast<size_t>(r) * classes, classes);
      ArrMap gir(gi.data.data() + static_cast<size_t>(r) * classes, classes);
      float gsum = gr.sum();
      gir += gr - lp.exp() * gsum;
    }
  });
}

int straight_through_sample(Tape& t, int logits, int classes, Rng& rng) {
  const Tensor& v = t.value(logits);
  const int rows = static_cast<int>(v.numel() / classes);
  Tensor probs = v;
  softmax_rows(v.data.data(), probs.data.data(), rows, classes);
  Tensor out(v.shape, 0.0f);
  for (int r = 0; r < rows; ++r) {
    ConstArrMap p(probs.data.data() + static_cast<size_t>(r) * classes, classes);
    double u = rng.next_double();
    double acc = 0.0;
    int pick = classes - 1;
    for (int c = 0; c < classes; ++c) {
      acc += p[c];
      if (u < acc) {
        pick = c;
        break;
      }
    }
    out.data[static_cast<size_t>(r) * classes + pick] = 1.0f;
  }
  auto saved = std::make_shared<Tensor>(std::move(probs));
  return t.node(std::move(out), {logits}, [logits, classes, saved](Tape& tp, int self) {
    if (!tp.wants(logits)) return;
    const Tensor& g = tp.grad(self);
    Tensor& gi = tp.grad(logits);
    const int rows = static_cast<int>(g.numel() / classes);
    for (int r = 0; r < rows; ++r) {
      ConstArrMap p(saved->data.data() + static_cast<size_t>(r) * classes, classes);
      ConstArrMap gr(g.data.data() + static_cast<size_t>(r) * classes, classes);
      ArrMap gir(gi.data.data() + static_cast<size_t>(r) * classes, classes);
      float dot = (gr * p).sum();
      gir += p * (gr - dot);
    }
  });
}

int sum_all(Tape& t, int x) {
  Tensor out = Tensor::scalar(t.value(x).arr().sum());
  return t.node(std::move(out), {x}, [x](Tape& tp, int self) {
    if (tp.wants(x)) tp.grad(x).arr() += tp.grad(self).data[0];
  });
}

int mean_all(Tape& t, int x) {
  const float inv = 1.0f / static_cast<float>(t.value(x).numel());
  Tensor out = Tensor::scalar(t.value(x).arr().sum() * inv);
  return t.node(std::move(out), {x}, [x, inv](Tape& tp, int self) {
    if (tp.wants(x)) tp.grad(x).arr() += tp.grad(self).data[0] * inv;
  });
}

int sum_last(Tape& t, int x, int classes) {
  const Tensor& v = t.value(x);
  const int rows = static_cast<int>(v.numel() / classes);
  Tensor out({rows});
  for (int r = 0; r < rows; ++r)
    out.data[static_cast<size_t>(r)] =
        ConstArrMap(v.data.data() + static_cast<size_t>(r) * classes, classes).sum();
  return t.node(std::move(out), {x}, [x, classes](Tape& tp, int self) {
    if (!tp.wants(x)) return;
    const Tensor& g = tp.grad(self);
    Tensor& gi = tp.grad(x);
    const int rows = g.rows();
    for (int r = 0; r < rows; ++r)
      ArrMap(gi.data.data() + static_cast<size_t>(r) * classes, classes) +=
          g.data[static_cast<size_t>(r)];
  });
}

int mean_weighted(Tape& t, int x, Tensor weights) {
  const Tensor& v = t.value(x);
  float wsum = weights.arr().sum();
  if (wsum <= 0.0f) wsum = 1.0f;
  const float inv = 1.0f / wsum;
  Tensor out = Tensor::scalar((v.arr() * weights.arr()).sum() * inv);
  auto w = std::make_shared<Tensor>(std::move(weights));
  return t.node(std::move(out), {x}, [x, w, inv](Tape& tp, int self) {
    if (tp.wants(x)) tp.grad(x).arr() += tp.grad(self).data[0] * inv * w->arr();
  });
}

int gather_last(Tape& t, int x, int classes, const std::vector<int>& idx) {
  const Tensor& v = t.value(x);
  const int rows = static_cast<int>(v.numel() / classes);
  Tensor out({rows});
  for (int r = 0; r < rows; ++r)
    out.data[static_cast<size_t>(r)] =
        v.data[static_cast<size_t>(r) * classes + idx[static_cast<size_t>(r)]];
  auto saved = std::make_shared<std::vector<int>>(idx);
  return t.node(std::move(out), {x}, [x, classes, saved](Tape& tp, int self) {
    if (!tp.wants(x)) return;
    const Tensor& g = tp.grad(self);
    Tensor& gi = tp.grad(x);
    for (int r = 0; r < g.rows(); ++r)
      gi.data[static_cast<size_t>(r) * classes + (*saved)[static_cast<size_t>(r)]] +=
          g.data[static_cast<size_t>(r)];
  });
}

int stopgrad(Tape& t, int x) { return t.constant(t.value(x)); }

namespace {

// col[(c*k+ky)*k+kx][oy*outw+ox] = src[c][oy*s+ky-p][ox*s+kx-p], zero padded.
void im2col(const float* src, float* col, const ConvGeom& g) {
  const int oh = g.out_h(), ow = g.out_w();
  const int P = oh * ow;
  for (int c = 0; c < g.in_c; ++c) {
    const float* plane = src + static_cast<size_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        float* crow = col + static_cast<size_t>((c * g.k + ky) * g.k + kx) * P;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= g.in_h) {
            std::memset(crow + static_cast<size_t>(oy) * ow, 0, sizeof(float) * ow);
            continue;
          }
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * g.stride + kx - g.pad;
            crow[oy * ow + ox] =
                (ix < 0 || ix >= g.in_w) ? 0.0f : plane[iy * g.in_w + ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into the image.
void col2im(const float* col, float* dst, const ConvGeom& g) {
  const int oh = g.out_h(), ow = g.out_w();
  const int P = oh * ow;
  for (int c = 0; c < g.in_c; ++c) {
    float* plane = dst + static_cast<size_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const float* crow = col + static_cast<size_t>((c * g.k + ky) * g.k + kx) * P;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= g.in_h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * g.stride + kx - g.pad;
            if (ix < 0 || ix >= g.in_w) continue;
            plane[iy * g.in_w + ix] += crow[oy * ow + ox];
          }
        }
      }
    }
  }
}

}  // namespace

int conv2d(Tape& t, int x, int w, int b, const ConvGeom& g) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const int n = xv.rows();
  const int ckk = g.in_c * g.k * g.k;
  const int P = g.out_h() * g.out_w();
  if (xv.cols() != g.in_c * g.in_h * g.in_w) throw std::logic_error("conv2d input shape mismatch");
  if (wv.rows() != g.out_c || wv.cols() != ckk) throw std::logic_error("conv2d weight shape mismatch");

  auto cols = std::make_shared<Tensor>(Tensor({n, ckk * P}));
  Tensor out({n, g.out_c, g.out_h(), g.out_w()});
  for (int i = 0; i < n; ++i) {
    float* cptr = cols->data.data() + static_cast<size_t>(i) * ckk * P;
    im2col(xv.data.data() + static_cast<size_t>(i) * xv.cols(), cptr, g);
    MatMap om(out.data.data() + static_cast<size_t>(i) * g.out_c * P, g.out_c, P);
    om.noalias() = wv.mat() * ConstMatMap(cptr, ckk, P);
    om.colwise() += t.value(b).mat().row(0).transpose();
  }
  return t.node(std::move(out), {x, w, b}, [x, w, b, g, cols](Tape& tp, int self) {
    const Tensor& gout = tp.grad(self);
    const Tensor& wv = tp.value(w);
    const int n = tp.value(x).rows();
    const int ckk = g.in_c * g.k * g.k;
    const int P = g.out_h() * g.out_w();
    for (int i = 0; i < n; ++i) {
      ConstMatMap gm(gout.data.data() + static_cast<size_t>(i) * g.out_c * P, g.out_c, P);
      ConstMatMap cm(cols->data.data() + static_cast<size_t>(i) * ckk * P, ckk, P);
      if (tp.wants(w)) tp.grad(w).mat().noalias() += gm * cm.transpose();
      if (tp.wants(b)) tp.grad(b).mat().row(0).transpose() += gm.rowwise().sum();
      if (tp.wants(x)) {
        Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gcol =
            wv.mat().transpose() * gm;
        col2im(gcol.data(), tp.grad(x).data.data() + static_cast<size_t>(i) * tp.value(x).cols(),
               g);
      }
    }
  });
}

int deconv2d(Tape& t, int x, int w, int b, const DeconvGeom& g) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const int n = xv.rows();
  const int okk = g.out_c * g.k * g.k;
  const int P = g.in_h * g.in_w;
  if (xv.cols() != g.in_c * P) throw std::logic_error("deconv2d input shape mismatch");
  if (wv.rows() != g.in_c || wv.cols() != okk) throw std::logic_error("deconv2d weight shape mismatch");
  // The scatter geometry is the convolution that maps the output back to the
  // input resolution.
  ConvGeom cg{g.out_c, g.out_h(), g.out_w(), g.in_c, g.k, g.stride, g.pad};

  Tensor out({n, g.out_c, g.out_h(), g.out_w()});
  const int out_plane = g.out_c * g.out_h() * g.out_w();
  for (int i = 0; i < n; ++i) {
    ConstMatMap xm(xv.data.data() + static_cast<size_t>(i) * xv.cols(), g.in_c, P);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> col =
        wv.mat().transpose() * xm;  // [okk, P]
    col2im(col.data(), out.data.data() + static_cast<size_t>(i) * out_plane, cg);
    MatMap om(out.data.data() + static_cast<size_t>(i) * out_plane, g.out_c,
              g.out_h() * g.out_w());
    om.colwise() += t.value(b).mat().row(0).transpose();
  }
  return t.node(std::move(out), {x, w, b}, [x, w, b, g, cg](Tape& tp, int self) {
    const Tensor& gout = tp.grad(self);
    const int n = tp.value(x).rows();
    const int okk = g.out_c * g.k * g.k;
    const int P = g.in_h * g.in_w;
    const int out_plane = g.out_c * g.out_h() * g.out_w();
    Tensor gcol({okk, P});
    for (int i = 0; i < n; ++i) {
      gcol.arr() = 0.0f;
      im2col(gout.data.data() + static_cast<size_t>(i) * out_plane, gcol.data.data(), cg);
      if (tp.wants(x)) {
        MatMap gxm(tp.grad(x).data.data() + static_cast<size_t>(i) * tp.value(x).cols(), g.in_c,
                   P);
        gxm.noalias() += tp.value(w).mat() * gcol.mat();
      }
      if (tp.wants(w)) {
        ConstMatMap xm(tp.value(x).data.data() + static_cast<size_t>(i) * tp.value(x).cols(),
                       g.in_c, P);
        tp.grad(w).mat().noalias() += xm * gcol.mat().transpose();
      }
      if (tp.wants(b)) {
        ConstMatMap gm(gout.data.data() + static_cast<size_t>(i) * out_plane, g.out_c,
                       g.out_h() * g.out_w());
        tp.grad(b).mat().row(0).transpose() += gm.rowwise().sum();
      }
    }
  });
}

}  // namespace dreamer::net
