#include "dreamer/wm/world_model.hpp"

#include <cmath>
#include <stdexcept>

namespace dreamer::wm {

using namespace dreamer::net;

namespace {

constexpr int kConvLevels = 4;

bool any_set(const std::vector<uint8_t>& mask) {
  for (uint8_t m : mask)
    if (m) return true;
  return false;
}

}  // namespace

net::Tensor encode_action(const Action& a, const ActionSpec& spec) {
  Tensor out({1, spec.encoded_dim()});
  if (spec.kind == ActionSpec::Kind::continuous) {
    for (int i = 0; i < spec.dim; ++i) out.data[static_cast<size_t>(i)] = a.values[static_cast<size_t>(i)];
  } else if (a.index >= 0) {
    out.data[static_cast<size_t>(a.index)] = 1.0f;
  }
  return out;
}

std::map<std::string, net::Tensor> obs_to_tensors(const Observation& obs, const SpaceSpec& spec) {
  std::map<std::string, Tensor> out;
  for (const auto& m : spec.modalities) {
    if (m.kind == ModalitySpec::Kind::image) {
      const ImageBuf& img = obs.image(m.name);
      Tensor t({1, img.c, img.h, img.w});
      for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
          for (int c = 0; c < img.c; ++c)
            t.data[static_cast<size_t>((c * img.h + y) * img.w + x)] =
                static_cast<float>(img.pixels[static_cast<size_t>((y * img.w + x) * img.c + c)]) /
                255.0f;
      out.emplace(m.name, std::move(t));
    } else {
      const VecBuf& vec = obs.vec(m.name);
      Tensor t({1, static_cast<int>(vec.values.size())});
      t.data.assign(vec.values.begin(), vec.values.end());
      out.emplace(m.name, std::move(t));
    }
  }
  return out;
}

BatchData make_batch_data(const SequenceBatch& batch, const SpaceSpec& spec) {
  BatchData data;
  data.B = batch.B;
  data.T = batch.T;
  const int n = batch.B * batch.T;
  data.rewards = Tensor({n});
  data.is_first.assign(static_cast<size_t>(n), 0);
  data.actions = Tensor({n, spec.action.encoded_dim()});

  for (const auto& m : spec.modalities) {
    std::vector<int> shape;
    if (m.kind == ModalitySpec::Kind::image)
      shape = {n, m.shape[2], m.shape[0], m.shape[1]};
    else
      shape = {n, m.shape[0]};
    data.obs.emplace(m.name, Tensor(std::move(shape)));
  }

  const int adim = spec.action.encoded_dim();
  for (int t = 0; t < batch.T; ++t) {
    for (int b = 0; b < batch.B; ++b) {
      const int row = t * batch.B + b;
      const Transition& tr = *batch.seq[static_cast<size_t>(b)][static_cast<size_t>(t)];
      data.rewards.data[static_cast<size_t>(row)] = tr.reward;
      data.is_first[static_cast<size_t>(row)] = tr.is_first ? 1 : 0;
      Tensor a = encode_action(tr.action, spec.action);
      std::copy(a.data.begin(), a.data.end(),
                data.actions.data.begin() + static_cast<size_t>(row) * adim);
      for (const auto& m : spec.modalities) {
        Tensor& dst = data.obs.at(m.name);
        const int64_t stride = dst.cols();
        float* row_ptr = dst.data.data() + static_cast<size_t>(row) * stride;
        if (m.kind == ModalitySpec::Kind::image) {
          const ImageBuf& img = tr.obs.image(m.name);
          for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x)
              for (int c = 0; c < img.c; ++c)
                row_ptr[(c * img.h + y) * img.w + x] =
                    static_cast<float>(
                        img.pixels[static_cast<size_t>((y * img.w + x) * img.c + c)]) /
                    255.0f;
        } else {
          const VecBuf& vec = tr.obs.vec(m.name);
          std::copy(vec.values.begin(), vec.values.end(), row_ptr);
        }
      }
    }
  }
  return data;
}

WorldModel::WorldModel(SpaceSpec spec, WorldModelConfig cfg, uint64_t init_seed)
    : spec_(std::move(spec)), cfg_(cfg) {
  spec_.check();
  for (const auto& m : spec_.modalities) {
    if (m.kind != ModalitySpec::Kind::image) continue;
    if (m.shape[0] != m.shape[1]) throw std::invalid_argument("image modalities must be square");
    if (m.shape[0] % (1 << kConvLevels) != 0)
      throw std::invalid_argument("image size must be divisible by 16");
  }
  init_params(init_seed);
}

void WorldModel::init_params(uint64_t seed) {
  Rng rng(seed);
  const int zdim = cfg_.z_dim();
  const int adim = spec_.action.encoded_dim();
  const int feat = cfg_.feature_dim();

  int enc_out = 0;
  for (const auto& m : spec_.modalities) {
    if (m.kind == ModalitySpec::Kind::image) {
      int c = m.shape[2];
      int size = m.shape[0];
      for (int l = 0; l < kConvLevels; ++l) {
        const int out_c = cfg_.conv_depth << l;
        const std::string base = "enc/" + m.name + "/conv" + std::to_string(l);
        params_.add(base + "/w",
                    variance_scaled_uniform({out_c, c * 16}, c * 16, out_c * 16, rng));
        params_.add(base + "/b", zeros({1, out_c}));
        c = out_c;
        size /= 2;
      }
      enc_out += c * size * size;
    } else {
      MlpSpec ms{m.shape[0], cfg_.vec_layers, cfg_.mlp_units, cfg_.mlp_units, cfg_.layer_norm};
      init_mlp(params_, "enc/" + m.name, ms, rng);
      enc_out += cfg_.mlp_units;
    }
  }
  params_.add("enc/proj/w", variance_scaled_uniform({enc_out, cfg_.embed}, enc_out, cfg_.embed, rng));
  params_.add("enc/proj/b", zeros({1, cfg_.embed}));
  params_.add("enc/proj/ln_g", Tensor({1, cfg_.embed}, 1.0f));
  params_.add("enc/proj/ln_b", zeros({1, cfg_.embed}));

  init_gru(params_, "gru", GruSpec{zdim + adim, cfg_.rssm}, rng);
  init_mlp(params_, "prior",
           MlpSpec{cfg_.rssm, cfg_.head_layers, cfg_.mlp_units, zdim, cfg_.layer_norm}, rng);
  init_mlp(params_, "post",
           MlpSpec{cfg_.rssm + cfg_.embed, cfg_.head_layers, cfg_.mlp_units, zdim, cfg_.layer_norm},
           rng);
  params_.add("h0", zeros({1, cfg_.rssm}));

  for (const auto& m : spec_.modalities) {
    if (m.kind == ModalitySpec::Kind::image) {
      const int s0 = m.shape[0] / (1 << kConvLevels);
      const int top_c = cfg_.conv_depth << (kConvLevels - 1);
      const std::string base = "dec/" + m.name;
      params_.add(base + "/fc/w", variance_scaled_uniform({feat, top_c * s0 * s0}, feat,
                                                          top_c * s0 * s0, rng));
      params_.add(base + "/fc/b", zeros({1, top_c * s0 * s0}));
      int c = top_c;
      for (int l = 0; l < kConvLevels; ++l) {
        const int out_c = l == kConvLevels - 1 ? m.shape[2] : (top_c >> (l + 1));
        const std::string dbase = base + "/deconv" + std::to_string(l);
        params_.add(dbase + "/w",
                    variance_scaled_uniform({c, out_c * 16}, c * 4, out_c * 16, rng));
        params_.add(dbase + "/b", zeros({1, out_c}));
        c = out_c;
      }
    } else {
      MlpSpec ms{feat, cfg_.vec_layers, cfg_.mlp_units, m.shape[0], cfg_.layer_norm};
      init_mlp(params_, "dec/" + m.name, ms, rng);
    }
  }
  init_mlp(params_, "reward",
           MlpSpec{feat, cfg_.mlp_layers, cfg_.mlp_units, 1, cfg_.layer_norm, /*zero_head=*/true},
           rng);
}

int WorldModel::build_encoder(net::Tape& t, const net::ParamVars& v,
                              const std::map<std::string, int>& obs_ids, int n) const {
  std::vector<int> parts;
  for (const auto& m : spec_.modalities) {
    int x = obs_ids.at(m.name);
    if (m.kind == ModalitySpec::Kind::image) {
      int c = m.shape[2];
      int size = m.shape[0];
      for (int l = 0; l < kConvLevels; ++l) {
        const int out_c = cfg_.conv_depth << l;
        const std::string base = "enc/" + m.name + "/conv" + std::to_string(l);
        ConvGeom g{c, size, size, out_c};
        x = elu(t, conv2d(t, x, v.at(base + "/w"), v.at(base + "/b"), g));
        c = out_c;
        size /= 2;
      }
      parts.push_back(x);
    } else {
      MlpSpec ms{m.shape[0], cfg_.vec_layers, cfg_.mlp_units, cfg_.mlp_units, cfg_.layer_norm};
      parts.push_back(mlp_apply(t, v, "enc/" + m.name, ms, x));
    }
  }
  int joined = parts.size() == 1 ? parts[0] : concat_cols(t, parts);
  if (t.value(joined).rows() != n) throw std::logic_error("encoder row mismatch");
  int e = linear(t, joined, v.at("enc/proj/w"), v.at("enc/proj/b"));
  e = layer_norm(t, e, v.at("enc/proj/ln_g"), v.at("enc/proj/ln_b"));
  return elu(t, e);
}

int WorldModel::build_h_step(net::Tape& t, const net::ParamVars& v, int h_prev, int z_prev,
                             int a_prev, const std::vector<uint8_t>& is_first, Rng& rng) const {
  const int n = t.value(h_prev).rows();
  int h = h_prev, z = z_prev, a = a_prev;
  if (!is_first.empty() && any_set(is_first)) {
    int h0 = tile_rows(t, v.at("h0"), n);
    MlpSpec prior_spec{cfg_.rssm, cfg_.head_layers, cfg_.mlp_units, cfg_.z_dim(), cfg_.layer_norm};
    int logits0 = tile_rows(t, mlp_apply(t, v, "prior", prior_spec, v.at("h0")), n);
    int z0 = straight_through_sample(t, logits0, cfg_.classes, rng);
    int a0 = t.constant(Tensor({n, t.value(a_prev).cols()}));
    h = where_rows(t, is_first, h0, h_prev);
    z = where_rows(t, is_first, z0, z_prev);
    a = where_rows(t, is_first, a0, a_prev);
  }
  std::array<int, 2> in{z, a};
  int x = concat_cols(t, in);
  GruSpec gs{cfg_.z_dim() + spec_.action.encoded_dim(), cfg_.rssm};
  return gru_step(t, v, "gru", gs, h, x);
}

WorldModel::StepIds WorldModel::build_posterior_step(net::Tape& t, const net::ParamVars& v,
                                                     int h_prev, int z_prev, int a_prev, int embed,
                                                     const std::vector<uint8_t>& is_first,
                                                     Rng& rng) const {
  StepIds out;
  out.h = build_h_step(t, v, h_prev, z_prev, a_prev, is_first, rng);
  MlpSpec prior_spec{cfg_.rssm, cfg_.head_layers, cfg_.mlp_units, cfg_.z_dim(), cfg_.layer_norm};
  out.prior_logits = mlp_apply(t, v, "prior", prior_spec, out.h);
  std::array<int, 2> post_in{out.h, embed};
  MlpSpec post_spec{cfg_.rssm + cfg_.embed, cfg_.head_layers, cfg_.mlp_units, cfg_.z_dim(),
                    cfg_.layer_norm};
  out.post_logits = mlp_apply(t, v, "post", post_spec, concat_cols(t, post_in));
  out.z = straight_through_sample(t, out.post_logits, cfg_.classes, rng);
  return out;
}

WorldModel::StepIds WorldModel::build_prior_step(net::Tape& t, const net::ParamVars& v, int h_prev,
                                                 int z_prev, int a_prev,
                                                 const std::vector<uint8_t>& is_first,
                                                 Rng& rng) const {
  StepIds out;
  out.h = build_h_step(t, v, h_prev, z_prev, a_prev, is_first, rng);
  MlpSpec prior_spec{cfg_.rssm, cfg_.head_layers, cfg_.mlp_units, cfg_.z_dim(), cfg_.layer_norm};
  out.prior_logits = mlp_apply(t, v, "prior", prior_spec, out.h);
  out.post_logits = -1;
  out.z = straight_through_sample(t, out.prior_logits, cfg_.classes, rng);
  return out;
}

int WorldModel::build_reward_head(net::Tape& t, const net::ParamVars& v, int feat) const {
  MlpSpec rs{cfg_.feature_dim(), cfg_.mlp_layers, cfg_.mlp_units, 1, cfg_.layer_norm, true};
  return sum_last(t, mlp_apply(t, v, "reward", rs, feat), 1);
}

std::map<std::string, int> WorldModel::build_decoder(net::Tape& t, const net::ParamVars& v,
                                                     int feat, int n) const {
  std::map<std::string, int> out;
  for (const auto& m : spec_.modalities) {
    if (m.kind == ModalitySpec::Kind::image) {
      const int s0 = m.shape[0] / (1 << kConvLevels);
      const int top_c = cfg_.conv_depth << (kConvLevels - 1);
      const std::string base = "dec/" + m.name;
      int x = linear(t, feat, v.at(base + "/fc/w"), v.at(base + "/fc/b"));
      int c = top_c;
      int size = s0;
      for (int l = 0; l < kConvLevels; ++l) {
        const int out_c = l == kConvLevels - 1 ? m.shape[2] : (top_c >> (l + 1));
        DeconvGeom g{c, size, size, out_c};
        const std::string dbase = base + "/deconv" + std::to_string(l);
        x = deconv2d(t, x, v.at(dbase + "/w"), v.at(dbase + "/b"), g);
        if (l != kConvLevels - 1) x = elu(t, x);
        c = out_c;
        size *= 2;
      }
      out.emplace(m.name, x);
    } else {
      MlpSpec ms{cfg_.feature_dim(), cfg_.vec_layers, cfg_.mlp_units, m.shape[0], cfg_.layer_norm};
      out.emplace(m.name, mlp_apply(t, v, "dec/" + m.name, ms, feat));
    }
  }
  if (n != t.value(feat).rows()) throw std::logic_error("decoder row mismatch");
  return out;
}

int WorldModel::build_kl_balanced(net::Tape& t, int post_logits, int prior_logits) const {
  const int classes = cfg_.classes;
  auto kl = [&](int a, int b) {
    int pa = softmax_last(t, a, classes);
    int la = log_softmax_last(t, a, classes);
    int lb = log_softmax_last(t, b, classes);
    return sum_last(t, mul(t, pa, sub(t, la, lb)), classes);  // [N*latents]
  };
  int lhs = kl(stopgrad(t, post_logits), prior_logits);
  int rhs = kl(post_logits, stopgrad(t, prior_logits));
  int mixed = add(t, scale(t, lhs, cfg_.kl_balance), scale(t, rhs, 1.0f - cfg_.kl_balance));
  return sum_last(t, mixed, cfg_.latents);  // [N]
}

int WorldModel::build_kl_loss(net::Tape& t, int post_logits, int prior_logits) const {
  const int classes = cfg_.classes;
  auto kl = [&](int a, int b) {
    int pa = softmax_last(t, a, classes);
    int la = log_softmax_last(t, a, classes);
    int lb = log_softmax_last(t, b, classes);
    int rows = sum_last(t, mul(t, pa, sub(t, la, lb)), classes);
    return mean_all(t, sum_last(t, rows, cfg_.latents));  // scalar batch mean
  };
  int lhs = kl(stopgrad(t, post_logits), prior_logits);
  int rhs = kl(post_logits, stopgrad(t, prior_logits));
  if (cfg_.kl_free > 0.0f) {
    lhs = clamp_min_const(t, lhs, cfg_.kl_free);
    rhs = clamp_min_const(t, rhs, cfg_.kl_free);
  }
  return add(t, scale(t, lhs, cfg_.kl_balance), scale(t, rhs, 1.0f - cfg_.kl_balance));
}

net::Tensor WorldModel::encode(const Observation& obs) const {
  Tape t;
  auto v = register_params(t, params_, false);
  auto tensors = obs_to_tensors(obs, spec_);
  std::map<std::string, int> ids;
  for (auto& [name, tensor] : tensors) ids[name] = t.constant(tensor);
  return t.value(build_encoder(t, v, ids, 1));
}

LatentState WorldModel::initial_state(int n, Rng& rng) const {
  Tape t;
  auto v = register_params(t, params_, false);
  int h0 = tile_rows(t, v.at("h0"), n);
  MlpSpec prior_spec{cfg_.rssm, cfg_.head_layers, cfg_.mlp_units, cfg_.z_dim(), cfg_.layer_norm};
  int logits0 = tile_rows(t, mlp_apply(t, v, "prior", prior_spec, v.at("h0")), n);
  int z0 = straight_through_sample(t, logits0, cfg_.classes, rng);
  return {t.value(h0), t.value(z0)};
}

WorldModel::PosteriorOut WorldModel::posterior_step(const LatentState& prev,
                                                    const net::Tensor& action_enc,
                                                    const net::Tensor& embed,
                                                    const std::vector<uint8_t>& is_first,
                                                    Rng& rng) const {
  Tape t;
  auto v = register_params(t, params_, false);
  int h = t.leaf(&prev.h, false);
  int z = t.leaf(&prev.z, false);
  int a = t.leaf(&action_enc, false);
  int e = t.leaf(&embed, false);
  auto ids = build_posterior_step(t, v, h, z, a, e, is_first, rng);
  PosteriorOut out;
  out.state = {t.value(ids.h), t.value(ids.z)};
  out.dists = {t.value(ids.prior_logits), t.value(ids.post_logits)};
  if (!out.state.h.finite()) throw std::runtime_error("non-finite recurrent state");
  return out;
}

WorldModel::PriorOut WorldModel::prior_step(const LatentState& prev, const net::Tensor& action_enc,
                                            Rng& rng) const {
  Tape t;
  auto v = register_params(t, params_, false);
  int h = t.leaf(&prev.h, false);
  int z = t.leaf(&prev.z, false);
  int a = t.leaf(&action_enc, false);
  auto ids = build_prior_step(t, v, h, z, a, {}, rng);
  PriorOut out;
  out.state = {t.value(ids.h), t.value(ids.z)};
  out.prior_logits = t.value(ids.prior_logits);
  if (!out.state.h.finite()) throw std::runtime_error("non-finite recurrent state");
  return out;
}

WorldModel::DecodeOut WorldModel::decode(const LatentState& s) const {
  Tape t;
  auto v = register_params(t, params_, false);
  int h = t.leaf(&s.h, false);
  int z = t.leaf(&s.z, false);
  std::array<int, 2> fs{h, z};
  int feat = concat_cols(t, fs);
  auto ids = build_decoder(t, v, feat, s.n());
  DecodeOut out;
  for (auto& [name, id] : ids) out.recon.emplace(name, t.value(id));
  out.reward = t.value(build_reward_head(t, v, feat));
  return out;
}

float WorldModel::kl_balanced_value(const net::Tensor& post_logits,
                                    const net::Tensor& prior_logits) const {
  Tape t;
  int kl = build_kl_balanced(t, t.constant(post_logits), t.constant(prior_logits));
  return t.value(sum_all(t, kl)).data[0];
}

ObserveOut WorldModel::observe(const BatchData& batch, Rng& rng, bool build_for_training) const {
  auto tape = std::make_shared<Tape>();
  Tape& t = *tape;
  auto v = register_params(t, params_, build_for_training);
  const int B = batch.B, T = batch.T, n = batch.n();

  std::map<std::string, int> obs_ids;
  for (const auto& [name, tensor] : batch.obs) obs_ids[name] = t.leaf(&tensor, false);
  int embed_all = build_encoder(t, v, obs_ids, n);
  int actions_all = t.leaf(&batch.actions, false);

  std::vector<int> h_ids, z_ids, prior_ids, post_ids;
  int h_prev = -1, z_prev = -1;
  for (int step = 0; step < T; ++step) {
    int embed_t = slice_rows(t, embed_all, step * B, B);
    int a_t = slice_rows(t, actions_all, step * B, B);
    std::vector<uint8_t> mask(batch.is_first.begin() + static_cast<int64_t>(step) * B,
                              batch.is_first.begin() + static_cast<int64_t>(step + 1) * B);
    if (step == 0) {
      // Window starts mid-stream: no previous state exists, reset every row.
      std::fill(mask.begin(), mask.end(), 1);
      h_prev = t.constant(Tensor({B, cfg_.rssm}));
      z_prev = t.constant(Tensor({B, cfg_.z_dim()}));
    }
    auto ids = build_posterior_step(t, v, h_prev, z_prev, a_t, embed_t, mask, rng);
    h_ids.push_back(ids.h);
    z_ids.push_back(ids.z);
    prior_ids.push_back(ids.prior_logits);
    post_ids.push_back(ids.post_logits);
    h_prev = ids.h;
    z_prev = ids.z;
  }

  int h_all = concat_rows(t, h_ids);
  int z_all = concat_rows(t, z_ids);
  int prior_all = concat_rows(t, prior_ids);
  int post_all = concat_rows(t, post_ids);
  std::array<int, 2> fs{h_all, z_all};
  int feat = concat_cols(t, fs);

  auto dec_ids = build_decoder(t, v, feat, n);
  int reward_hat = build_reward_head(t, v, feat);

  // Reconstruction terms: half squared error summed per step, averaged over
  // the batch (unit-variance Gaussian likelihoods, constants dropped).
  ObserveOut out;
  std::vector<int> components;
  std::vector<std::string> component_names;
  for (const auto& m : spec_.modalities) {
    int target = obs_ids.at(m.name);
    int err = sum_last(t, square(t, sub(t, dec_ids.at(m.name), target)),
                       static_cast<int>(m.numel()));
    int comp = scale(t, mean_all(t, err), 0.5f);
    components.push_back(comp);
    component_names.push_back("recon/" + m.name);
  }

  int reward_loss;
  if (cfg_.reward_alignment == "origin") {
    // Predict the next step's reward from the pre-action state; the last step
    // and reset targets have no valid pair.
    int head = slice_rows(t, reward_hat, 0, (T - 1) * B);
    Tensor target({(T - 1) * B});
    Tensor weight({(T - 1) * B});
    for (int row = 0; row < (T - 1) * B; ++row) {
      target.data[static_cast<size_t>(row)] = batch.rewards.data[static_cast<size_t>(row + B)];
      weight.data[static_cast<size_t>(row)] = batch.is_first[static_cast<size_t>(row + B)] ? 0.0f : 1.0f;
    }
    int err = square(t, sub(t, head, t.constant(std::move(target))));
    reward_loss = scale(t, mean_weighted(t, err, std::move(weight)), 0.5f);
  } else {
    int rewards = t.leaf(&batch.rewards, false);
    reward_loss = scale(t, mean_all(t, square(t, sub(t, reward_hat, rewards))), 0.5f);
  }
  components.push_back(reward_loss);
  component_names.push_back("reward");

  int kl_mean = build_kl_loss(t, post_all, prior_all);
  components.push_back(scale(t, kl_mean, cfg_.kl_scale));
  component_names.push_back("kl");
  int kl_raw = mean_all(t, build_kl_balanced(t, post_all, prior_all));

  int total = components[0];
  for (size_t i = 1; i < components.size(); ++i) total = add(t, total, components[i]);

  out.states = {t.value(h_all), t.value(z_all)};
  out.dists = {t.value(prior_all), t.value(post_all)};
  for (size_t i = 0; i < components.size(); ++i)
    out.losses[component_names[i]] = t.value(components[i]).data[0];
  out.losses["kl_raw"] = t.value(kl_raw).data[0];
  out.losses["total"] = t.value(total).data[0];
  if (build_for_training) {
    out.tape = tape;
    out.vars = v;
    out.total_id = total;
  }
  return out;
}

WmTrainResult WorldModel::train_step(const BatchData& batch, Rng& rng) {
  WmTrainResult result;
  ObserveOut obs = observe(batch, rng, true);
  result.starts = obs.states;
  for (const auto& [name, value] : obs.losses) result.metrics["wm/" + name] = value;
  if (!std::isfinite(obs.losses.at("total"))) {
    result.error = "non-finite world model loss";
    for (const auto& [name, value] : obs.losses)
      result.error += " " + name + "=" + std::to_string(value);
    return result;
  }
  obs.tape->backward(obs.total_id);
  GradMap grads = harvest_grads(*obs.tape, params_, obs.vars);
  obs.tape.reset();
  auto step = params_.adam_step(grads, cfg_.lr, cfg_.adam_eps, cfg_.grad_clip);
  if (!step.applied) {
    result.error = step.error;
    return result;
  }
  result.applied = true;
  result.metrics["wm/grad_norm"] = step.grad_norm;
  result.metrics["wm/version"] = static_cast<float>(params_.version());
  return result;
}

void WorldModel::adopt_params(net::ParamSet loaded) {
  if (loaded.tensors().size() != params_.tensors().size())
    throw std::runtime_error("checkpoint parameter set does not match the model");
  for (const auto& [name, tensor] : params_.tensors()) {
    if (!loaded.contains(name))
      throw std::runtime_error("checkpoint missing parameter '" + name + "'");
    if (!loaded.at(name).same_shape(tensor))
      throw std::runtime_error("checkpoint shape mismatch for '" + name + "'");
  }
  params_ = std::move(loaded);
}

int WorldModel::conv_levels() const { return kConvLevels; }

}  // namespace dreamer::wm
