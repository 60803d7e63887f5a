#include "dreamer/envs/grid_pick_place.hpp"

#include <algorithm>
#include <stdexcept>

#include "dreamer/core/serialize.hpp"

namespace dreamer::envs {

namespace {

struct Color {
  uint8_t r, g, b;
};

constexpr Color kLeftBin{38, 38, 48};
constexpr Color kRightBin{48, 44, 38};
constexpr Color kObjectColors[] = {{200, 60, 50}, {60, 180, 70}, {70, 90, 210},
                                   {200, 170, 40}, {170, 60, 180}, {50, 180, 180}};

}  // namespace

GridPickPlaceEnv::GridPickPlaceEnv(const EnvParams& params, uint64_t seed) : rng_(seed) {
  gw_ = detail::param_int(params, "grid", 8);
  gh_ = gw_;
  image_size_ = detail::param_int(params, "image_size", 64);
  depth_ = detail::param_bool(params, "depth", false);
  tint_ = detail::param_bool(params, "tint", false);
  episode_limit_ = detail::param_int(params, "episode_limit", 0);
  const int n_objects = detail::param_int(params, "objects", 3);
  if (gw_ < 3) throw std::invalid_argument("grid must be at least 3");
  if (n_objects < 1 || n_objects > 6) throw std::invalid_argument("objects must be in [1, 6]");
  objects_.resize(static_cast<size_t>(n_objects));

  spec_.modalities.push_back(
      {"image", ModalitySpec::Kind::image, {image_size_, image_size_, depth_ ? 4 : 3}});
  spec_.modalities.push_back({"proprio", ModalitySpec::Kind::vec, {4}});
  spec_.action = ActionSpec::make_discrete(7);
  reset();
}

Observation GridPickPlaceEnv::reset() {
  steps_ = 0;
  holding_ = -1;
  gz_ = 0;
  // Objects spawn in the outer half of the left bin, away from the divider,
  // on distinct cells; the gripper spawns anywhere in the left bin.
  std::vector<int> taken;
  for (auto& obj : objects_) {
    while (true) {
      const int x = rng_.uniform_int(std::max(1, gw_ / 2));
      const int y = rng_.uniform_int(gh_);
      const int cell = y * 2 * gw_ + x;
      if (std::find(taken.begin(), taken.end(), cell) == taken.end()) {
        taken.push_back(cell);
        obj = {x, y};
        break;
      }
    }
  }
  gx_ = rng_.uniform_int(gw_);
  gy_ = rng_.uniform_int(gh_);
  return observe();
}

StepResult GridPickPlaceEnv::step(const Action& action) {
  StepResult out;
  const int a = action.index;
  int nx = gx_, ny = gy_;
  switch (a) {
    case 0: nx = std::min(gx_ + 1, 2 * gw_ - 1); break;
    case 1: nx = std::max(gx_ - 1, 0); break;
    case 2: ny = std::min(gy_ + 1, gh_ - 1); break;
    case 3: ny = std::max(gy_ - 1, 0); break;
    case 4:  // raise: only while holding
      if (holding_ >= 0) gz_ = 1;
      break;
    case 5:  // lower: only while holding
      if (holding_ >= 0) gz_ = 0;
      break;
    case 6:  // toggle gripper
      if (holding_ >= 0) {
        objects_[static_cast<size_t>(holding_)] = {gx_, gy_};
        holding_ = -1;
        gz_ = 0;
        if (bin_of(gx_) == grasp_bin_) {
          out.reward = -1.0f;
          ++releases_;
        }
      } else {
        for (size_t i = 0; i < objects_.size(); ++i) {
          if (objects_[i].x == gx_ && objects_[i].y == gy_) {
            holding_ = static_cast<int>(i);
            grasp_bin_ = bin_of(gx_);
            out.reward = 1.0f;
            ++grasps_;
            break;
          }
        }
      }
      break;
    default:
      throw std::invalid_argument("grid_pick_place action index out of range");
  }

  if (a <= 3) {
    // A held object can pass the divider only while raised; the empty gripper
    // travels above the bins freely.
    const bool crosses = bin_of(nx) != bin_of(gx_);
    if (crosses && holding_ >= 0 && gz_ == 0) {
      nx = gx_;
      ny = gy_;
    }
    gx_ = nx;
    gy_ = ny;
    if (holding_ >= 0 && bin_of(gx_) != grasp_bin_) {
      // Above the correct bin: the gripper opens automatically.
      objects_[static_cast<size_t>(holding_)] = {gx_, gy_};
      holding_ = -1;
      gz_ = 0;
      out.reward = 10.0f;
      ++placements_;
    }
  }

  ++steps_;
  out.is_last = episode_limit_ > 0 && steps_ >= episode_limit_;
  out.obs = observe();
  return out;
}

void GridPickPlaceEnv::save_state(std::ostream& os) const {
  io::write_u64(os, rng_.state());
  io::write_u32(os, static_cast<uint32_t>(steps_));
  for (int v : {gx_, gy_, gz_, holding_, grasp_bin_}) io::write_i64(os, v);
  io::write_u8(os, tint_ ? 1 : 0);
  io::write_u32(os, static_cast<uint32_t>(objects_.size()));
  for (const auto& obj : objects_) {
    io::write_i64(os, obj.x);
    io::write_i64(os, obj.y);
  }
  io::write_i64(os, grasps_);
  io::write_i64(os, placements_);
  io::write_i64(os, releases_);
}

void GridPickPlaceEnv::load_state(std::istream& is) {
  rng_.set_state(io::read_u64(is));
  steps_ = static_cast<int>(io::read_u32(is));
  gx_ = static_cast<int>(io::read_i64(is));
  gy_ = static_cast<int>(io::read_i64(is));
  gz_ = static_cast<int>(io::read_i64(is));
  holding_ = static_cast<int>(io::read_i64(is));
  grasp_bin_ = static_cast<int>(io::read_i64(is));
  tint_ = io::read_u8(is) != 0;
  objects_.resize(io::read_u32(is));
  for (auto& obj : objects_) {
    obj.x = static_cast<int>(io::read_i64(is));
    obj.y = static_cast<int>(io::read_i64(is));
  }
  grasps_ = io::read_i64(is);
  placements_ = io::read_i64(is);
  releases_ = io::read_i64(is);
}

Observation GridPickPlaceEnv::observe() const {
  Observation obs;
  ImageBuf img;
  render(img);
  obs.entries.emplace("image", std::move(img));
  VecBuf vec;
  vec.values = {static_cast<float>(gx_) / static_cast<float>(2 * gw_ - 1),
                static_cast<float>(gy_) / static_cast<float>(gh_ - 1),
                static_cast<float>(gz_), holding_ >= 0 ? 1.0f : 0.0f};
  obs.entries.emplace("proprio", std::move(vec));
  return obs;
}

void GridPickPlaceEnv::render(ImageBuf& img) const {
  const int s = image_size_;
  const int channels = depth_ ? 4 : 3;
  img.h = s;
  img.w = s;
  img.c = channels;
  img.pixels.assign(static_cast<size_t>(s) * s * channels, 0);

  const int cell = std::max(1, s / (2 * gw_));
  const int x_off = (s - cell * 2 * gw_) / 2;
  const int y_off = (s - cell * gh_) / 2;

  auto put = [&](int px, int py, Color c, uint8_t depth_value) {
    if (px < 0 || px >= s || py < 0 || py >= s) return;
    size_t base = (static_cast<size_t>(py) * s + px) * channels;
    float rf = c.r, gf = c.g, bf = c.b;
    if (tint_) {
      rf = std::min(255.0f, rf * 1.5f);
      gf = gf * 0.6f;
      bf = std::min(255.0f, bf * 1.2f);
    }
    img.pixels[base + 0] = static_cast<uint8_t>(rf);
    img.pixels[base + 1] = static_cast<uint8_t>(gf);
    img.pixels[base + 2] = static_cast<uint8_t>(bf);
    if (depth_) img.pixels[base + 3] = depth_value;
  };
  auto fill_cell = [&](int cx, int cy, Color c, uint8_t depth_value, int inset) {
    for (int py = cy * cell + inset; py < (cy + 1) * cell - inset; ++py)
      for (int px = cx * cell + inset; px < (cx + 1) * cell - inset; ++px)
        put(x_off + px, y_off + py, c, depth_value);
  };

  for (int cy = 0; cy < gh_; ++cy)
    for (int cx = 0; cx < 2 * gw_; ++cx)
      fill_cell(cx, cy, cx < gw_ ? kLeftBin : kRightBin, 20, 0);

  for (size_t i = 0; i < objects_.size(); ++i) {
    if (static_cast<int>(i) == holding_) continue;
    fill_cell(objects_[i].x, objects_[i].y, kObjectColors[i % 6], 90, cell >= 4 ? 1 : 0);
  }

  // Gripper: white when empty, carried object's color when holding, drawn
  // brighter and at full depth when raised.
  Color gripper = holding_ >= 0 ? kObjectColors[static_cast<size_t>(holding_) % 6]
                                : Color{230, 230, 230};
  if (gz_ == 1) gripper = {static_cast<uint8_t>(std::min(255, gripper.r + 40)),
                           static_cast<uint8_t>(std::min(255, gripper.g + 40)),
                           static_cast<uint8_t>(std::min(255, gripper.b + 40))};
  fill_cell(gx_, gy_, gripper, gz_ == 1 ? 255 : 160, 0);
}

}  // namespace dreamer::envs
