#include <doctest.h>

#include <cmath>

#include "dreamer/envs/grid_pick_place.hpp"
#include "dreamer/envs/point_nav.hpp"
#include "dreamer/envs/toggle.hpp"
#include "dreamer/envs/toy_quadruped.hpp"

using namespace dreamer;
using namespace dreamer::envs;

namespace {

QuadrupedState standing_state() {
  QuadrupedState s;
  s.up = {0.0f, 0.0f, 1.0f};
  s.q_hip = {-0.2f, -0.2f, -0.2f, -0.2f};
  s.q_shoulder = {-0.2f, -0.2f, -0.2f, -0.2f};
  s.q_knee = {1.0f, 1.0f, 1.0f, 1.0f};
  s.velocity = {0.3f, 0.0f, 0.0f};
  return s;
}

}  // namespace

TEST_CASE("a1 reward: upright term is zero when exactly upright") {
  QuadrupedState s = standing_state();
  s.velocity = {0.0f, 0.0f, 0.0f};
  auto r = a1_reward(s);
  CHECK(r.terms[0] == doctest::Approx(0.0f));
}

TEST_CASE("a1 reward: exact pose terms hit 1, one joint off gives 0.75") {
  QuadrupedState s = standing_state();
  auto r = a1_reward(s);
  CHECK(r.terms[1] == doctest::Approx(1.0f));
  CHECK(r.terms[2] == doctest::Approx(1.0f));
  CHECK(r.terms[3] == doctest::Approx(1.0f));

  s.q_hip = {0.8f, -0.2f, -0.2f, -0.2f};  // L1 distance 1.0
  auto r2 = a1_reward(s);
  CHECK(r2.terms[1] == doctest::Approx(0.75f));
}

TEST_CASE("a1 reward: velocity term at the target speed is 10") {
  QuadrupedState s = standing_state();
  auto r = a1_reward(s);
  CHECK(r.terms[4] == doctest::Approx(10.0f));
}

TEST_CASE("a1 reward: fully satisfied state totals 13") {
  auto r = a1_reward(standing_state());
  for (bool g : r.gates) CHECK(g);
  CHECK(r.total == doctest::Approx(13.0f));
}

TEST_CASE("a1 reward: supine collapses every later term") {
  QuadrupedState s = standing_state();
  s.up = {0.0f, 0.0f, -1.0f};
  auto r = a1_reward(s);
  CHECK(r.terms[0] == doctest::Approx(-1.0f));
  CHECK(r.gates[0]);
  for (int i = 1; i < 5; ++i) CHECK_FALSE(r.gates[static_cast<size_t>(i)]);
  CHECK(r.total == doctest::Approx(-1.0f));
}

TEST_CASE("a1 reward: unit-range switch lifts the maximum to 14") {
  auto r = a1_reward(standing_state(), /*upright_unit_range=*/true);
  CHECK(r.terms[0] == doctest::Approx(1.0f));
  CHECK(r.total == doctest::Approx(14.0f));
}

TEST_CASE("a1 reward: documented 13-versus-14 discrepancy") {
  // The printed upright term spans [-1, 0], capping the printed sum at 13;
  // the headline maximum of 14 only appears under the unit-range variant.
  const float printed_max = a1_reward(standing_state(), false).total;
  const float shifted_max = a1_reward(standing_state(), true).total;
  CHECK(printed_max == doctest::Approx(13.0f));
  CHECK(shifted_max == doctest::Approx(14.0f));
  CHECK(shifted_max - printed_max == doctest::Approx(1.0f));
}

TEST_CASE("a1 reward: gating is monotone in the earlier satisfactions") {
  QuadrupedState s = standing_state();
  // Degrade the hip term below the 0.7 satisfaction threshold.
  s.q_hip = {1.3f, -0.2f, -0.2f, -0.2f};  // L1 = 1.5 -> term 0.625 < 0.7
  auto r = a1_reward(s);
  CHECK(r.gates[1]);
  CHECK_FALSE(r.gates[2]);
  CHECK_FALSE(r.gates[3]);
  CHECK_FALSE(r.gates[4]);
  CHECK(r.total == doctest::Approx(r.terms[0] + r.terms[1]));
}

TEST_CASE("a1 reward: permuting joints within one group changes nothing") {
  QuadrupedState s = standing_state();
  s.q_knee = {0.8f, 1.1f, 1.3f, 0.9f};
  auto base = a1_reward(s);
  QuadrupedState p = s;
  p.q_knee = {1.3f, 0.9f, 0.8f, 1.1f};
  auto perm = a1_reward(p);
  CHECK(base.total == doctest::Approx(perm.total));
  CHECK(base.terms[3] == doctest::Approx(perm.terms[3]));
}

TEST_CASE("a1 reward: non-unit up vector is rejected") {
  QuadrupedState s = standing_state();
  s.up = {0.0f, 0.0f, 1.4f};
  CHECK_THROWS_AS(a1_reward(s), std::invalid_argument);
}

TEST_CASE("toy quadruped: null actions keep the supine reward") {
  ToyQuadrupedEnv env({}, 0);
  env.reset();
  Action null_action;
  null_action.kind = ActionSpec::Kind::continuous;
  null_action.values.assign(12, 0.0f);
  for (int i = 0; i < 50; ++i) {
    auto out = env.step(null_action);
    CHECK(out.reward == doctest::Approx(-1.0f).epsilon(1e-3));
  }
}

TEST_CASE("toy quadruped: scripted controller reaches at least 12 within 200 steps") {
  ToyQuadrupedEnv env({}, 0);
  env.reset();
  float best = -10.0f;
  for (int i = 0; i < 200; ++i) {
    auto out = env.step(env.scripted_action(i));
    best = std::max(best, out.reward);
  }
  CHECK(best >= 12.0f);
}

TEST_CASE("toy quadruped: random policy averages well under 2") {
  ToyQuadrupedEnv env({}, 1);
  env.reset();
  Rng rng(5);
  double total = 0.0;
  const int steps = 10000;
  for (int i = 0; i < steps; ++i) {
    Action a;
    a.kind = ActionSpec::Kind::continuous;
    for (int j = 0; j < 12; ++j) a.values.push_back(rng.uniform(-1.0f, 1.0f));
    total += env.step(a).reward;
  }
  CHECK(total / steps < 2.0);
}

namespace {

Action discrete(int index) {
  Action a;
  a.kind = ActionSpec::Kind::discrete;
  a.index = index;
  return a;
}

// Drive the gripper to a target cell with +-x / +-y moves.
void drive_to(GridPickPlaceEnv& env, int tx, int ty, float* reward_sum = nullptr) {
  for (int guard = 0; guard < 200; ++guard) {
    int dx = tx - env.gripper_x();
    int dy = ty - env.gripper_y();
    if (dx == 0 && dy == 0) return;
    Action a = dx > 0 ? discrete(0) : dx < 0 ? discrete(1) : dy > 0 ? discrete(2) : discrete(3);
    auto out = env.step(a);
    if (reward_sum) *reward_sum += out.reward;
  }
}

}  // namespace

TEST_CASE("grid pick place: grasp, same-bin release, and placement rewards") {
  EnvParams params{{"grid", "6"}, {"image_size", "32"}};
  GridPickPlaceEnv env(params, 3);
  env.reset();

  auto obj = env.objects()[0];
  drive_to(env, obj.x, obj.y);
  auto grasp = env.step(discrete(6));
  CHECK(grasp.reward == doctest::Approx(1.0f));
  CHECK(env.holding() == 0);

  // Release right here: same bin, -1.
  auto release = env.step(discrete(6));
  CHECK(release.reward == doctest::Approx(-1.0f));
  CHECK(env.holding() == -1);

  // Grasp again, raise, carry over the divider: +10 on entry.
  auto regrasp = env.step(discrete(6));
  CHECK(regrasp.reward == doctest::Approx(1.0f));
  auto raise = env.step(discrete(4));
  CHECK(raise.reward == doctest::Approx(0.0f));
  float placement_reward = 0.0f;
  bool placed = false;
  for (int guard = 0; guard < 50 && !placed; ++guard) {
    auto out = env.step(discrete(0));  // +x toward the right bin
    if (out.reward != 0.0f) {
      placement_reward = out.reward;
      placed = true;
    }
  }
  CHECK(placed);
  CHECK(placement_reward == doctest::Approx(10.0f));
  CHECK(env.holding() == -1);
  CHECK(env.placement_events() == 1);
}

TEST_CASE("grid pick place: vertical moves are no-ops while empty") {
  EnvParams params{{"grid", "6"}, {"image_size", "32"}};
  GridPickPlaceEnv env(params, 4);
  env.reset();
  const int x = env.gripper_x(), y = env.gripper_y();
  auto before = env.step(discrete(4));
  CHECK(before.reward == doctest::Approx(0.0f));
  CHECK(env.gripper_x() == x);
  CHECK(env.gripper_y() == y);
  CHECK(env.gripper_z() == 0);
}

TEST_CASE("grid pick place: divider blocks a held object at ground level") {
  EnvParams params{{"grid", "6"}, {"image_size", "32"}};
  GridPickPlaceEnv env(params, 5);
  env.reset();
  auto obj = env.objects()[0];
  drive_to(env, obj.x, obj.y);
  env.step(discrete(6));  // grasp
  REQUIRE(env.holding() == 0);
  drive_to(env, 5, env.gripper_y());  // to the divider edge, still lowered
  auto blocked = env.step(discrete(0));
  CHECK(blocked.reward == doctest::Approx(0.0f));
  CHECK(env.gripper_x() == 5);  // did not cross
  env.step(discrete(4));        // raise
  auto crossed = env.step(discrete(0));
  CHECK(crossed.reward == doctest::Approx(10.0f));
  CHECK(env.gripper_x() == 6);
}

TEST_CASE("grid pick place: full round trip scores K*(+1+10) per direction") {
  EnvParams params{{"grid", "6"}, {"image_size", "32"}};
  GridPickPlaceEnv env(params, 6);
  env.reset();
  const int k = env.object_count();

  float total = 0.0f;
  auto carry_all = [&](int target_x) {
    for (int i = 0; i < k; ++i) {
      // Find any object still in the source bin.
      int idx = -1;
      for (int j = 0; j < k; ++j) {
        const bool in_target = (env.objects()[static_cast<size_t>(j)].x >= 6) == (target_x >= 6);
        if (!in_target) { idx = j; break; }
      }
      REQUIRE(idx >= 0);
      auto obj = env.objects()[static_cast<size_t>(idx)];
      drive_to(env, obj.x, obj.y, &total);
      total += env.step(discrete(6)).reward;  // grasp
      total += env.step(discrete(4)).reward;  // raise
      // Carry toward the target bin until auto-release.
      for (int guard = 0; guard < 100 && env.holding() >= 0; ++guard)
        total += env.step(discrete(target_x >= 6 ? 0 : 1)).reward;
    }
  };
  carry_all(8);
  CHECK(total == doctest::Approx(static_cast<float>(k) * 11.0f));
  carry_all(2);
  CHECK(total == doctest::Approx(static_cast<float>(k) * 22.0f));
  CHECK(env.placement_events() == 2 * k);
  CHECK(env.release_events() == 0);
}

TEST_CASE("grid pick place: tint shift changes pixels, dynamics unchanged") {
  EnvParams params{{"grid", "6"}, {"image_size", "32"}};
  GridPickPlaceEnv env(params, 7);
  Observation before = env.reset();
  env.set_tint_shift(true);
  auto out = env.step(discrete(4));  // no-op move
  const auto& img_before = before.image("image");
  const auto& img_after = out.obs.image("image");
  CHECK(img_before.pixels != img_after.pixels);
  CHECK(env.gripper_z() == 0);
}

TEST_CASE("grid pick place: depth variant adds a channel") {
  EnvParams params{{"grid", "6"}, {"image_size", "32"}, {"depth", "true"}};
  GridPickPlaceEnv env(params, 8);
  auto obs = env.reset();
  CHECK(obs.image("image").c == 4);
  CHECK(env.space().modalities[0].shape == std::vector<int>{32, 32, 4});
}

TEST_CASE("point nav: zero distance at the goal, corner gives -sqrt(2)/2") {
  EnvParams at_goal{{"start_x", "0.5"}, {"start_y", "0.5"}, {"image_size", "32"}};
  PointNavEnv env(at_goal, 1);
  Action idle;
  idle.kind = ActionSpec::Kind::continuous;
  idle.values = {0.0f, 0.0f};
  auto out = env.step(idle);
  CHECK(out.reward == doctest::Approx(0.0f).epsilon(1e-5));

  EnvParams corner{{"start_x", "0"}, {"start_y", "0"}, {"image_size", "32"}};
  PointNavEnv env2(corner, 1);
  auto out2 = env2.step(idle);
  CHECK(out2.reward == doctest::Approx(-std::sqrt(2.0f) / 2.0f).epsilon(1e-4));
}

TEST_CASE("point nav: episode ends after exactly 100 steps") {
  EnvParams params{{"image_size", "32"}};
  PointNavEnv env(params, 2);
  env.reset();
  Action idle;
  idle.kind = ActionSpec::Kind::continuous;
  idle.values = {0.1f, -0.1f};
  for (int i = 0; i < 99; ++i) CHECK_FALSE(env.step(idle).is_last);
  CHECK(env.step(idle).is_last);
  // Counter restarts for the next episode.
  CHECK_FALSE(env.step(idle).is_last);
}

TEST_CASE("point nav: frames are invariant to the agent's heading") {
  EnvParams params{{"start_x", "0.3"}, {"start_y", "0.7"}, {"image_size", "32"}};
  PointNavEnv env(params, 3);
  env.set_heading(0.3f);
  Action idle;
  idle.kind = ActionSpec::Kind::continuous;
  idle.values = {0.0f, 0.0f};
  auto a = env.step(idle);

  PointNavEnv env2(params, 3);
  env2.set_heading(2.9f);
  auto b = env2.step(idle);
  CHECK(a.obs.image("image").pixels == b.obs.image("image").pixels);
}

TEST_CASE("point nav: resets scramble the pose") {
  EnvParams params{{"image_size", "32"}};
  PointNavEnv env(params, 4);
  auto first = env.reset();
  auto second = env.reset();
  CHECK(first.image("image").pixels != second.image("image").pixels);
}

TEST_CASE("toggle env alternates its bit") {
  ToggleEnv env({}, 0);
  auto obs = env.reset();
  float prev = obs.vec("bit").values[0];
  Action a;
  a.kind = ActionSpec::Kind::discrete;
  a.index = 0;
  for (int i = 0; i < 10; ++i) {
    auto out = env.step(a);
    const float bit = out.obs.vec("bit").values[0];
    CHECK(bit == 1.0f - prev);
    prev = bit;
  }
}
