#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cadre/errors.hpp"
#include "cadre/scenario_model.hpp"
#include "test_helpers.hpp"

namespace cadre {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(BicycleStep, StraightConstantSpeed) {
  const auto s = bicycle_step({0, 0, 0, 10}, {0, 0}, 3.0, 0.1);
  EXPECT_DOUBLE_EQ(s.x, 1.0);
  EXPECT_DOUBLE_EQ(s.y, 0.0);
  EXPECT_DOUBLE_EQ(s.psi, 0.0);
  EXPECT_DOUBLE_EQ(s.v, 10.0);
}

TEST(BicycleStep, PositionUsesPreStepSpeed) {
  const auto s = bicycle_step({0, 0, 0, 10}, {2, 0}, 3.0, 0.1);
  EXPECT_DOUBLE_EQ(s.x, 1.0);
  EXPECT_DOUBLE_EQ(s.v, 10.2);
}

TEST(BicycleStep, YawRateFromSteering) {
  const auto s = bicycle_step({0, 0, 0, 10}, {0, kPi / 8}, 3.0, 0.1);
  const double expected = 10.0 * std::tan(kPi / 8) / 3.0 * 0.1;
  EXPECT_NEAR(s.psi, expected, 1e-15);
  EXPECT_NEAR(s.psi, 0.13807, 1e-5);
}

TEST(BicycleStep, HeadingWrapsIntoRange) {
  const auto s = bicycle_step({0, 0, kPi - 0.01, 10}, {0, 0.5}, 2.8, 0.1);
  EXPECT_LE(s.psi, kPi);
  EXPECT_GE(s.psi, -kPi);
  EXPECT_LT(s.psi, 0.0);
}

TEST(BicycleStep, Deterministic) {
  const VehicleState s0{1.234, -5.6, 0.7, 13.1};
  const Action a{0.3, -0.2};
  const auto a1 = bicycle_step(s0, a, 2.8, 0.1);
  const auto a2 = bicycle_step(s0, a, 2.8, 0.1);
  EXPECT_EQ(a1, a2);
}

TEST(Rollout, ZeroActionsDriveStraight) {
  const std::vector<Action> actions(10);
  const auto states = rollout({0, 0, 0, 10}, actions, 3.0, 0.1);
  ASSERT_EQ(states.size(), 11u);
  EXPECT_NEAR(states.back().x, 10.0, 1e-12);
  EXPECT_NEAR(states.back().y, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(states.back().v, 10.0);
  EXPECT_EQ(states.front(), (VehicleState{0, 0, 0, 10}));
}

TEST(Rollout, ConstantAcceleration) {
  const std::vector<Action> actions(10, Action{2.0, 0.0});
  const auto states = rollout({0, 0, 0, 0}, actions, 3.0, 0.1);
  EXPECT_NEAR(states.back().v, 2.0, 1e-12);
}

TEST(Rollout, ConstantSteeringIntegratesHeading) {
  const std::vector<Action> actions(100, Action{0.0, 0.05991});
  const auto states = rollout({0, 0, 0, 10}, actions, 3.0, 0.1);
  // Oracle: constant speed, so heading grows by the same increment every step.
  const double per_step = 10.0 * std::tan(0.05991) / 3.0 * 0.1;
  EXPECT_NEAR(states.back().psi, 100 * per_step, 1e-12);
  EXPECT_NEAR(states.back().psi, 2.0, 1e-3);
}

TEST(RecoverActions, StraightLineIsZero) {
  std::vector<VehicleState> traj;
  for (int t = 0; t < 5; ++t) traj.push_back({10.0 * 0.1 * t, 0, 0, 10});
  const auto actions = recover_actions(traj, 3.0, 0.1);
  ASSERT_EQ(actions.size(), 4u);
  for (const auto& a : actions) {
    EXPECT_NEAR(a.accel, 0.0, 1e-12);
    EXPECT_NEAR(a.steer, 0.0, 1e-12);
  }
}

TEST(RecoverActions, ConstantArc) {
  // Built independently of bicycle_step: heading advances 0.2 rad/s at 10 m/s.
  std::vector<VehicleState> traj{{0, 0, 0, 10}};
  for (int t = 0; t < 50; ++t) {
    const auto& p = traj.back();
    traj.push_back({p.x + 10 * std::cos(p.psi) * 0.1, p.y + 10 * std::sin(p.psi) * 0.1,
                    std::remainder(p.psi + 0.02, 2 * kPi), 10});
  }
  const auto actions = recover_actions(traj, 3.0, 0.1);
  for (const auto& a : actions) {
    EXPECT_NEAR(a.steer, std::atan(0.2 * 3.0 / 10.0), 1e-12);
    EXPECT_NEAR(a.steer, 0.059928, 1e-6);
    EXPECT_NEAR(a.accel, 0.0, 1e-12);
  }
}

TEST(RecoverActions, ArcAcrossHeadingWrap) {
  std::vector<VehicleState> traj{{0, 0, kPi - 0.03, 10}};
  for (int t = 0; t < 5; ++t) {
    traj.push_back(bicycle_step(traj.back(), {0.0, 0.1}, 2.8, 0.1));
  }
  for (const auto& a : recover_actions(traj, 2.8, 0.1)) EXPECT_NEAR(a.steer, 0.1, 1e-12);
}

TEST(RecoverActions, StandstillSteeringIsZero) {
  const std::vector<VehicleState> traj{{0, 0, 0, 0.05}, {0.005, 0, 0.3, 0.05}};
  EXPECT_DOUBLE_EQ(recover_actions(traj, 2.8, 0.1)[0].steer, 0.0);
}

TEST(RecoverActions, RejectsShortTrajectory) {
  const std::vector<VehicleState> one{{0, 0, 0, 1}};
  EXPECT_THROW(recover_actions(one, 2.8, 0.1), ValidationError);
}

TEST(RoundTrip, RandomActionSequences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> speed(0.5, 30.0);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    const VehicleState s0{0.0, 0.0, heading(rng), speed(rng)};
    const auto actions = testing::random_actions(rng, 150, s0.v, 0.1);
    const auto traj = rollout(s0, actions, 2.8, 0.1);
    const auto recovered = recover_actions(traj, 2.8, 0.1);
    ASSERT_EQ(recovered.size(), actions.size());
    for (std::size_t t = 0; t < actions.size(); ++t) {
      ASSERT_NEAR(recovered[t].accel, actions[t].accel, 1e-9);
      ASSERT_NEAR(recovered[t].steer, actions[t].steer, 1e-9);
    }
    const auto replay = rollout(s0, recovered, 2.8, 0.1);
    for (std::size_t t = 0; t < traj.size(); ++t) {
      ASSERT_LE(std::hypot(replay[t].x - traj[t].x, replay[t].y - traj[t].y), 1e-6);
      ASSERT_GE(replay[t].psi, -kPi);
      ASSERT_LE(replay[t].psi, kPi);
    }
  }
}

TEST(ApplyPerturbation, ZeroIsIdentity) {
  std::mt19937_64 rng(3);
  const auto actions = testing::random_actions(rng, 20, 10.0, 0.1);
  Perturbation p{std::vector<Action>(20), 1};
  const auto out = apply_perturbation(actions, p, {});
  EXPECT_EQ(out, actions);
}

TEST(ApplyPerturbation, AtBounds) {
  const std::vector<Action> actions(5);
  Perturbation p{std::vector<Action>(5, Action{2.0, kPi / 8}), 1};
  for (const auto& a : apply_perturbation(actions, p, {})) {
    EXPECT_DOUBLE_EQ(a.accel, 2.0);
    EXPECT_DOUBLE_EQ(a.steer, kPi / 8);
  }
}

TEST(ApplyPerturbation, ClampsToBounds) {
  const std::vector<Action> actions(5);
  Perturbation p{std::vector<Action>(5, Action{5.0, 1.0}), 1};
  for (const auto& a : apply_perturbation(actions, p, {})) {
    EXPECT_DOUBLE_EQ(a.accel, 2.0);
    EXPECT_DOUBLE_EQ(a.steer, kPi / 8);
  }
}

TEST(ApplyPerturbation, SummedSteeringRespectsPhysicalLimit) {
  const std::vector<Action> actions(3, Action{0.0, 1.0});
  Perturbation p{std::vector<Action>(3, Action{0.0, kPi / 8}), 1};
  for (const auto& a : apply_perturbation(actions, p, {})) {
    EXPECT_DOUBLE_EQ(a.steer, kPi / 3);
  }
}

TEST(ApplyPerturbation, LengthRules) {
  const std::vector<Action> actions(5);
  Perturbation longer{std::vector<Action>(7, Action{1.0, 0.0}), 1};
  EXPECT_EQ(apply_perturbation(actions, longer, {}).size(), 5u);
  Perturbation shorter{std::vector<Action>(4), 1};
  EXPECT_THROW(apply_perturbation(actions, shorter, {}), ValidationError);
}

TEST(Perturbation, FlatLayoutInterleaves) {
  const std::vector<double> flat{0.1, 0.2, 0.3, 0.4};
  const auto p = Perturbation::from_flat(flat, 2);
  ASSERT_EQ(p.deltas.size(), 2u);
  EXPECT_EQ(p.deltas[1], (Action{0.3, 0.4}));
  EXPECT_EQ(p.to_flat(), flat);
}

TEST(Scenario, ValidationCatchesRaggedSteps) {
  auto sc = testing::straight_scene({{20.0, 0.0}}, 10.0, 10);
  EXPECT_NO_THROW(sc.validate());
  EXPECT_EQ(sc.horizon(), 10u);
  sc.states[3].pop_back();
  EXPECT_THROW(sc.validate(), ValidationError);
}

TEST(Scenario, NeedsBackgroundVehicle) {
  auto sc = testing::straight_scene({}, 10.0, 10);
  EXPECT_THROW(sc.validate(), ValidationError);
}

TEST(Geometry, WheelbaseMustFitLength) {
  EXPECT_THROW((VehicleGeometry{2.0, 2.0, 3.0}.validate()), ValidationError);
  EXPECT_NO_THROW(VehicleGeometry{}.validate());
}

}  // namespace
}  // namespace cadre
