#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "cadre/errors.hpp"
#include "cadre/scenes.hpp"
#include "cadre/traffic_sim.hpp"
#include "test_helpers.hpp"

namespace cadre {
namespace {

constexpr double kPi = std::numbers::pi;

// ---- ego policy --------------------------------------------------------------

std::vector<VehicleState> straight_reference(double v = 10.0, std::size_t n = 50) {
  std::vector<VehicleState> ref;
  for (std::size_t t = 0; t < n; ++t) ref.push_back({v * 0.1 * t, 0.0, 0.0, v});
  return ref;
}

TEST(EgoPolicy, BrakesAndSteersAwayFromThreat) {
  const auto ref = straight_reference();
  const std::vector<VehicleState> others{{4.0 * std::cos(0.3), 4.0 * std::sin(0.3), 0.0, 5.0}};
  const auto a = ego_policy_step(ref[0], ref, 0, others, {}, 2.8, 0.1);
  EXPECT_DOUBLE_EQ(a.accel, -7.0);
  EXPECT_DOUBLE_EQ(a.steer, -kPi / 8);
}

TEST(EgoPolicy, ThreatOnTheRightSteersLeft) {
  const auto ref = straight_reference();
  const std::vector<VehicleState> others{{4.0 * std::cos(-0.5), 4.0 * std::sin(-0.5), 0.0, 5.0}};
  const auto a = ego_policy_step(ref[0], ref, 0, others, {}, 2.8, 0.1);
  EXPECT_DOUBLE_EQ(a.accel, -7.0);
  EXPECT_DOUBLE_EQ(a.steer, kPi / 8);
}

TEST(EgoPolicy, DeadAheadSteersLeft) {
  const auto ref = straight_reference();
  const std::vector<VehicleState> others{{3.0, 0.0, 0.0, 5.0}};
  const auto a = ego_policy_step(ref[0], ref, 0, others, {}, 2.8, 0.1);
  EXPECT_DOUBLE_EQ(a.steer, kPi / 8);
}

TEST(EgoPolicy, NearestThreatDecidesDirection) {
  const auto ref = straight_reference();
  const std::vector<VehicleState> others{{4.5 * std::cos(0.2), 4.5 * std::sin(0.2), 0, 0},
                                         {3.0 * std::cos(-0.4), 3.0 * std::sin(-0.4), 0, 0}};
  const auto a = ego_policy_step(ref[0], ref, 0, others, {}, 2.8, 0.1);
  EXPECT_DOUBLE_EQ(a.steer, kPi / 8);
}

TEST(EgoPolicy, PerfectTrackingIsQuiet) {
  const auto ref = straight_reference();
  const std::vector<VehicleState> others{{30.0, 0.0, 0.0, 10.0}};
  const auto a = ego_policy_step(ref[5], ref, 5, others, {}, 2.8, 0.1);
  EXPECT_NEAR(a.accel, 0.0, 1e-12);
  EXPECT_NEAR(a.steer, 0.0, 1e-12);
}

TEST(EgoPolicy, OutsideConeIsIgnored) {
  const auto ref = straight_reference();
  const std::vector<VehicleState> others{{0.0, 4.0, 0.0, 10.0}};  // due left
  const auto a = ego_policy_step(ref[0], ref, 0, others, {}, 2.8, 0.1);
  EXPECT_NE(a.accel, -7.0);
  EXPECT_NEAR(a.accel, 0.0, 1e-12);
}

TEST(EgoPolicy, TrackingAccelerationIsClamped) {
  auto ref = straight_reference();
  for (auto& s : ref) s.v = 30.0;
  const auto a = ego_policy_step({0, 0, 0, 10}, ref, 0, {}, {}, 2.8, 0.1);
  EXPECT_DOUBLE_EQ(a.accel, 2.0);
}

TEST(EgoPolicy, EvasiveTriggerProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-8.0, 8.0);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  const auto ref = straight_reference();
  const EgoPolicyConfig cfg;
  for (int trial = 0; trial < 2000; ++trial) {
    const VehicleState ego{0.0, 0.0, heading(rng), 8.0};
    std::vector<VehicleState> others(3);
    bool expect_brake = false;
    for (auto& o : others) {
      o = {coord(rng), coord(rng), heading(rng), 5.0};
      const double d = std::hypot(o.x, o.y);
      const double bearing = normalize_angle(std::atan2(o.y, o.x) - ego.psi);
      if (d < 5.0 && std::abs(bearing) < kPi / 4) expect_brake = true;
    }
    const auto a = ego_policy_step(ego, ref, 0, others, cfg, 2.8, 0.1);
    if (expect_brake) ASSERT_EQ(a.accel, -7.0);
  }
}

// ---- collision -------------------------------------------------------------

// Independent oracle: polygon intersection by edge crossing and containment.
std::array<std::array<double, 2>, 4> corners(const VehicleState& s, const VehicleGeometry& g) {
  const double c = std::cos(s.psi), sn = std::sin(s.psi);
  const double hl = g.length / 2, hw = g.width / 2;
  std::array<std::array<double, 2>, 4> out{};
  const double sx[4] = {hl, -hl, -hl, hl};
  const double sy[4] = {hw, hw, -hw, -hw};
  for (int i = 0; i < 4; ++i) out[i] = {s.x + c * sx[i] - sn * sy[i], s.y + sn * sx[i] + c * sy[i]};
  return out;
}

bool inside(const std::array<std::array<double, 2>, 4>& poly, const std::array<double, 2>& p) {
  bool pos = false, neg = false;
  for (int i = 0; i < 4; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % 4];
    const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    if (cross > 0) pos = true;
    if (cross < 0) neg = true;
  }
  return !(pos && neg);
}

bool segments_cross(const std::array<double, 2>& p1, const std::array<double, 2>& p2,
                    const std::array<double, 2>& q1, const std::array<double, 2>& q2) {
  auto orient = [](const auto& a, const auto& b, const auto& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  };
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool polygon_overlap(const VehicleState& a, const VehicleGeometry& ga, const VehicleState& b,
                     const VehicleGeometry& gb) {
  const auto pa = corners(a, ga), pb = corners(b, gb);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (segments_cross(pa[i], pa[(i + 1) % 4], pb[j], pb[(j + 1) % 4])) return true;
    }
  }
  return inside(pa, pb[0]) || inside(pb, pa[0]);
}

TEST(Collision, IdenticalStatesOverlap) {
  const VehicleState s{3, 4, 0.5, 10};
  EXPECT_TRUE(check_collision(s, {}, s, {}));
}

TEST(Collision, FarApartOnX) {
  EXPECT_FALSE(check_collision({0, 0, 0, 0}, {}, {10, 0, 0, 0}, {}));
}

TEST(Collision, OverlapAlongX) {
  // x projections overlap by 4.7 - 4.0, y projections fully.
  EXPECT_TRUE(check_collision({0, 0, 0, 0}, {}, {4.0, 0, 0, 0}, {}));
  EXPECT_FALSE(check_collision({0, 0, 0, 0}, {}, {4.8, 0, 0, 0}, {}));
}

TEST(Collision, DiagonalGapSeparatedByRotatedAxis) {
  // Corners near each other but a rotated axis separates them.
  const VehicleState a{0, 0, kPi / 4, 0};
  const VehicleState b{3.4, 3.4, kPi / 4, 0};
  EXPECT_EQ(check_collision(a, {}, b, {}), polygon_overlap(a, {}, b, {}));
}

TEST(Collision, AgreesWithPolygonOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-6.0, 6.0);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  std::uniform_real_distribution<double> len(3.0, 6.0), wid(1.5, 2.5);
  int hits = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const VehicleState a{0.0, 0.0, heading(rng), 0};
    const VehicleState b{pos(rng), pos(rng), heading(rng), 0};
    const VehicleGeometry ga{len(rng), wid(rng), 2.5}, gb{len(rng), wid(rng), 2.5};
    const bool sat = check_collision(a, ga, b, gb);
    ASSERT_EQ(sat, polygon_overlap(a, ga, b, gb)) << "trial " << trial;
    ASSERT_EQ(sat, check_collision(b, gb, a, ga));
    hits += sat;
  }
  EXPECT_GT(hits, 1000);
}

// ---- objective and measures ------------------------------------------------

SimOutcome outcome_with(OutcomeKind kind, double min_d, std::size_t t_impact,
                        std::size_t horizon = 150) {
  SimOutcome o;
  o.kind = kind;
  o.min_ego_distance = min_d;
  o.t_impact = t_impact;
  o.horizon = horizon;
  o.ego_trace.assign(t_impact + 1, VehicleState{0, 0, 0, 10});
  o.target_trace.assign(t_impact + 1, VehicleState{5, 0, 0, 10});
  return o;
}

TEST(Objective, Cases) {
  EXPECT_DOUBLE_EQ(objective(outcome_with(OutcomeKind::EgoCollision, 0.5, 10)), 1.0);
  EXPECT_DOUBLE_EQ(objective(outcome_with(OutcomeKind::BackgroundCollision, 0.5, 10)), 0.0);
  EXPECT_NEAR(objective(outcome_with(OutcomeKind::NoCollision, 2.0, 10)), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(objective(outcome_with(OutcomeKind::NoCollision, 2.0, 10)), 0.135335, 1e-6);
  EXPECT_DOUBLE_EQ(objective(outcome_with(OutcomeKind::NoCollision, 0.0, 10)), 1.0);
}

TEST(Measures, MeanSteeringPerturbation) {
  auto o = outcome_with(OutcomeKind::EgoCollision, 0.0, 80);
  Perturbation p{std::vector<Action>(150, Action{0.0, kPi / 16}), 1};
  const auto m = measures(o, p, {});
  EXPECT_NEAR(m.m1, kPi / 16, 1e-15);
  EXPECT_NEAR(m.m1, 0.19635, 1e-5);
}

TEST(Measures, OnlyStepsBeforeImpactCount) {
  auto o = outcome_with(OutcomeKind::EgoCollision, 0.0, 4);
  std::vector<Action> deltas(10, Action{0.0, 0.0});
  deltas[0].steer = 0.2;
  deltas[3].steer = -0.1;
  deltas[4].steer = 0.3;  // at impact, excluded
  const auto m = measures(o, Perturbation{deltas, 1}, {});
  EXPECT_NEAR(m.m1, 0.3 / 4, 1e-15);
}

TEST(Measures, ClampedDeltasAreAveraged) {
  auto o = outcome_with(OutcomeKind::EgoCollision, 0.0, 5);
  const Perturbation p{std::vector<Action>(10, Action{0.0, -2.0}), 1};
  EXPECT_NEAR(measures(o, p, {}).m1, kPi / 8, 1e-15);
}

TEST(Measures, ImpactAtFirstStepIsDegenerate) {
  auto o = outcome_with(OutcomeKind::EgoCollision, 0.0, 0);
  std::vector<Action> deltas(10);
  deltas[0].steer = -0.25;
  EXPECT_TRUE(measures_degenerate(o));
  EXPECT_DOUBLE_EQ(measures(o, Perturbation{deltas, 1}, {}).m1, 0.25);
  EXPECT_DOUBLE_EQ(measures(o, Perturbation{deltas, 1}, {}).m2, 0.0);
}

TEST(Measures, NormalizedImpactTime) {
  auto o = outcome_with(OutcomeKind::NoCollision, 3.0, 75, 150);
  const auto m = measures(o, Perturbation{std::vector<Action>(150), 1}, {});
  EXPECT_DOUBLE_EQ(m.m2, 0.5);
}

TEST(Measures, ImpactAngleInEgoBodyFrame) {
  auto o = outcome_with(OutcomeKind::EgoCollision, 0.0, 0);
  o.ego_trace[0] = {0, 0, kPi / 2, 5};
  o.target_trace[0] = {0, 5, 0, 5};
  const Perturbation p{std::vector<Action>(5), 1};
  EXPECT_NEAR(measures(o, p, {}).m3, 0.0, 1e-15);

  o.ego_trace[0] = {0, 0, 0, 5};
  EXPECT_NEAR(measures(o, p, {}).m3, kPi / 2, 1e-15);
  o.target_trace[0] = {-5, -1e-12, 0, 5};
  EXPECT_NEAR(std::abs(measures(o, p, {}).m3), kPi, 1e-9);
}

TEST(Measures, TotalSteeringVariant) {
  auto o = outcome_with(OutcomeKind::EgoCollision, 0.0, 2);
  o.perturbed_actions = {{0, 0.5}, {0, -0.7}, {0, 0.1}};
  const Perturbation p{std::vector<Action>(3, Action{0, 0.05}), 1};
  EXPECT_NEAR(measures(o, p, {}, SteerMeasure::Total).m1, 0.6, 1e-15);
  EXPECT_NEAR(measures(o, p, {}, SteerMeasure::Perturbation).m1, 0.05, 1e-15);
}

// ---- simulate ----------------------------------------------------------------

TEST(Simulate, ZeroPerturbationReplaysWithoutCollision) {
  const auto sc = testing::straight_scene({{0.0, 7.0}});
  const Perturbation p{std::vector<Action>(sc.horizon()), 1};
  const auto r = simulate(sc, p, {}, {});
  EXPECT_EQ(r.outcome.kind, OutcomeKind::NoCollision);
  EXPECT_NEAR(r.outcome.min_ego_distance, 7.0, 1e-9);
  EXPECT_NEAR(r.f, std::exp(-7.0), 1e-12);
  EXPECT_LT(r.f, 1.0);
  EXPECT_EQ(r.outcome.ego_trace.size(), sc.horizon() + 1);
}

TEST(Simulate, SteeringIntoEgoCollides) {
  const auto sc = testing::straight_scene({{0.0, 3.5}});
  const Perturbation p{std::vector<Action>(sc.horizon(), Action{0.0, -kPi / 8}), 1};
  const auto r = simulate(sc, p, {}, {});
  EXPECT_EQ(r.outcome.kind, OutcomeKind::EgoCollision);
  EXPECT_DOUBLE_EQ(r.f, 1.0);
  // The trace ends at the first colliding step.
  const std::size_t t = r.outcome.t_impact;
  EXPECT_EQ(r.outcome.ego_trace.size(), t + 1);
  EXPECT_TRUE(check_collision(r.outcome.ego_trace[t], {}, r.outcome.target_trace[t], {}));
  EXPECT_FALSE(check_collision(r.outcome.ego_trace[t - 1], {}, r.outcome.target_trace[t - 1], {}));
  EXPECT_GT(r.m.m3, 0.0);  // the target starts on the ego's left
}

TEST(Simulate, RammingBackgroundVehicleScoresZero) {
  const auto sc = testing::straight_scene({{0.0, 3.5}, {0.0, 7.0}});
  const Perturbation p{std::vector<Action>(sc.horizon(), Action{0.0, kPi / 8}), 1};
  const auto r = simulate(sc, p, {}, {});
  EXPECT_EQ(r.outcome.kind, OutcomeKind::BackgroundCollision);
  EXPECT_DOUBLE_EQ(r.f, 0.0);
}

TEST(Simulate, ValidatesInputs) {
  const auto sc = testing::straight_scene({{0.0, 7.0}});
  EXPECT_THROW(simulate(sc, Perturbation{std::vector<Action>(sc.horizon()), 2}, {}, {}),
               ValidationError);
  EXPECT_THROW(simulate(sc, Perturbation{std::vector<Action>(sc.horizon()), 0}, {}, {}),
               ValidationError);
  EXPECT_THROW(simulate(sc, Perturbation{std::vector<Action>(sc.horizon() - 1), 1}, {}, {}),
               ValidationError);
}

TEST(Simulate, EgoNeverReverses) {
  // A stopped car dead ahead keeps the ego braking.
  auto sc = testing::straight_scene({{0.0, 20.0}});
  for (auto& step : sc.states) step[1] = {8.0, 0.0, 0.0, 0.0};
  const TrafficSimulator sim(sc, 1);
  const auto r = sim.run(std::vector<double>(sim.dimension(), 0.0));
  for (const auto& s : r.outcome.ego_trace) EXPECT_GE(s.v, 0.0);
}

TEST(Simulate, PropertiesOnBundledScenes) {
  std::mt19937_64 rng(17);
  const PerturbationBounds bounds;
  for (auto kind : {SceneKind::CrossTurn, SceneKind::LaneChange, SceneKind::UTurn}) {
    const auto sc = make_synthetic_scene(kind, 0);
    const TrafficSimulator sim(sc, select_targets(sc, 1).front());
    std::uniform_real_distribution<double> ua(-bounds.accel_bound, bounds.accel_bound);
    std::uniform_real_distribution<double> us(-bounds.steer_bound, bounds.steer_bound);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> theta(sim.dimension());
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = (k % 2 == 0) ? ua(rng) : us(rng);
      const auto r = sim.run(theta);
      ASSERT_GE(r.f, 0.0);
      ASSERT_LE(r.f, 1.0);
      ASSERT_EQ(r.f == 1.0, r.outcome.kind == OutcomeKind::EgoCollision);
      ASSERT_EQ(r.f == 0.0, r.outcome.kind == OutcomeKind::BackgroundCollision);
      ASSERT_GE(r.m.m1, 0.0);
      ASSERT_LE(r.m.m1, bounds.steer_bound);
      ASSERT_GE(r.m.m2, 0.0);
      ASSERT_LE(r.m.m2, 1.0);
      ASSERT_GE(r.m.m3, -kPi);
      ASSERT_LE(r.m.m3, kPi);
      ASSERT_LE(r.outcome.t_impact, r.outcome.horizon);
      const auto again = sim.run(theta);
      ASSERT_EQ(again.f, r.f);
      ASSERT_EQ(again.m, r.m);
    }
  }
}

}  // namespace
}  // namespace cadre
