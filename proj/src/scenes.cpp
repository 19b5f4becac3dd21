#include "cadre/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

#include "cadre/cma.hpp"
#include "cadre/errors.hpp"
#include "cadre/traffic_sim.hpp"

namespace cadre {

std::vector<std::size_t> select_targets(const Scenario& scenario, std::size_t k) {
  scenario.validate();
  const std::size_t n = scenario.num_vehicles();
  std::vector<double> mean(n, 0.0);
  for (const auto& step : scenario.states) {
    for (std::size_t i = 1; i < n; ++i) {
      mean[i] += std::hypot(step[i].x - step[0].x, step[i].y - step[0].y);
    }
  }
  std::vector<std::size_t> order(n - 1);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mean[a] < mean[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::CrossTurn:
      return "cross_turn";
    case SceneKind::LaneChange:
      return "lane_change";
    case SceneKind::UTurn:
      return "u_turn";
  }
  return "unknown";
}

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "cross_turn" || name == "cross-turn") return SceneKind::CrossTurn;
  if (name == "lane_change" || name == "lane-change") return SceneKind::LaneChange;
  if (name == "u_turn" || name == "u-turn") return SceneKind::UTurn;
  throw ValidationError("unknown scene kind '" + name + "' (expected cross_turn, lane_change, u_turn)");
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDt = 0.1;
constexpr std::size_t kHorizon = 150;
constexpr double kLane = 3.5;

struct Point {
  double x;
  double y;
};

/// Densely sampled polyline built from straights and arcs.
class PathBuilder {
 public:
  PathBuilder(double x, double y, double heading) : heading_(heading) { pts_.push_back({x, y}); }

  PathBuilder& straight(double length) {
    const int n = std::max(1, static_cast<int>(length / kStep));
    for (int i = 0; i < n; ++i) {
      const auto& p = pts_.back();
      pts_.push_back({p.x + length / n * std::cos(heading_), p.y + length / n * std::sin(heading_)});
    }
    return *this;
  }

  // Positive angle turns left.
  PathBuilder& arc(double radius, double angle) {
    const double len = radius * std::abs(angle);
    const int n = std::max(1, static_cast<int>(len / kStep));
    const double dh = angle / n;
    const double ds = len / n;
    for (int i = 0; i < n; ++i) {
      const auto& p = pts_.back();
      const double mid = heading_ + 0.5 * dh;
      pts_.push_back({p.x + ds * std::cos(mid), p.y + ds * std::sin(mid)});
      heading_ += dh;
    }
    return *this;
  }

  // Smooth lateral shift (to the left for positive offset) over `length`.
  PathBuilder& shift(double offset, double length) {
    const auto start = pts_.back();
    const double c = std::cos(heading_), s = std::sin(heading_);
    const int n = std::max(1, static_cast<int>(length / kStep));
    for (int i = 1; i <= n; ++i) {
      const double u = static_cast<double>(i) / n;
      const double along = u * length;
      const double lat = offset * 0.5 * (1.0 - std::cos(kPi * u));
      pts_.push_back({start.x + along * c - lat * s, start.y + along * s + lat * c});
    }
    return *this;
  }

  std::vector<Point> build() const { return pts_; }
  double heading() const { return heading_; }

 private:
  static constexpr double kStep = 0.25;
  std::vector<Point> pts_;
  double heading_;
};

using SpeedProfile = std::function<double(double time)>;

/// Drives the bicycle model along `path` with pure pursuit and speed tracking.
std::vector<VehicleState> drive(const std::vector<Point>& path, const SpeedProfile& speed,
                                double wheelbase) {
  const double heading0 = std::atan2(path[1].y - path[0].y, path[1].x - path[0].x);
  VehicleState s{path[0].x, path[0].y, heading0, speed(0.0)};
  std::vector<VehicleState> traj{s};
  std::size_t progress = 0;
  for (std::size_t t = 0; t < kHorizon; ++t) {
    // Advance along the path to the closest point ahead.
    double best = std::hypot(path[progress].x - s.x, path[progress].y - s.y);
    for (std::size_t k = progress + 1; k < path.size() && k < progress + 200; ++k) {
      const double d = std::hypot(path[k].x - s.x, path[k].y - s.y);
      if (d < best) {
        best = d;
        progress = k;
      }
    }
    const double lookahead = std::max(4.0, 0.6 * s.v);
    std::size_t goal = path.size() - 1;
    for (std::size_t k = progress; k < path.size(); ++k) {
      if (std::hypot(path[k].x - s.x, path[k].y - s.y) >= lookahead) {
        goal = k;
        break;
      }
    }
    const double dx = path[goal].x - s.x, dy = path[goal].y - s.y;
    const double alpha = std::atan2(dy, dx) - s.psi;
    const double dist = std::hypot(dx, dy);
    double steer = dist > 1e-6 ? std::atan2(2.0 * wheelbase * std::sin(alpha), dist) : 0.0;
    steer = std::clamp(steer, -kPi / 4.0, kPi / 4.0);
    const double target_v = std::max(0.0, speed((t + 1) * kDt));
    const double accel = std::clamp((target_v - s.v) / kDt, -4.0, 3.0);
    s = bicycle_step(s, {accel, steer}, wheelbase, kDt);
    traj.push_back(s);
  }
  return traj;
}

// Speed ramps linearly between (time, speed) knots and holds outside them.
SpeedProfile ramp(std::vector<std::pair<double, double>> knots) {
  return [knots = std::move(knots)](double time) {
    if (time <= knots.front().first) return knots.front().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (time <= knots[i].first) {
        const auto [t0, v0] = knots[i - 1];
        const auto [t1, v1] = knots[i];
        return v0 + (v1 - v0) * (time - t0) / (t1 - t0);
      }
    }
    return knots.back().second;
  };
}

SpeedProfile constant(double v) {
  return [v](double) { return v; };
}

class SceneAssembler {
 public:
  explicit SceneAssembler(std::string id) { scenario_.id = std::move(id); scenario_.dt = kDt; }

  void add(const std::vector<Point>& path, const SpeedProfile& speed,
           VehicleGeometry geom = VehicleGeometry{}) {
    trajectories_.push_back(drive(path, speed, geom.wheelbase));
    scenario_.geometries.push_back(geom);
  }

  Scenario finish() {
    scenario_.states.assign(kHorizon + 1, {});
    for (std::size_t t = 0; t <= kHorizon; ++t) {
      for (const auto& traj : trajectories_) scenario_.states[t].push_back(traj[t]);
    }
    return scenario_;
  }

 private:
  Scenario scenario_;
  std::vector<std::vector<VehicleState>> trajectories_;
};

struct Jitter {
  Rng& rng;
  double operator()(double value, double spread) {
    return value + std::uniform_real_distribution<double>(-spread, spread)(rng);
  }
};

// Unprotected left turn across two oncoming lanes; right-hand traffic.
Scenario cross_turn(Rng& rng, const std::string& id) {
  Jitter j{rng};
  const double lane = kLane / 2.0;
  SceneAssembler a(id);

  const double ego_v = j(9.0, 0.5);
  const double turn_v = j(6.0, 0.4);
  a.add(PathBuilder(lane, -40.0, kPi / 2).straight(32.0).arc(9.75, kPi / 2).straight(120.0).build(),
        ramp({{0.0, ego_v}, {3.0, turn_v}, {6.5, turn_v}, {10.0, 10.0}}));

  // Oncoming through traffic, southbound: gaps before and after the ego's turn.
  const double o1_v = j(11.0, 0.8);
  a.add(PathBuilder(-lane, o1_v * j(2.3, 0.3), -kPi / 2).straight(200.0).build(), constant(o1_v));
  const double o2_v = j(11.0, 0.8);
  a.add(PathBuilder(-lane, o2_v * j(10.5, 0.5), -kPi / 2).straight(250.0).build(), constant(o2_v));
  const double o3_v = j(12.0, 0.8);
  a.add(PathBuilder(-3.0 * lane, o3_v * j(3.0, 0.3), -kPi / 2).straight(200.0).build(),
        constant(o3_v));
  const double o4_v = j(10.0, 0.8);
  a.add(PathBuilder(-3.0 * lane, o4_v * j(11.5, 0.5), -kPi / 2).straight(250.0).build(),
        constant(o4_v));
  // Northbound: follower in the ego lane and a faster car in the adjacent lane.
  a.add(PathBuilder(lane, j(-65.0, 2.0), kPi / 2).straight(250.0).build(), constant(j(9.0, 0.5)));
  a.add(PathBuilder(3.0 * lane, j(-60.0, 2.0), kPi / 2).straight(250.0).build(),
        constant(j(13.0, 0.8)));
  // Eastbound car queueing at the stop line west of the junction.
  const double e_v = j(8.0, 0.5);
  const double stop_x = -14.0;
  const double start_x = j(-45.0, 2.0);
  const double brake_t = ((stop_x - start_x) - e_v * e_v / 4.0) / e_v;
  a.add(PathBuilder(start_x, -lane, 0.0).straight(60.0).build(),
        ramp({{0.0, e_v}, {brake_t, e_v}, {brake_t + e_v / 2.0, 0.0}}));
  return a.finish();
}

// Highway cut-in: ego moves one lane left among 20-30 m/s traffic.
Scenario lane_change(Rng& rng, const std::string& id) {
  Jitter j{rng};
  const double w = 3.6;
  SceneAssembler a(id);

  const double ego_v = std::uniform_real_distribution<double>(22.0, 28.0)(rng);
  a.add(PathBuilder(0.0, 0.0, 0.0).straight(j(100.0, 10.0)).shift(w, 70.0).straight(400.0).build(),
        constant(ego_v));
  // Slower lead in the ego lane, which the ego overtakes after changing lanes.
  a.add(PathBuilder(j(45.0, 3.0), 0.0, 0.0).straight(500.0).build(), constant(ego_v - j(2.0, 0.3)));
  // Traffic in the destination lane, ahead and behind.
  a.add(PathBuilder(j(70.0, 4.0), w, 0.0).straight(550.0).build(), constant(ego_v + j(1.5, 0.5)));
  a.add(PathBuilder(j(-40.0, 3.0), w, 0.0).straight(500.0).build(), constant(ego_v - j(1.5, 0.5)));
  // Far lane.
  a.add(PathBuilder(j(-15.0, 3.0), 2.0 * w, 0.0).straight(550.0).build(),
        constant(std::min(30.0, ego_v + j(2.5, 0.5))));
  a.add(PathBuilder(j(35.0, 3.0), 2.0 * w, 0.0).straight(500.0).build(), constant(j(22.0, 1.0)));
  // Trailing car in the ego lane.
  a.add(PathBuilder(j(-35.0, 3.0), 0.0, 0.0).straight(500.0).build(), constant(ego_v - j(1.0, 0.3)));
  return a.finish();
}

// U-turn from the right northbound lane into the outer southbound lane.
Scenario u_turn(Rng& rng, const std::string& id) {
  Jitter j{rng};
  const double lane = kLane / 2.0;
  SceneAssembler a(id);

  const double ego_v = j(8.0, 0.5);
  a.add(PathBuilder(lane, -30.0, kPi / 2).straight(30.0).arc(3.5, kPi).straight(150.0).build(),
        ramp({{0.0, ego_v}, {3.0, 4.0}, {8.0, 4.0}, {11.0, 10.0}}));

  // Southbound: two cars clear before the turn, one well after it.
  const double s1_v = j(11.0, 0.8);
  a.add(PathBuilder(-lane, s1_v * j(2.0, 0.3), -kPi / 2).straight(200.0).build(), constant(s1_v));
  const double s3_v = j(10.0, 0.8);
  a.add(PathBuilder(-lane, s3_v * j(3.6, 0.3), -kPi / 2).straight(200.0).build(), constant(s3_v));
  const double s2_v = j(10.0, 0.5);
  a.add(PathBuilder(-3.0 * lane, s2_v * j(11.0, 0.4), -kPi / 2).straight(250.0).build(),
        constant(s2_v));
  // Northbound: leader pulling away, follower hanging back, fast car in the inner lane.
  a.add(PathBuilder(lane, j(2.0, 1.0), kPi / 2).straight(250.0).build(), constant(j(10.0, 0.5)));
  a.add(PathBuilder(lane, j(-65.0, 2.0), kPi / 2).straight(250.0).build(),
        ramp({{0.0, j(8.0, 0.4)}, {4.0, 5.0}, {9.0, 5.0}, {12.0, 9.0}}));
  a.add(PathBuilder(3.0 * lane, j(-45.0, 2.0), kPi / 2).straight(250.0).build(),
        constant(j(12.0, 0.8)));
  return a.finish();
}

}  // namespace

bool scene_is_collision_free(const Scenario& scenario) {
  scenario.validate();
  const std::size_t n = scenario.num_vehicles();
  for (const auto& step : scenario.states) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (check_collision(step[a], scenario.geometries[a], step[b], scenario.geometries[b])) {
          return false;
        }
      }
    }
  }
  for (std::size_t target = 1; target < n; ++target) {
    const TrafficSimulator sim(scenario, target);
    const auto zero = std::vector<double>(sim.dimension(), 0.0);
    if (sim.run(zero).outcome.kind != OutcomeKind::NoCollision) return false;
  }
  return true;
}

Scenario make_synthetic_scene(SceneKind kind, std::uint64_t seed) {
  const std::string id = to_string(kind) + "_seed" + std::to_string(seed);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng = make_rng(seed, 1000 + attempt);
    Scenario sc;
    switch (kind) {
      case SceneKind::CrossTurn:
        sc = cross_turn(rng, id);
        break;
      case SceneKind::LaneChange:
        sc = lane_change(rng, id);
        break;
      case SceneKind::UTurn:
        sc = u_turn(rng, id);
        break;
    }
    if (scene_is_collision_free(sc)) return sc;
  }
  throw ValidationError("could not place a collision-free " + to_string(kind) +
                        " scene after 100 attempts");
}

}  // namespace cadre
