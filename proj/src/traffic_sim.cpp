#include "cadre/traffic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cadre/errors.hpp"

namespace cadre {

namespace {

struct BodyFrame {
  double forward;
  double left;
};

BodyFrame to_body_frame(const VehicleState& frame, double x, double y) {
  const double dx = x - frame.x;
  const double dy = y - frame.y;
  const double c = std::cos(frame.psi);
  const double s = std::sin(frame.psi);
  return {c * dx + s * dy, -s * dx + c * dy};
}

double center_distance(const VehicleState& a, const VehicleState& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::size_t nearest_reference_index(const VehicleState& ego, std::span<const VehicleState> ref,
                                     std::size_t t) {
  // Search a window around the nominal time so that paths which fold back on
  // themselves (U-turns) do not snap to the wrong leg.
  constexpr std::size_t kBehind = 50;
  constexpr std::size_t kAhead = 10;
  const std::size_t lo = t > kBehind ? t - kBehind : 0;
  const std::size_t hi = std::min(ref.size() - 1, t + kAhead);
  std::size_t best = lo;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = lo; k <= hi; ++k) {
    const double d = std::hypot(ref[k].x - ego.x, ref[k].y - ego.y);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

void EgoPolicyConfig::validate() const {
  if (!(trigger_distance > 0.0) || !(trigger_half_angle > 0.0) ||
      !(trigger_half_angle <= std::numbers::pi) || !(brake_decel < 0.0)) {
    throw ValidationError(
        "ego policy requires trigger_distance > 0, 0 < trigger_half_angle <= pi, brake_decel < 0");
  }
}

Action ego_policy_step(const VehicleState& ego, std::span<const VehicleState> reference,
                       std::size_t t, std::span<const VehicleState> others,
                       const EgoPolicyConfig& cfg, double wheelbase, double dt) {
  if (t >= reference.size()) {
    throw ValidationError("ego policy step beyond the reference trajectory");
  }

  const VehicleState* threat = nullptr;
  double threat_distance = std::numeric_limits<double>::infinity();
  double threat_bearing = 0.0;
  for (const auto& other : others) {
    const double d = center_distance(ego, other);
    if (d > cfg.trigger_distance || d >= threat_distance) continue;
    const auto body = to_body_frame(ego, other.x, other.y);
    const double bearing = std::atan2(body.left, body.forward);
    if (std::abs(bearing) <= cfg.trigger_half_angle) {
      threat = &other;
      threat_distance = d;
      threat_bearing = bearing;
    }
  }
  if (threat != nullptr) {
    // Steer away from the threat; dead ahead goes left.
    const double steer = threat_bearing > 0.0 ? -cfg.evade_steer_mag : cfg.evade_steer_mag;
    return {cfg.brake_decel, steer};
  }

  const std::size_t next = std::min(t + 1, reference.size() - 1);
  const double accel =
      std::clamp((reference[next].v - ego.v) / dt, cfg.brake_decel, cfg.max_accel);

  // Pure pursuit toward the first reference point at least one lookahead away.
  const double lookahead = std::max(cfg.min_lookahead, cfg.lookahead_gain * ego.v);
  const std::size_t start = nearest_reference_index(ego, reference, t);
  std::size_t goal = reference.size() - 1;
  for (std::size_t k = start; k < reference.size(); ++k) {
    if (std::hypot(reference[k].x - ego.x, reference[k].y - ego.y) >= lookahead) {
      goal = k;
      break;
    }
  }
  const auto body = to_body_frame(ego, reference[goal].x, reference[goal].y);
  const double dist = std::hypot(body.forward, body.left);
  double steer = 0.0;
  if (dist > 1e-6) {
    const double alpha = std::atan2(body.left, body.forward);
    steer = std::atan2(2.0 * wheelbase * std::sin(alpha), dist);
  }
  return {accel, std::clamp(steer, -cfg.max_steer, cfg.max_steer)};
}

bool check_collision(const VehicleState& a, const VehicleGeometry& ga, const VehicleState& b,
                     const VehicleGeometry& gb) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double reach = 0.5 * (std::hypot(ga.length, ga.width) + std::hypot(gb.length, gb.width));
  if (dx * dx + dy * dy > reach * reach) return false;

  const double ca = std::cos(a.psi), sa = std::sin(a.psi);
  const double cb = std::cos(b.psi), sb = std::sin(b.psi);
  const double axes[4][2] = {{ca, sa}, {-sa, ca}, {cb, sb}, {-sb, cb}};
  const double hla = 0.5 * ga.length, hwa = 0.5 * ga.width;
  const double hlb = 0.5 * gb.length, hwb = 0.5 * gb.width;
  for (const auto& u : axes) {
    const double ra = hla * std::abs(ca * u[0] + sa * u[1]) + hwa * std::abs(-sa * u[0] + ca * u[1]);
    const double rb = hlb * std::abs(cb * u[0] + sb * u[1]) + hwb * std::abs(-sb * u[0] + cb * u[1]);
    if (std::abs(dx * u[0] + dy * u[1]) >= ra + rb) return false;
  }
  return true;
}

double objective(const SimOutcome& outcome) {
  switch (outcome.kind) {
    case OutcomeKind::EgoCollision:
      return 1.0;
    case OutcomeKind::BackgroundCollision:
      return 0.0;
    case OutcomeKind::NoCollision:
      break;
  }
  return std::exp(-outcome.min_ego_distance);
}

bool measures_degenerate(const SimOutcome& outcome) { return outcome.t_impact == 0; }

MeasureValues measures(const SimOutcome& outcome, const Perturbation& p,
                       const PerturbationBounds& bounds, SteerMeasure source) {
  if (outcome.ego_trace.size() <= outcome.t_impact ||
      outcome.target_trace.size() <= outcome.t_impact) {
    throw ValidationError("simulation trace does not reach the impact step");
  }
  auto steer_at = [&](std::size_t t) {
    if (source == SteerMeasure::Total) {
      return std::abs(outcome.perturbed_actions.at(t).steer);
    }
    return std::abs(std::clamp(p.deltas.at(t).steer, -bounds.steer_bound, bounds.steer_bound));
  };

  MeasureValues m;
  if (outcome.t_impact == 0) {
    m.m1 = steer_at(0);
  } else {
    double sum = 0.0;
    for (std::size_t t = 0; t < outcome.t_impact; ++t) sum += steer_at(t);
    m.m1 = sum / static_cast<double>(outcome.t_impact);
  }
  m.m2 = outcome.horizon == 0
             ? 0.0
             : static_cast<double>(outcome.t_impact) / static_cast<double>(outcome.horizon);
  const auto& ego = outcome.ego_trace[outcome.t_impact];
  const auto& tgt = outcome.target_trace[outcome.t_impact];
  const auto body = to_body_frame(ego, tgt.x, tgt.y);
  m.m3 = std::atan2(body.left, body.forward);
  return m;
}

TrafficSimulator::TrafficSimulator(Scenario scenario, std::size_t target, SimSettings settings)
    : scenario_(std::move(scenario)), target_(target), settings_(settings) {
  scenario_.validate();
  settings_.ego.validate();
  settings_.bounds.validate();
  if (target_ == 0 || target_ >= scenario_.num_vehicles()) {
    throw ValidationError("target index " + std::to_string(target_) +
                          " does not address a background vehicle (have " +
                          std::to_string(scenario_.num_vehicles() - 1) + ")");
  }
  ego_reference_ = scenario_.trajectory(0);
  const auto target_traj = scenario_.trajectory(target_);
  recovered_ = recover_actions(target_traj, scenario_.geometries[target_].wheelbase, scenario_.dt);
}

SimResult TrafficSimulator::run(std::span<const double> theta, bool record_scene) const {
  return run(Perturbation::from_flat(theta, target_), record_scene);
}

SimResult TrafficSimulator::run(const Perturbation& p, bool record_scene) const {
  if (p.target_index != target_) {
    throw ValidationError("perturbation targets vehicle " + std::to_string(p.target_index) +
                          ", simulator was built for " + std::to_string(target_));
  }
  const auto& sc = scenario_;
  const std::size_t horizon = sc.horizon();
  const std::size_t n = sc.num_vehicles();
  const auto& ego_geom = sc.geometries[0];
  const auto& tgt_geom = sc.geometries[target_];

  SimResult result;
  SimOutcome& out = result.outcome;
  out.horizon = horizon;
  out.perturbed_actions = apply_perturbation(recovered_, p, settings_.bounds);
  out.ego_trace.reserve(horizon + 1);
  out.target_trace.reserve(horizon + 1);

  VehicleState ego = sc.states[0][0];
  VehicleState tgt = sc.states[0][target_];
  std::vector<VehicleState> others;
  others.reserve(n - 1);

  double min_d = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  bool collided = false;

  for (std::size_t t = 0; t <= horizon; ++t) {
    out.ego_trace.push_back(ego);
    out.target_trace.push_back(tgt);
    if (record_scene) {
      auto snapshot = sc.states[t];
      snapshot[0] = ego;
      snapshot[target_] = tgt;
      out.scene_trace.push_back(std::move(snapshot));
    }

    const double d = center_distance(ego, tgt);
    if (d < min_d) {
      min_d = d;
      argmin = t;
    }
    if (check_collision(ego, ego_geom, tgt, tgt_geom)) {
      out.kind = OutcomeKind::EgoCollision;
      out.t_impact = t;
      collided = true;
      break;
    }
    for (std::size_t j = 1; j < n; ++j) {
      if (j == target_) continue;
      if (check_collision(tgt, tgt_geom, sc.states[t][j], sc.geometries[j])) {
        out.kind = OutcomeKind::BackgroundCollision;
        out.t_impact = t;
        collided = true;
        break;
      }
    }
    if (collided || t == horizon) break;

    others.clear();
    others.push_back(tgt);
    for (std::size_t j = 1; j < n; ++j) {
      if (j != target_) others.push_back(sc.states[t][j]);
    }
    const Action a =
        ego_policy_step(ego, ego_reference_, t, others, settings_.ego, ego_geom.wheelbase, sc.dt);
    ego = bicycle_step(ego, a, ego_geom.wheelbase, sc.dt);
    ego.v = std::max(0.0, ego.v);
    tgt = bicycle_step(tgt, out.perturbed_actions[t], tgt_geom.wheelbase, sc.dt);
  }

  out.min_ego_distance = min_d;
  if (!collided) {
    out.kind = OutcomeKind::NoCollision;
    out.t_impact = argmin;
  }
  result.f = objective(out);
  result.m = measures(out, p, settings_.bounds, settings_.m1_source);
  return result;
}

SimResult simulate(const Scenario& scenario, const Perturbation& p, const EgoPolicyConfig& cfg,
                   const PerturbationBounds& bounds, SteerMeasure m1_source) {
  TrafficSimulator sim(scenario, p.target_index, SimSettings{cfg, bounds, m1_source});
  return sim.run(p);
}

}  // namespace cadre
