#include "cadre/scenario_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cadre/errors.hpp"

namespace cadre {

namespace {

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.psi) && std::isfinite(s.v);
}

}  // namespace

void VehicleGeometry::validate() const {
  if (!(width > 0.0) || !(wheelbase > 0.0) || !(wheelbase <= length)) {
    throw ValidationError("vehicle geometry requires width > 0 and 0 < wheelbase <= length");
  }
}

void PerturbationBounds::validate() const {
  if (!(accel_bound > 0.0) || !(steer_bound > 0.0) || !(steer_limit > 0.0)) {
    throw ValidationError("perturbation bounds must be strictly positive");
  }
}

Perturbation Perturbation::from_flat(std::span<const double> theta, std::size_t target_index) {
  if (theta.size() % 2 != 0) {
    throw ValidationError("flat perturbation must hold (accel, steer) pairs");
  }
  Perturbation p;
  p.target_index = target_index;
  p.deltas.reserve(theta.size() / 2);
  for (std::size_t k = 0; k + 1 < theta.size(); k += 2) {
    p.deltas.push_back({theta[k], theta[k + 1]});
  }
  return p;
}

std::vector<double> Perturbation::to_flat() const {
  std::vector<double> flat;
  flat.reserve(deltas.size() * 2);
  for (const auto& d : deltas) {
    flat.push_back(d.accel);
    flat.push_back(d.steer);
  }
  return flat;
}

std::vector<VehicleState> Scenario::trajectory(std::size_t i) const {
  std::vector<VehicleState> out;
  out.reserve(states.size());
  for (const auto& step : states) {
    out.push_back(step.at(i));
  }
  return out;
}

void Scenario::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("scenario '" + id + "': dt must be positive");
  }
  if (states.size() < 2) {
    throw ValidationError("scenario '" + id + "': need at least two timesteps");
  }
  if (geometries.size() < 2) {
    throw ValidationError("scenario '" + id + "': need the ego plus at least one background vehicle");
  }
  for (const auto& g : geometries) {
    g.validate();
  }
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (states[t].size() != geometries.size()) {
      throw ValidationError("scenario '" + id + "': timestep " + std::to_string(t) + " has " +
                            std::to_string(states[t].size()) + " vehicles, expected " +
                            std::to_string(geometries.size()));
    }
    for (const auto& s : states[t]) {
      if (!finite(s)) {
        throw ValidationError("scenario '" + id + "': non-finite state at timestep " +
                              std::to_string(t));
      }
    }
  }
}

double normalize_angle(double angle) {
  return std::remainder(angle, 2.0 * std::numbers::pi);
}

double angle_difference(double from, double to) { return normalize_angle(to - from); }

VehicleState bicycle_step(const VehicleState& state, const Action& action, double wheelbase,
                          double dt) {
  VehicleState next;
  next.x = state.x + state.v * std::cos(state.psi) * dt;
  next.y = state.y + state.v * std::sin(state.psi) * dt;
  next.psi = normalize_angle(state.psi + state.v * std::tan(action.steer) / wheelbase * dt);
  next.v = state.v + action.accel * dt;
  return next;
}

std::vector<VehicleState> rollout(const VehicleState& initial, std::span<const Action> actions,
                                  double wheelbase, double dt) {
  std::vector<VehicleState> states;
  states.reserve(actions.size() + 1);
  states.push_back(initial);
  for (const auto& a : actions) {
    states.push_back(bicycle_step(states.back(), a, wheelbase, dt));
  }
  return states;
}

std::vector<Action> recover_actions(std::span<const VehicleState> trajectory, double wheelbase,
                                    double dt, double min_speed) {
  if (trajectory.size() < 2) {
    throw ValidationError("action recovery needs a trajectory of at least two states");
  }
  if (!(wheelbase > 0.0) || !(dt > 0.0)) {
    throw ValidationError("action recovery needs positive wheelbase and dt");
  }
  std::vector<Action> actions;
  actions.reserve(trajectory.size() - 1);
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const auto& cur = trajectory[t];
    const auto& nxt = trajectory[t + 1];
    Action a;
    a.accel = (nxt.v - cur.v) / dt;
    if (std::abs(cur.v) >= min_speed) {
      const double dpsi = angle_difference(cur.psi, nxt.psi);
      a.steer = std::atan(dpsi * wheelbase / (cur.v * dt));
    }
    actions.push_back(a);
  }
  return actions;
}

std::vector<Action> apply_perturbation(std::span<const Action> actions, const Perturbation& p,
                                       const PerturbationBounds& bounds) {
  if (p.deltas.size() < actions.size()) {
    throw ValidationError("perturbation has " + std::to_string(p.deltas.size()) +
                          " steps, action sequence needs " + std::to_string(actions.size()));
  }
  std::vector<Action> out;
  out.reserve(actions.size());
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const double da = std::clamp(p.deltas[t].accel, -bounds.accel_bound, bounds.accel_bound);
    const double ds = std::clamp(p.deltas[t].steer, -bounds.steer_bound, bounds.steer_bound);
    out.push_back({actions[t].accel + da,
                   std::clamp(actions[t].steer + ds, -bounds.steer_limit, bounds.steer_limit)});
  }
  return out;
}

}  // namespace cadre
