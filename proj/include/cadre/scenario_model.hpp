#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace cadre {

struct VehicleState {
  double x = 0.0;    // world frame [m]
  double y = 0.0;    // world frame [m]
  double psi = 0.0;  // heading [rad], kept in [-pi, pi]
  double v = 0.0;    // speed [m/s]

  bool operator==(const VehicleState&) const = default;
};

struct VehicleGeometry {
  double length = 4.7;
  double width = 2.0;
  double wheelbase = 2.8;

  void validate() const;
  bool operator==(const VehicleGeometry&) const = default;
};

struct Action {
  double accel = 0.0;  // [m/s^2]
  double steer = 0.0;  // front wheel angle [rad]

  bool operator==(const Action&) const = default;
};

/// Box constraints on a perturbation, plus the physical cap on the summed steering.
struct PerturbationBounds {
  double accel_bound = 2.0;
  double steer_bound = std::numbers::pi / 8.0;
  double steer_limit = std::numbers::pi / 3.0;

  void validate() const;
};

/// Per-step deltas added to the recovered actions of one background vehicle.
///
/// The optimizer works on a flat vector laid out as
/// [da_0, dsteer_0, da_1, dsteer_1, ...]; `from_flat` / `to_flat` convert.
struct Perturbation {
  std::vector<Action> deltas;
  std::size_t target_index = 1;

  static Perturbation from_flat(std::span<const double> theta, std::size_t target_index);
  std::vector<double> to_flat() const;
};

/// A recorded scene: states[t][i] for t = 0..horizon, vehicle 0 is the ego.
struct Scenario {
  std::string id;
  double dt = 0.1;
  std::vector<std::vector<VehicleState>> states;
  std::vector<VehicleGeometry> geometries;

  std::size_t horizon() const { return states.empty() ? 0 : states.size() - 1; }
  std::size_t num_vehicles() const { return geometries.size(); }
  double duration() const { return static_cast<double>(horizon()) * dt; }

  /// Per-step states of vehicle `i`.
  std::vector<VehicleState> trajectory(std::size_t i) const;

  /// Throws ValidationError if the scene is ragged, has no background vehicle,
  /// a non-positive dt, or non-finite states.
  void validate() const;
};

/// Wraps an angle into [-pi, pi].
double normalize_angle(double angle);

/// Shortest signed angular difference `to - from`, in [-pi, pi].
double angle_difference(double from, double to);

/// One forward-Euler step of the kinematic bicycle model. Position uses the
/// pre-step heading and speed.
VehicleState bicycle_step(const VehicleState& state, const Action& action, double wheelbase,
                          double dt);

/// Returns initial followed by one state per action.
std::vector<VehicleState> rollout(const VehicleState& initial, std::span<const Action> actions,
                                  double wheelbase, double dt);

/// Inverts `bicycle_step` over consecutive states. Below `min_speed` the
/// steering is unobservable and recovered as zero.
std::vector<Action> recover_actions(std::span<const VehicleState> trajectory, double wheelbase,
                                    double dt, double min_speed = 0.1);

/// Adds clamped perturbation deltas to `actions`. Perturbation entries past
/// the end of `actions` are ignored; a shorter perturbation is rejected.
std::vector<Action> apply_perturbation(std::span<const Action> actions, const Perturbation& p,
                                       const PerturbationBounds& bounds);

}  // namespace cadre
