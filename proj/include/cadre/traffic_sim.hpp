#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "cadre/scenario_model.hpp"

namespace cadre {

/// Rule-based reactive ego: tracks its recorded trajectory, and brakes while
/// steering away when another vehicle enters a frontal proximity cone.
struct EgoPolicyConfig {
  double trigger_distance = 5.0;
  double trigger_half_angle = std::numbers::pi / 4.0;
  double brake_decel = -7.0;
  double evade_steer_mag = std::numbers::pi / 8.0;

  // Tracking controller.
  double max_accel = 2.0;
  double max_steer = std::numbers::pi / 3.0;
  double min_lookahead = 3.0;
  double lookahead_gain = 0.5;  // lookahead = max(min_lookahead, gain * v)

  void validate() const;
};

enum class OutcomeKind { EgoCollision, BackgroundCollision, NoCollision };

/// Which steering signal the first measure averages.
enum class SteerMeasure {
  Perturbation,  // |clamped steering delta|
  Total,         // |recovered + delta steering actually applied|
};

struct MeasureValues {
  double m1 = 0.0;  // mean steering magnitude [rad]
  double m2 = 0.0;  // normalized impact time
  double m3 = 0.0;  // impact angle in the ego body frame [rad]

  bool operator==(const MeasureValues&) const = default;
};

struct SimOutcome {
  OutcomeKind kind = OutcomeKind::NoCollision;
  std::size_t t_impact = 0;
  std::size_t horizon = 0;
  double min_ego_distance = 0.0;
  std::vector<VehicleState> ego_trace;     // one entry per simulated step
  std::vector<VehicleState> target_trace;  // same length as ego_trace
  std::vector<Action> perturbed_actions;
  /// Every vehicle per simulated step; filled only when requested.
  std::vector<std::vector<VehicleState>> scene_trace;
};

struct SimResult {
  double f = 0.0;
  MeasureValues m;
  SimOutcome outcome;
};

/// Everything that parameterizes a simulation besides the scene and the perturbation.
struct SimSettings {
  EgoPolicyConfig ego;
  PerturbationBounds bounds;
  SteerMeasure m1_source = SteerMeasure::Perturbation;
};

Action ego_policy_step(const VehicleState& ego, std::span<const VehicleState> reference,
                       std::size_t t, std::span<const VehicleState> others,
                       const EgoPolicyConfig& cfg, double wheelbase, double dt);

/// Separating-axis overlap test between two oriented rectangles.
bool check_collision(const VehicleState& a, const VehicleGeometry& ga, const VehicleState& b,
                     const VehicleGeometry& gb);

/// 1 on ego collision, 0 on background collision, exp(-min distance) otherwise.
double objective(const SimOutcome& outcome);

MeasureValues measures(const SimOutcome& outcome, const Perturbation& p,
                       const PerturbationBounds& bounds,
                       SteerMeasure source = SteerMeasure::Perturbation);

/// True when the collision happened on the very first step, so m1 falls back
/// to the first steering magnitude.
bool measures_degenerate(const SimOutcome& outcome);

/// Closed-loop simulator for one scene and one perturbed background vehicle.
/// Recovers the target's actions once at construction; `run` is const and
/// may be called concurrently.
class TrafficSimulator {
 public:
  TrafficSimulator(Scenario scenario, std::size_t target, SimSettings settings = {});

  SimResult run(const Perturbation& p, bool record_scene = false) const;
  SimResult run(std::span<const double> theta, bool record_scene = false) const;

  const Scenario& scenario() const { return scenario_; }
  std::size_t target() const { return target_; }
  const SimSettings& settings() const { return settings_; }
  /// Length of the flat decision vector (2 per recovered action).
  std::size_t dimension() const { return 2 * recovered_.size(); }
  const std::vector<Action>& recovered_actions() const { return recovered_; }

 private:
  Scenario scenario_;
  std::size_t target_;
  SimSettings settings_;
  std::vector<VehicleState> ego_reference_;
  std::vector<Action> recovered_;
};

SimResult simulate(const Scenario& scenario, const Perturbation& p, const EgoPolicyConfig& cfg,
                   const PerturbationBounds& bounds,
                   SteerMeasure m1_source = SteerMeasure::Perturbation);

}  // namespace cadre
