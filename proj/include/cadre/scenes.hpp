#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cadre/scenario_model.hpp"

namespace cadre {

/// Background vehicles ordered by mean center distance to the ego over the
/// recorded horizon, nearest first, ties to the lower index. At most `k`.
std::vector<std::size_t> select_targets(const Scenario& scenario, std::size_t k = 5);

enum class SceneKind { CrossTurn, LaneChange, UTurn };

std::string to_string(SceneKind kind);
SceneKind parse_scene_kind(const std::string& name);

/// Procedural 15 s scene at dt = 0.1 s with a kinematically consistent
/// recording: an ego maneuver plus 5-8 background vehicles on conflicting
/// paths. Placements are re-drawn until the unperturbed closed-loop replay is
/// collision-free for every choice of target; throws after 100 attempts.
Scenario make_synthetic_scene(SceneKind kind, std::uint64_t seed);

/// True if no pair of recorded vehicles overlaps and the zero-perturbation
/// simulation is collision-free for every background target.
bool scene_is_collision_free(const Scenario& scenario);

}  // namespace cadre
