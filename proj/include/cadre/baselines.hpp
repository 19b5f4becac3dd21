#pragma once

#include "cadre/qd.hpp"

namespace cadre {

/// Uniform sampling over the perturbation box; every sample goes into the archive.
RunResult run_random(const Evaluator& evaluate, std::size_t dimension, const RunSettings& settings);
RunResult run_random(const Scenario& scenario, std::size_t target, const RunSettings& settings);

/// Plain CMA-ES maximizing the objective, with a passive archive for the
/// metrics. Restarts from a uniformly random mean after
/// `stagnation_iterations` without a new best.
RunResult run_cmaes(const Evaluator& evaluate, std::size_t dimension, const RunSettings& settings);
RunResult run_cmaes(const Scenario& scenario, std::size_t target, const RunSettings& settings);

}  // namespace cadre
