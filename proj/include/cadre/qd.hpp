#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cadre/archive.hpp"
#include "cadre/emitter.hpp"
#include "cadre/metrics.hpp"
#include "cadre/oar.hpp"
#include "cadre/traffic_sim.hpp"

namespace cadre {

struct Evaluation {
  double f = 0.0;
  MeasureValues m;
};

/// Maps a flat decision vector to (objective, measures). Must be safe to call
/// from several threads at once.
using Evaluator = std::function<Evaluation(std::span<const double>)>;

Evaluator make_evaluator(const TrafficSimulator& sim);

/// Evaluates every theta, in parallel when `threads > 1`; results keep input order.
std::vector<Evaluation> evaluate_batch(const Evaluator& evaluate,
                                       std::span<const std::vector<double>> thetas,
                                       std::size_t threads);

enum class Method { Cadre, Random, CmaEs };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct RunSettings {
  std::size_t budget = 20000;
  std::size_t batch_size = 36;
  std::uint64_t seed = 0;
  MeasureSpec spec = MeasureSpec::defaults();
  OarConfig oar;
  SimSettings sim;
  double sigma0 = 1.0;
  double init_std_fraction = 0.2;
  /// CMA-ES baseline: iterations without a new best before a random restart.
  std::size_t stagnation_iterations = 50;
  std::size_t threads = 1;

  void validate() const;
};

struct RunResult {
  GridArchive archive;
  std::vector<MetricRow> log;  // one row per evaluated batch
  std::size_t restarts = 0;
};

/// Improvement-ranked CMA emitter over a grid archive with occupancy-aware restarts.
RunResult run_cadre(const Evaluator& evaluate, std::size_t dimension, const RunSettings& settings);
RunResult run_cadre(const Scenario& scenario, std::size_t target, const RunSettings& settings);

/// Any of the three methods through one entry point.
RunResult run_method(Method method, const Evaluator& evaluate, std::size_t dimension,
                     const RunSettings& settings);
RunResult run_method(Method method, const Scenario& scenario, std::size_t target,
                     const RunSettings& settings);

}  // namespace cadre
