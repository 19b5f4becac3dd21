#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cadre/archive.hpp"
#include "cadre/cma.hpp"
#include "cadre/scenario_model.hpp"

namespace cadre {

struct EmitterConfig {
  std::size_t batch_size = 36;
  double sigma0 = 1.0;
  /// One initial standard deviation as a fraction of each bound interval's width.
  double init_std_fraction = 0.2;
};

/// Box bounds of the flat decision vector, interleaved (accel, steer) per step.
struct SearchBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static SearchBox for_perturbation(std::size_t dimension, const PerturbationBounds& bounds);
  std::size_t dimension() const { return static_cast<std::size_t>(lower.size()); }
};

/// CMA emitter driven by archive improvement rather than raw objective.
class ImprovementEmitter {
 public:
  ImprovementEmitter(SearchBox box, EmitterConfig cfg, std::uint64_t seed);

  /// Up to `n` clamped samples from N(mean, sigma^2 C). Empty when the
  /// covariance has degenerated and the caller must restart.
  std::vector<std::vector<double>> ask(std::size_t n);

  /// Feeds back archive insert results for the last batch. Returns true when
  /// nothing improved (or the distribution degenerated) and the caller should
  /// restart; the distribution is left untouched in the no-improvement case.
  bool tell(std::span<const std::vector<double>> thetas, std::span<const InsertResult> results);

  /// Re-centers on `mean` with C = I and sigma = sigma0.
  void restart(std::span<const double> mean);

  /// Orders the improving entries of `results`: every new cell before every
  /// improvement, each group by descending delta, batch order on ties.
  static std::vector<std::size_t> rank_parents(std::span<const InsertResult> results);

  const CmaDistribution& distribution() const { return dist_; }
  std::size_t restarts() const { return restarts_; }
  const SearchBox& box() const { return box_; }

 private:
  SearchBox box_;
  EmitterConfig cfg_;
  CmaDistribution dist_;
  Rng rng_;
  std::size_t restarts_ = 0;
};

}  // namespace cadre
