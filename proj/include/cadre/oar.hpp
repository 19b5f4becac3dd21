#pragma once

#include <cstddef>
#include <vector>

#include "cadre/archive.hpp"
#include "cadre/cma.hpp"

namespace cadre {

/// Occupancy-aware restart: prefer elites whose grid neighborhood is still empty.
struct OarConfig {
  double temperature = 0.1;  // +inf restarts uniformly
  int radius = 1;            // neighborhood is (2r+1)^3 cells

  void validate() const;
};

/// Fraction of empty in-bounds neighbors (center excluded) for each elite,
/// aligned with `archive.elites()`. Out-of-bounds positions count in neither
/// numerator nor denominator.
std::vector<double> neighbor_empty_rates(const GridArchive& archive, int radius);

/// exp(r_i / tau) / sum_j exp(r_j / tau), max-subtracted.
std::vector<double> restart_probabilities(const std::vector<double>& rates, double temperature);

/// Index drawn from the softmax of `rates`; the sampling step of `oar_restart`.
std::size_t sample_restart(const std::vector<double>& rates, double temperature, Rng& rng);

/// Draws the elite to restart from; nullptr when the archive is empty.
const Elite* oar_restart(const GridArchive& archive, const OarConfig& cfg, Rng& rng);

}  // namespace cadre
