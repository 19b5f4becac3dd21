#include "cadre/oar.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cadre/errors.hpp"

namespace cadre {

namespace {

// Inclusive 3-D prefix sums, padded by one on each axis.
class BoxSum {
 public:
  BoxSum(const std::vector<int>& values, int nx, int ny, int nz)
      : nx_(nx), ny_(ny), nz_(nz), sums_(static_cast<std::size_t>((nx + 1) * (ny + 1) * (nz + 1)), 0) {
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        for (int k = 0; k < nz; ++k) {
          const long v = values[static_cast<std::size_t>((i * ny + j) * nz + k)];
          at(i + 1, j + 1, k + 1) = v + at(i, j + 1, k + 1) + at(i + 1, j, k + 1) +
                                    at(i + 1, j + 1, k) - at(i, j, k + 1) - at(i, j + 1, k) -
                                    at(i + 1, j, k) + at(i, j, k);
        }
      }
    }
  }

  // Sum over the box [lo, hi] (inclusive), clipped to the grid.
  long sum(int i0, int j0, int k0, int i1, int j1, int k1) const {
    i0 = std::max(i0, 0), j0 = std::max(j0, 0), k0 = std::max(k0, 0);
    i1 = std::min(i1, nx_ - 1), j1 = std::min(j1, ny_ - 1), k1 = std::min(k1, nz_ - 1);
    if (i0 > i1 || j0 > j1 || k0 > k1) return 0;
    ++i1, ++j1, ++k1;
    return at(i1, j1, k1) - at(i0, j1, k1) - at(i1, j0, k1) - at(i1, j1, k0) + at(i0, j0, k1) +
           at(i0, j1, k0) + at(i1, j0, k0) - at(i0, j0, k0);
  }

 private:
  long& at(int i, int j, int k) {
    return sums_[static_cast<std::size_t>((i * (ny_ + 1) + j) * (nz_ + 1) + k)];
  }
  long at(int i, int j, int k) const {
    return sums_[static_cast<std::size_t>((i * (ny_ + 1) + j) * (nz_ + 1) + k)];
  }

  int nx_, ny_, nz_;
  std::vector<long> sums_;
};

}  // namespace

void OarConfig::validate() const {
  if (!(temperature > 0.0) || radius < 0) {
    throw ValidationError("OAR needs temperature > 0 and radius >= 0");
  }
}

std::vector<double> neighbor_empty_rates(const GridArchive& archive, int radius) {
  const auto& axes = archive.spec().axes;
  const int nx = axes[0].cells, ny = axes[1].cells, nz = axes[2].cells;
  std::vector<int> occupied(archive.size(), 0);
  for (std::size_t f = 0; f < archive.size(); ++f) occupied[f] = archive.occupied(f) ? 1 : 0;
  const BoxSum occupancy(occupied, nx, ny, nz);

  std::vector<double> rates;
  rates.reserve(archive.occupancy());
  for (const Elite* e : archive.elites()) {
    const auto [i, j, k] = e->cell;
    const int i0 = std::max(i - radius, 0), i1 = std::min(i + radius, nx - 1);
    const int j0 = std::max(j - radius, 0), j1 = std::min(j + radius, ny - 1);
    const int k0 = std::max(k - radius, 0), k1 = std::min(k + radius, nz - 1);
    const long in_bounds = static_cast<long>(i1 - i0 + 1) * (j1 - j0 + 1) * (k1 - k0 + 1) - 1;
    if (in_bounds == 0) {
      rates.push_back(0.0);
      continue;
    }
    const long filled = occupancy.sum(i0, j0, k0, i1, j1, k1) - 1;
    rates.push_back(static_cast<double>(in_bounds - filled) / static_cast<double>(in_bounds));
  }
  return rates;
}

std::vector<double> restart_probabilities(const std::vector<double>& rates, double temperature) {
  std::vector<double> p(rates.size(), 0.0);
  if (rates.empty()) return p;
  const double top = *std::max_element(rates.begin(), rates.end());
  double total = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    p[i] = std::exp((rates[i] - top) / temperature);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

std::size_t sample_restart(const std::vector<double>& rates, double temperature, Rng& rng) {
  if (rates.empty()) throw ValidationError("cannot sample a restart from no elites");
  const auto probs = restart_probabilities(rates, temperature);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  return pick(rng);
}

const Elite* oar_restart(const GridArchive& archive, const OarConfig& cfg, Rng& rng) {
  if (archive.empty()) return nullptr;
  const auto elites = archive.elites();
  return elites[sample_restart(neighbor_empty_rates(archive, cfg.radius), cfg.temperature, rng)];
}

}  // namespace cadre
