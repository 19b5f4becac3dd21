#include "cadre/metrics.hpp"

#include <limits>

namespace cadre {

double coverage(const GridArchive& archive) {
  return static_cast<double>(archive.occupancy()) / static_cast<double>(archive.size());
}

double qd_score(const GridArchive& archive) {
  double sum = 0.0;
  for (const Elite* e : archive.elites()) sum += e->f;
  return sum;
}

MeanObjective mean_objective(const GridArchive& archive) {
  if (archive.empty()) return {0.0, true};
  return {qd_score(archive) / static_cast<double>(archive.occupancy()), false};
}

MetricRow metric_row(const GridArchive& archive) {
  return {archive.evaluations(), coverage(archive), mean_objective(archive).value,
          qd_score(archive)};
}

std::optional<Elite> retrieve(const GridArchive& archive, const MeasureValues& query,
                              RetrieveMode mode) {
  const CellIndex target = archive_index(query, archive.spec());
  if (mode == RetrieveMode::Exact) {
    const Elite* e = archive.at(target);
    return e ? std::optional<Elite>(*e) : std::nullopt;
  }
  const auto& axes = archive.spec().axes;
  const Elite* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  // elites() is in row-major order, so strict comparison keeps the
  // lexicographically smallest cell on ties.
  for (const Elite* e : archive.elites()) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double diff = static_cast<double>(e->cell[k] - target[k]) / axes[k].cells;
      d2 += diff * diff;
    }
    if (d2 < best_d) {
      best_d = d2;
      best = e;
    }
  }
  return best ? std::optional<Elite>(*best) : std::nullopt;
}

}  // namespace cadre
