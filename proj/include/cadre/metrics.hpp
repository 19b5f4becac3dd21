#pragma once

#include <cstdint>
#include <optional>

#include "cadre/archive.hpp"

namespace cadre {

struct MetricRow {
  std::uint64_t evaluations = 0;
  double coverage = 0.0;
  double mean_objective = 0.0;
  double qd_score = 0.0;

  bool operator==(const MetricRow&) const = default;
};

double coverage(const GridArchive& archive);
double qd_score(const GridArchive& archive);

struct MeanObjective {
  double value = 0.0;
  bool degenerate = false;  // empty archive; value is 0 by convention
};
MeanObjective mean_objective(const GridArchive& archive);

MetricRow metric_row(const GridArchive& archive);

enum class RetrieveMode { Exact, Nearest };

/// Exact: the elite in the query's cell. Nearest: the elite whose cell center
/// is closest to the query's cell center in unit-normalized measure space,
/// ties to the lexicographically smallest cell.
std::optional<Elite> retrieve(const GridArchive& archive, const MeasureValues& query,
                              RetrieveMode mode);

}  // namespace cadre
