#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cadre/traffic_sim.hpp"

namespace cadre {

struct MeasureAxis {
  double lower = 0.0;
  double upper = 1.0;
  int cells = 1;

  bool operator==(const MeasureAxis&) const = default;
};

/// Discretization of the 3-D measure space.
struct MeasureSpec {
  std::array<MeasureAxis, 3> axes;

  /// 10 x 20 x 20 over [0, pi/8] x [0, 1] x [-pi, pi].
  static MeasureSpec defaults();

  std::size_t total_cells() const;
  void validate() const;
  std::string describe() const;

  bool operator==(const MeasureSpec&) const = default;
};

using CellIndex = std::array<int, 3>;

/// Clips each measure into its axis range, then bins it; the upper edge maps
/// to the last cell.
CellIndex archive_index(const MeasureValues& m, const MeasureSpec& spec);

struct Elite {
  std::vector<double> theta;
  double f = 0.0;
  MeasureValues m;
  CellIndex cell{};
  std::uint64_t discovered_at = 0;

  bool operator==(const Elite&) const = default;
};

enum class InsertStatus { NewCell, Improved, Rejected };

struct InsertResult {
  InsertStatus status = InsertStatus::Rejected;
  double delta = 0.0;  // f for a new cell, f - old f for an improvement
};

/// MAP-Elites grid. Each cell keeps the best elite ever offered to it; ties
/// keep the incumbent.
class GridArchive {
 public:
  explicit GridArchive(MeasureSpec spec = MeasureSpec::defaults());

  InsertResult insert(std::span<const double> theta, double f, const MeasureValues& m);

  const MeasureSpec& spec() const { return spec_; }
  std::size_t size() const { return spec_.total_cells(); }
  std::size_t occupancy() const { return occupancy_; }
  bool empty() const { return occupancy_ == 0; }

  /// Number of insert calls, i.e. evaluations offered to the archive.
  std::uint64_t evaluations() const { return evaluations_; }

  const Elite* at(const CellIndex& cell) const;
  const Elite* find(const MeasureValues& m) const { return at(archive_index(m, spec_)); }

  /// Occupied elites in row-major cell order.
  std::vector<const Elite*> elites() const;

  std::size_t flat_index(const CellIndex& cell) const;
  CellIndex cell_of(std::size_t flat) const;
  bool occupied(std::size_t flat) const { return cells_[flat].has_value(); }

  /// Used when reloading a persisted archive. Throws if the cell is taken or
  /// does not match the elite's measures.
  void restore(Elite elite);
  void set_evaluations(std::uint64_t n) { evaluations_ = n; }

  bool operator==(const GridArchive&) const = default;

 private:
  MeasureSpec spec_;
  std::vector<std::optional<Elite>> cells_;
  std::size_t occupancy_ = 0;
  std::uint64_t evaluations_ = 0;
};

}  // namespace cadre
