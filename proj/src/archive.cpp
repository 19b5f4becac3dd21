#include "cadre/archive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cadre/errors.hpp"

namespace cadre {

MeasureSpec MeasureSpec::defaults() {
  constexpr double pi = std::numbers::pi;
  return MeasureSpec{{MeasureAxis{0.0, pi / 8.0, 10}, MeasureAxis{0.0, 1.0, 20},
                      MeasureAxis{-pi, pi, 20}}};
}

std::size_t MeasureSpec::total_cells() const {
  std::size_t total = 1;
  for (const auto& a : axes) total *= static_cast<std::size_t>(a.cells);
  return total;
}

void MeasureSpec::validate() const {
  for (const auto& a : axes) {
    if (!(a.lower < a.upper) || a.cells < 1 || !std::isfinite(a.lower) ||
        !std::isfinite(a.upper)) {
      throw ValidationError("invalid measure spec " + describe());
    }
  }
}

std::string MeasureSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (k) os << " x ";
    os << "[" << axes[k].lower << ", " << axes[k].upper << "]/" << axes[k].cells;
  }
  return os.str();
}

CellIndex archive_index(const MeasureValues& m, const MeasureSpec& spec) {
  const std::array<double, 3> values{m.m1, m.m2, m.m3};
  CellIndex idx{};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& axis = spec.axes[k];
    const double v = std::clamp(values[k], axis.lower, axis.upper);
    const double scaled = (v - axis.lower) / (axis.upper - axis.lower) * axis.cells;
    idx[k] = std::clamp(static_cast<int>(std::floor(scaled)), 0, axis.cells - 1);
  }
  return idx;
}

GridArchive::GridArchive(MeasureSpec spec) : spec_(spec) {
  spec_.validate();
  cells_.resize(spec_.total_cells());
}

std::size_t GridArchive::flat_index(const CellIndex& cell) const {
  const auto& a = spec_.axes;
  return (static_cast<std::size_t>(cell[0]) * a[1].cells + cell[1]) * a[2].cells + cell[2];
}

CellIndex GridArchive::cell_of(std::size_t flat) const {
  const auto& a = spec_.axes;
  const int k = static_cast<int>(flat % a[2].cells);
  flat /= a[2].cells;
  const int j = static_cast<int>(flat % a[1].cells);
  const int i = static_cast<int>(flat / a[1].cells);
  return {i, j, k};
}

InsertResult GridArchive::insert(std::span<const double> theta, double f, const MeasureValues& m) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw ValidationError("objective must lie in [0, 1]");
  }
  ++evaluations_;
  const CellIndex cell = archive_index(m, spec_);
  auto& slot = cells_[flat_index(cell)];
  InsertResult result;
  if (!slot) {
    result = {InsertStatus::NewCell, f};
    ++occupancy_;
  } else if (f > slot->f) {
    result = {InsertStatus::Improved, f - slot->f};
  } else {
    return result;
  }
  slot = Elite{std::vector<double>(theta.begin(), theta.end()), f, m, cell, evaluations_};
  return result;
}

const Elite* GridArchive::at(const CellIndex& cell) const {
  for (std::size_t k = 0; k < 3; ++k) {
    if (cell[k] < 0 || cell[k] >= spec_.axes[k].cells) return nullptr;
  }
  const auto& slot = cells_[flat_index(cell)];
  return slot ? &*slot : nullptr;
}

std::vector<const Elite*> GridArchive::elites() const {
  std::vector<const Elite*> out;
  out.reserve(occupancy_);
  for (const auto& slot : cells_) {
    if (slot) out.push_back(&*slot);
  }
  return out;
}

void GridArchive::restore(Elite elite) {
  if (elite.cell != archive_index(elite.m, spec_)) {
    throw ValidationError("elite cell does not match its measures");
  }
  auto& slot = cells_[flat_index(elite.cell)];
  if (slot) {
    throw ValidationError("duplicate elite for one cell");
  }
  slot = std::move(elite);
  ++occupancy_;
}

}  // namespace cadre
