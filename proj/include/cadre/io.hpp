#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadre/archive.hpp"
#include "cadre/metrics.hpp"
#include "cadre/qd.hpp"
#include "cadre/scenario_model.hpp"

namespace cadre {

// ---- scenario JSON ---------------------------------------------------------
//
// {"id": str, "dt": float,
//  "vehicles": [{"length", "width", "wheelbase"}, ...],   // optional, sedan defaults
//  "states": [[[x, y, psi, v], ...per vehicle], ...per step]}

nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j, const std::string& source = "<json>");
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// ---- archive file (.cadre.json) --------------------------------------------

struct ArchiveHeader {
  std::string scenario_id;
  std::size_t target = 0;
  std::string method;
  std::string config_hash;

  bool operator==(const ArchiveHeader&) const = default;
};

struct LoadedArchive {
  GridArchive archive;
  ArchiveHeader header;
};

nlohmann::json measure_spec_to_json(const MeasureSpec& spec);
MeasureSpec measure_spec_from_json(const nlohmann::json& j);

void save_archive(const GridArchive& archive, const ArchiveHeader& header,
                  const std::filesystem::path& path);
/// Parses and validates the whole file before building the archive.
LoadedArchive load_archive(const std::filesystem::path& path);
/// As above, and throws SpecMismatchError unless the file's grid equals `expected`.
LoadedArchive load_archive(const std::filesystem::path& path, const MeasureSpec& expected);

// ---- CSV exports -------------------------------------------------------------

/// Header `evaluations,coverage,mean_objective,qd_score`.
void write_metrics_csv(std::span<const MetricRow> log, const std::filesystem::path& path);
std::string format_metric_row(const MetricRow& row);

/// Header `i1,i2,i3,m1,m2,m3,f`, one row per elite.
void write_archive_export(const GridArchive& archive, const std::filesystem::path& path);

/// Header `t,vehicle,x,y,psi,v` from a per-step, per-vehicle trace.
void write_trajectory_export(const std::vector<std::vector<VehicleState>>& trace,
                             const std::filesystem::path& path);

// ---- run configuration -------------------------------------------------------

struct TargetSelection {
  enum class Kind { Index, Auto } kind = Kind::Auto;
  std::size_t index = 1;  // Kind::Index
  std::size_t count = 1;  // Kind::Auto: how many of the nearest vehicles to run
};

struct RunConfig {
  std::filesystem::path scenario;
  Method method = Method::Cadre;
  TargetSelection target;
  RunSettings settings;
  std::filesystem::path out_dir = "out";

  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are ignored.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

/// Stable FNV-1a hash of the configuration fields that influence results.
std::string config_hash(const RunConfig& cfg);

}  // namespace cadre
