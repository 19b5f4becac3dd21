#include "cadre/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cadre/errors.hpp"

namespace cadre {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArchiveFormat = "cadre-archive";
constexpr int kArchiveVersion = 1;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source, std::string("JSON parse error at byte ") + std::to_string(e.byte) +
                                  ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

// ---- scenario --------------------------------------------------------------

json scenario_to_json(const Scenario& sc) {
  json vehicles = json::array();
  for (const auto& g : sc.geometries) {
    vehicles.push_back({{"length", g.length}, {"width", g.width}, {"wheelbase", g.wheelbase}});
  }
  json states = json::array();
  for (const auto& step : sc.states) {
    json row = json::array();
    for (const auto& s : step) row.push_back({s.x, s.y, s.psi, s.v});
    states.push_back(std::move(row));
  }
  return {{"id", sc.id}, {"dt", sc.dt}, {"vehicles", vehicles}, {"states", states}};
}

Scenario scenario_from_json(const json& j, const std::string& source) {
  Scenario sc;
  try {
    sc.id = get_or<std::string>(j, "id", "");
    sc.dt = j.at("dt").get<double>();
    const auto& states = j.at("states");
    for (const auto& step : states) {
      std::vector<VehicleState> row;
      for (const auto& s : step) {
        if (!s.is_array() || s.size() != 4) {
          throw FormatError(source, "each vehicle state must be [x, y, psi, v]");
        }
        row.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>(),
                       s[3].get<double>()});
      }
      sc.states.push_back(std::move(row));
    }
    const std::size_t n = sc.states.empty() ? 0 : sc.states.front().size();
    if (j.contains("vehicles")) {
      for (const auto& g : j.at("vehicles")) {
        VehicleGeometry geom;
        geom.length = get_or<double>(g, "length", geom.length);
        geom.width = get_or<double>(g, "width", geom.width);
        geom.wheelbase = get_or<double>(g, "wheelbase", geom.wheelbase);
        sc.geometries.push_back(geom);
      }
    } else {
      sc.geometries.assign(n, VehicleGeometry{});
    }
  } catch (const json::exception& e) {
    throw FormatError(source, std::string("malformed scenario: ") + e.what());
  }
  for (auto& step : sc.states) {
    for (auto& s : step) s.psi = normalize_angle(s.psi);
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  return scenario_from_json(parse_json(read_file(path), path.string()), path.string());
}

void save_scenario(const Scenario& scenario, const fs::path& path) {
  write_file(path, scenario_to_json(scenario).dump(1) + "\n");
}

// ---- archive ---------------------------------------------------------------

json measure_spec_to_json(const MeasureSpec& spec) {
  json axes = json::array();
  for (const auto& a : spec.axes) {
    axes.push_back({{"lower", a.lower}, {"upper", a.upper}, {"cells", a.cells}});
  }
  return axes;
}

MeasureSpec measure_spec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw ValidationError("measure spec must list exactly three axes");
  }
  MeasureSpec spec;
  for (std::size_t k = 0; k < 3; ++k) {
    spec.axes[k] = {j[k].at("lower").get<double>(), j[k].at("upper").get<double>(),
                    j[k].at("cells").get<int>()};
  }
  spec.validate();
  return spec;
}

void save_archive(const GridArchive& archive, const ArchiveHeader& header, const fs::path& path) {
  json elites = json::array();
  for (const Elite* e : archive.elites()) {
    elites.push_back({{"cell", e->cell},
                      {"f", e->f},
                      {"m", {e->m.m1, e->m.m2, e->m.m3}},
                      {"discovered_at", e->discovered_at},
                      {"theta", e->theta}});
  }
  json doc = {{"format", kArchiveFormat},
              {"version", kArchiveVersion},
              {"measure_spec", measure_spec_to_json(archive.spec())},
              {"evaluations", archive.evaluations()},
              {"occupancy", archive.occupancy()},
              {"scenario_id", header.scenario_id},
              {"target", header.target},
              {"method", header.method},
              {"config_hash", header.config_hash},
              {"elites", std::move(elites)}};
  write_file(path, doc.dump() + "\n");
}

LoadedArchive load_archive(const fs::path& path) {
  const std::string source = path.string();
  const json doc = parse_json(read_file(path), source);
  try {
    if (doc.at("format").get<std::string>() != kArchiveFormat) {
      throw FormatError(source, "not a cadre archive");
    }
    if (doc.at("version").get<int>() != kArchiveVersion) {
      throw FormatError(source, "unsupported archive version");
    }
    GridArchive archive(measure_spec_from_json(doc.at("measure_spec")));
    ArchiveHeader header{doc.at("scenario_id").get<std::string>(),
                         doc.at("target").get<std::size_t>(), doc.at("method").get<std::string>(),
                         doc.at("config_hash").get<std::string>()};
    for (const auto& je : doc.at("elites")) {
      Elite e;
      e.cell = je.at("cell").get<CellIndex>();
      e.f = je.at("f").get<double>();
      const auto m = je.at("m").get<std::vector<double>>();
      if (m.size() != 3) throw FormatError(source, "elite measures must have three entries");
      e.m = {m[0], m[1], m[2]};
      e.discovered_at = je.at("discovered_at").get<std::uint64_t>();
      e.theta = je.at("theta").get<std::vector<double>>();
      if (!(e.f >= 0.0 && e.f <= 1.0)) throw FormatError(source, "elite objective outside [0, 1]");
      archive.restore(std::move(e));
    }
    if (archive.occupancy() != doc.at("occupancy").get<std::size_t>()) {
      throw FormatError(source, "elite count does not match the header");
    }
    archive.set_evaluations(doc.at("evaluations").get<std::uint64_t>());
    return {std::move(archive), std::move(header)};
  } catch (const json::exception& e) {
    throw FormatError(source, std::string("malformed archive: ") + e.what());
  } catch (const SpecMismatchError&) {
    throw;
  } catch (const ValidationError& e) {
    throw FormatError(source, e.what());
  }
}

LoadedArchive load_archive(const fs::path& path, const MeasureSpec& expected) {
  auto loaded = load_archive(path);
  if (!(loaded.archive.spec() == expected)) {
    throw SpecMismatchError("archive " + path.string() + " uses measure grid " +
                            loaded.archive.spec().describe() + " but " + expected.describe() +
                            " was expected");
  }
  return loaded;
}

// ---- CSV -------------------------------------------------------------------

std::string format_metric_row(const MetricRow& row) {
  return std::to_string(row.evaluations) + "," + fmt(row.coverage) + "," +
         fmt(row.mean_objective) + "," + fmt(row.qd_score);
}

void write_metrics_csv(std::span<const MetricRow> log, const fs::path& path) {
  std::string out = "evaluations,coverage,mean_objective,qd_score\n";
  for (const auto& row : log) out += format_metric_row(row) + "\n";
  write_file(path, out);
}

void write_archive_export(const GridArchive& archive, const fs::path& path) {
  std::string out = "i1,i2,i3,m1,m2,m3,f\n";
  for (const Elite* e : archive.elites()) {
    out += std::to_string(e->cell[0]) + "," + std::to_string(e->cell[1]) + "," +
           std::to_string(e->cell[2]) + "," + fmt(e->m.m1) + "," + fmt(e->m.m2) + "," +
           fmt(e->m.m3) + "," + fmt(e->f) + "\n";
  }
  write_file(path, out);
}

void write_trajectory_export(const std::vector<std::vector<VehicleState>>& trace,
                             const fs::path& path) {
  std::string out = "t,vehicle,x,y,psi,v\n";
  for (std::size_t t = 0; t < trace.size(); ++t) {
    for (std::size_t i = 0; i < trace[t].size(); ++i) {
      const auto& s = trace[t][i];
      out += std::to_string(t) + "," + std::to_string(i) + "," + fmt(s.x) + "," + fmt(s.y) + "," +
             fmt(s.psi) + "," + fmt(s.v) + "\n";
    }
  }
  write_file(path, out);
}

// ---- run config ------------------------------------------------------------

void RunConfig::validate() const {
  if (scenario.empty()) throw ValidationError("run config: scenario path is empty");
  if (out_dir.empty()) throw ValidationError("run config: output directory is empty");
  if (target.kind == TargetSelection::Kind::Index && target.index == 0) {
    throw ValidationError("run config: target 0 is the ego vehicle");
  }
  if (target.kind == TargetSelection::Kind::Auto && target.count == 0) {
    throw ValidationError("run config: auto target count must be positive");
  }
  settings.validate();
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  auto& s = cfg.settings;
  try {
    if (j.contains("scenario")) cfg.scenario = j.at("scenario").get<std::string>();
    if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("target")) {
      const auto& t = j.at("target");
      if (t.is_number_integer()) {
        if (t.get<long long>() < 1) throw ValidationError("run config: target must be >= 1");
        cfg.target = {TargetSelection::Kind::Index, t.get<std::size_t>(), 1};
      } else {
        const auto name = t.get<std::string>();
        if (name == "auto") {
          cfg.target = {TargetSelection::Kind::Auto, 1, 1};
        } else if (name.rfind("auto-top-", 0) == 0) {
          std::size_t count = 0;
          const char* first = name.data() + 9;
          const char* last = name.data() + name.size();
          const auto res = std::from_chars(first, last, count);
          if (res.ec != std::errc{} || res.ptr != last) {
            throw ValidationError("run config: bad target '" + name + "'");
          }
          cfg.target = {TargetSelection::Kind::Auto, 1, count};
        } else {
          throw ValidationError("run config: bad target '" + name + "'");
        }
      }
    }
    s.budget = get_or<std::size_t>(j, "budget", s.budget);
    s.batch_size = get_or<std::size_t>(j, "batch_size", s.batch_size);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    if (j.contains("measures")) s.spec = measure_spec_from_json(j.at("measures"));
    if (j.contains("tau")) {
      const auto& tau = j.at("tau");
      s.oar.temperature = tau.is_string() && tau.get<std::string>() == "inf"
                              ? std::numeric_limits<double>::infinity()
                              : tau.get<double>();
    }
    s.oar.radius = get_or<int>(j, "neighborhood_radius", s.oar.radius);
    s.sim.bounds.accel_bound = get_or<double>(j, "accel_bound", s.sim.bounds.accel_bound);
    s.sim.bounds.steer_bound = get_or<double>(j, "steer_bound", s.sim.bounds.steer_bound);
    s.sim.bounds.steer_limit = get_or<double>(j, "steer_limit", s.sim.bounds.steer_limit);
    if (j.contains("m1_source")) {
      const auto src = j.at("m1_source").get<std::string>();
      if (src == "perturbation") {
        s.sim.m1_source = SteerMeasure::Perturbation;
      } else if (src == "total") {
        s.sim.m1_source = SteerMeasure::Total;
      } else {
        throw ValidationError("run config: m1_source must be 'perturbation' or 'total'");
      }
    }
    if (j.contains("ego")) {
      const auto& e = j.at("ego");
      auto& ego = s.sim.ego;
      ego.trigger_distance = get_or<double>(e, "trigger_distance", ego.trigger_distance);
      ego.trigger_half_angle = get_or<double>(e, "trigger_half_angle", ego.trigger_half_angle);
      ego.brake_decel = get_or<double>(e, "brake_decel", ego.brake_decel);
      ego.evade_steer_mag = get_or<double>(e, "evade_steer_mag", ego.evade_steer_mag);
    }
    s.sigma0 = get_or<double>(j, "sigma0", s.sigma0);
    s.init_std_fraction = get_or<double>(j, "init_std_fraction", s.init_std_fraction);
    s.stagnation_iterations = get_or<std::size_t>(j, "stagnation_iterations", s.stagnation_iterations);
    s.threads = get_or<std::size_t>(j, "threads", s.threads);
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("run config: ") + e.what());
  }
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  const auto& s = cfg.settings;
  json target;
  if (cfg.target.kind == TargetSelection::Kind::Index) {
    target = cfg.target.index;
  } else {
    target = cfg.target.count == 1 ? std::string("auto")
                                   : "auto-top-" + std::to_string(cfg.target.count);
  }
  json tau = std::isinf(s.oar.temperature) ? json("inf") : json(s.oar.temperature);
  return {{"scenario", cfg.scenario.string()},
          {"method", to_string(cfg.method)},
          {"target", target},
          {"budget", s.budget},
          {"batch_size", s.batch_size},
          {"seed", s.seed},
          {"measures", measure_spec_to_json(s.spec)},
          {"tau", tau},
          {"neighborhood_radius", s.oar.radius},
          {"accel_bound", s.sim.bounds.accel_bound},
          {"steer_bound", s.sim.bounds.steer_bound},
          {"steer_limit", s.sim.bounds.steer_limit},
          {"m1_source", s.sim.m1_source == SteerMeasure::Total ? "total" : "perturbation"},
          {"ego",
           {{"trigger_distance", s.sim.ego.trigger_distance},
            {"trigger_half_angle", s.sim.ego.trigger_half_angle},
            {"brake_decel", s.sim.ego.brake_decel},
            {"evade_steer_mag", s.sim.ego.evade_steer_mag}}},
          {"sigma0", s.sigma0},
          {"init_std_fraction", s.init_std_fraction},
          {"stagnation_iterations", s.stagnation_iterations},
          {"threads", s.threads},
          {"out", cfg.out_dir.string()}};
}

RunConfig load_run_config(const fs::path& path) {
  const json j = parse_json(read_file(path), path.string());
  RunConfig cfg = run_config_from_json(j);
  // Relative scenario paths are resolved against the config file's directory.
  if (!cfg.scenario.empty() && cfg.scenario.is_relative() && path.has_parent_path()) {
    cfg.scenario = path.parent_path() / cfg.scenario;
  }
  return cfg;
}

std::string config_hash(const RunConfig& cfg) {
  json j = run_config_to_json(cfg);
  // Paths and worker count do not change results.
  j.erase("scenario");
  j.erase("out");
  j.erase("threads");
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace cadre
