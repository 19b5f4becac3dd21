#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>

#include "cadre/baselines.hpp"
#include "cadre/errors.hpp"
#include "cadre/io.hpp"
#include "cadre/metrics.hpp"
#include "cadre/qd.hpp"
#include "cadre/scenes.hpp"
#include "cadre/traffic_sim.hpp"

namespace py = pybind11;
using namespace cadre;

namespace {

std::string outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::EgoCollision:
      return "ego_collision";
    case OutcomeKind::BackgroundCollision:
      return "background_collision";
    case OutcomeKind::NoCollision:
      return "no_collision";
  }
  return "unknown";
}

py::tuple measures_tuple(const MeasureValues& m) { return py::make_tuple(m.m1, m.m2, m.m3); }

MeasureValues measures_of(const std::array<double, 3>& m) { return {m[0], m[1], m[2]}; }

py::dict sim_dict(const SimResult& r) {
  py::dict d;
  d["f"] = r.f;
  d["m"] = measures_tuple(r.m);
  d["outcome"] = outcome_name(r.outcome.kind);
  d["t_impact"] = r.outcome.t_impact;
  d["min_distance"] = r.outcome.min_ego_distance;
  return d;
}

RetrieveMode parse_mode(const std::string& s) {
  if (s == "exact") return RetrieveMode::Exact;
  if (s == "nearest") return RetrieveMode::Nearest;
  throw ValidationError("mode must be 'exact' or 'nearest'");
}

}  // namespace

PYBIND11_MODULE(_cadre, mod) {
  mod.doc() = "Quality-diversity search for safety-critical driving scenarios";

  py::register_exception<ValidationError>(mod, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(mod, "IoError", PyExc_OSError);

  py::class_<VehicleState>(mod, "VehicleState")
      .def(py::init<double, double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
           py::arg("psi") = 0.0, py::arg("v") = 0.0)
      .def_readwrite("x", &VehicleState::x)
      .def_readwrite("y", &VehicleState::y)
      .def_readwrite("psi", &VehicleState::psi)
      .def_readwrite("v", &VehicleState::v)
      .def("__repr__", [](const VehicleState& s) {
        return "VehicleState(x=" + std::to_string(s.x) + ", y=" + std::to_string(s.y) +
               ", psi=" + std::to_string(s.psi) + ", v=" + std::to_string(s.v) + ")";
      });

  py::class_<Action>(mod, "Action")
      .def(py::init<double, double>(), py::arg("accel") = 0.0, py::arg("steer") = 0.0)
      .def_readwrite("accel", &Action::accel)
      .def_readwrite("steer", &Action::steer);

  mod.def("bicycle_step", &bicycle_step, py::arg("state"), py::arg("action"),
          py::arg("wheelbase"), py::arg("dt"));
  mod.def(
      "rollout",
      [](const VehicleState& s0, const std::vector<Action>& actions, double wheelbase, double dt) {
        return rollout(s0, actions, wheelbase, dt);
      },
      py::arg("initial"), py::arg("actions"), py::arg("wheelbase"), py::arg("dt"));
  mod.def(
      "recover_actions",
      [](const std::vector<VehicleState>& traj, double wheelbase, double dt) {
        return recover_actions(traj, wheelbase, dt);
      },
      py::arg("trajectory"), py::arg("wheelbase"), py::arg("dt"));

  py::class_<Scenario>(mod, "Scenario")
      .def_readonly("id", &Scenario::id)
      .def_readonly("dt", &Scenario::dt)
      .def_property_readonly("horizon", &Scenario::horizon)
      .def_property_readonly("num_vehicles", &Scenario::num_vehicles)
      .def("trajectory", &Scenario::trajectory, py::arg("vehicle"));

  mod.def("load_scenario", &load_scenario, py::arg("path"));
  mod.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));
  mod.def(
      "make_synthetic_scene",
      [](const std::string& kind, std::uint64_t seed) {
        return make_synthetic_scene(parse_scene_kind(kind), seed);
      },
      py::arg("kind"), py::arg("seed") = 0);
  mod.def("select_targets", &select_targets, py::arg("scenario"), py::arg("k") = 5);

  mod.def(
      "simulate",
      [](const Scenario& sc, std::size_t target, const std::vector<double>& theta) {
        const TrafficSimulator sim(sc, target);
        return sim_dict(sim.run(theta));
      },
      py::arg("scenario"), py::arg("target"), py::arg("theta"),
      "Closed-loop simulation of one flat perturbation [da0, dd0, da1, dd1, ...].");
  mod.def(
      "perturbation_dimension",
      [](const Scenario& sc) { return 2 * sc.horizon(); }, py::arg("scenario"));

  py::class_<GridArchive>(mod, "GridArchive")
      .def(py::init<>())
      .def_property_readonly("occupancy", &GridArchive::occupancy)
      .def_property_readonly("size", &GridArchive::size)
      .def_property_readonly("evaluations", &GridArchive::evaluations)
      .def(
          "insert",
          [](GridArchive& a, const std::vector<double>& theta, double f,
             const std::array<double, 3>& m) {
            const auto r = a.insert(theta, f, measures_of(m));
            const char* names[] = {"new_cell", "improved", "rejected"};
            return py::make_tuple(names[static_cast<int>(r.status)], r.delta);
          },
          py::arg("theta"), py::arg("f"), py::arg("m"))
      .def("elites", [](const GridArchive& a) {
        py::list out;
        for (const Elite* e : a.elites()) {
          py::dict d;
          d["cell"] = e->cell;
          d["f"] = e->f;
          d["m"] = measures_tuple(e->m);
          d["theta"] = e->theta;
          d["discovered_at"] = e->discovered_at;
          out.append(d);
        }
        return out;
      });

  mod.def(
      "archive_index",
      [](const std::array<double, 3>& m) { return archive_index(measures_of(m), MeasureSpec::defaults()); },
      py::arg("m"));
  mod.def("coverage", &coverage, py::arg("archive"));
  mod.def("qd_score", &qd_score, py::arg("archive"));
  mod.def(
      "metrics",
      [](const GridArchive& a) {
        const auto row = metric_row(a);
        py::dict d;
        d["evaluations"] = row.evaluations;
        d["coverage"] = row.coverage;
        d["mean_objective"] = row.mean_objective;
        d["qd_score"] = row.qd_score;
        return d;
      },
      py::arg("archive"));
  mod.def(
      "retrieve",
      [](const GridArchive& a, const std::array<double, 3>& m, const std::string& mode) -> py::object {
        const auto e = retrieve(a, measures_of(m), parse_mode(mode));
        if (!e) return py::none();
        py::dict d;
        d["cell"] = e->cell;
        d["f"] = e->f;
        d["m"] = measures_tuple(e->m);
        d["theta"] = e->theta;
        return d;
      },
      py::arg("archive"), py::arg("m"), py::arg("mode") = "exact");

  mod.def(
      "run",
      [](const Scenario& sc, std::size_t target, const std::string& method, std::size_t budget,
         std::uint64_t seed, double tau, std::size_t batch_size, std::size_t threads) {
        RunSettings s;
        s.budget = budget;
        s.seed = seed;
        s.oar.temperature = tau;
        s.batch_size = batch_size;
        s.threads = threads;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_method(parse_method(method), sc, target, s);
        }
        py::list log;
        for (const auto& row : r.log) {
          log.append(py::make_tuple(row.evaluations, row.coverage, row.mean_objective, row.qd_score));
        }
        return py::make_tuple(std::move(r.archive), log);
      },
      py::arg("scenario"), py::arg("target"), py::arg("method") = "cadre",
      py::arg("budget") = 20000, py::arg("seed") = 0, py::arg("tau") = 0.1,
      py::arg("batch_size") = 36, py::arg("threads") = 1,
      "Runs cadre, random or cmaes; returns (archive, [(evaluations, coverage, mean_objective, qd_score), ...]).");

  mod.def(
      "save_archive",
      [](const GridArchive& a, const std::filesystem::path& path, const std::string& scenario_id,
         std::size_t target, const std::string& method) {
        save_archive(a, {scenario_id, target, method, ""}, path);
      },
      py::arg("archive"), py::arg("path"), py::arg("scenario_id") = "", py::arg("target") = 0,
      py::arg("method") = "");
  mod.def(
      "load_archive", [](const std::filesystem::path& path) { return load_archive(path).archive; },
      py::arg("path"));

  mod.attr("INF") = std::numeric_limits<double>::infinity();
}
