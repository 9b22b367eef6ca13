#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fusion_track/config_io.hpp"
#include "fusion_track/csv_export.hpp"
#include "fusion_track/errors.hpp"
#include "fusion_track/fogsim.hpp"
#include "fusion_track/runner.hpp"

namespace py = pybind11;
using namespace fusion_track;

namespace {

// Every entry point takes the scenario as a JSON document string; the Python wrapper
// serializes dicts so that the same keys and units as the CLI config files apply.
ExperimentDocument parse(const std::string& doc) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment(j);
}

py::array_t<double> column(const std::vector<EpochRecord>& recs, double (*get)(const EpochRecord&)) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(recs.size())});
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < recs.size(); ++i) v(static_cast<py::ssize_t>(i)) = get(recs[i]);
  return out;
}

py::array_t<double> xy(const std::vector<EpochRecord>& recs, bool estimate) {
  py::array_t<double> out({static_cast<py::ssize_t>(recs.size()), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Vec2& p = estimate ? recs[i].estimate : recs[i].truth;
    v(static_cast<py::ssize_t>(i), 0) = p.x();
    v(static_cast<py::ssize_t>(i), 1) = p.y();
  }
  return out;
}

py::dict run_to_dict(const RunResult& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["epoch"] = column(r.per_epoch, [](const EpochRecord& e) { return static_cast<double>(e.epoch); });
  d["t_s"] = column(r.per_epoch, [](const EpochRecord& e) { return e.t_s; });
  d["truth"] = xy(r.per_epoch, false);
  d["estimate"] = xy(r.per_epoch, true);
  d["error_m"] = column(r.per_epoch, [](const EpochRecord& e) { return e.error_m; });
  return d;
}

py::dict profile_to_dict(const RequirementProfile& p) {
  py::dict d;
  d["name"] = p.name;
  d["accuracy_m"] = p.accuracy_m;
  d["sigma_level"] = std::string(to_string(p.sigma_level));
  d["percentile"] = percentile_for(p.sigma_level);
  d["velocity_kmh"] = p.velocity_kmh;
  d["density_per_km2"] = p.density_per_km2 ? py::cast(*p.density_per_km2) : py::none();
  return d;
}

std::vector<FusionMode> modes_from(const std::vector<std::string>& names) {
  std::vector<FusionMode> out;
  for (const auto& n : names) out.push_back(parse_fusion_mode(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "IMU + 5G range/AOA fusion tracking core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TopologyError>(m, "TopologyError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<ErrorReport>(m, "ErrorReport")
      .def(py::init([](std::vector<double> samples) { return ErrorReport::from_samples(std::move(samples)); }),
           py::arg("samples"))
      .def("percentile", &ErrorReport::percentile, py::arg("p"))
      .def("mean", &ErrorReport::mean)
      .def("max", &ErrorReport::max)
      .def("__len__", &ErrorReport::size)
      .def_property_readonly("sorted_errors", [](const ErrorReport& r) {
        return py::array_t<double>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(r.size())}, r.sorted_errors().data());
      });

  m.def("validate_config", [](const std::string& doc) {
    const ExperimentDocument d = parse(doc);
    return py::make_tuple(deployed_bs_count(d.scenario), epoch_count(d.scenario));
  }, py::arg("doc"), "Parse and validate a scenario document; returns (n_base_stations, n_epochs).");

  m.def("normalized_config", [](const std::string& doc) { return to_json(parse(doc).scenario).dump(); },
        py::arg("doc"), "Scenario document with every default filled in, as JSON.");

  m.def("run", [](const std::string& doc) {
    const ExperimentDocument d = parse(doc);
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run(d.scenario);
    }
    py::dict out = run_to_dict(r);
    out["report"] = cdf(std::span<const RunResult>(&r, 1), d.scenario.warmup_epochs);
    return out;
  }, py::arg("doc"));

  m.def("sweep", [](const std::string& doc, std::optional<std::vector<double>> isd,
                    std::optional<std::vector<std::size_t>> n, std::optional<std::vector<std::string>> modes,
                    std::optional<std::size_t> seeds, std::size_t jobs) {
    const ExperimentDocument d = parse(doc);
    SweepSpec spec = d.sweep;
    if (isd) spec.isd_values = *isd;
    if (n) spec.n_values = *n;
    if (modes) spec.modes = modes_from(*modes);
    if (seeds) spec.seeds = *seeds;
    std::vector<SweepCell> cells;
    {
      py::gil_scoped_release release;
      cells = sweep(d.scenario, spec, jobs);
    }
    py::list out;
    for (const SweepCell& c : cells) {
      py::dict row;
      row["isd_m"] = c.key.isd_m;
      row["n_bs"] = c.key.n_bs;
      row["mode"] = std::string(to_string(c.key.mode));
      row["report"] = c.report;
      out.append(row);
    }
    return out;
  }, py::arg("doc"), py::arg("isd_m") = py::none(), py::arg("n_fused_bs") = py::none(),
     py::arg("modes") = py::none(), py::arg("seeds") = py::none(), py::arg("jobs") = 0);

  m.def("profiles", [] {
    py::list out;
    for (const auto& p : builtin_requirement_profiles()) out.append(profile_to_dict(p));
    return out;
  });
  m.def("profile_lines", [] {
    std::vector<std::string> lines;
    for (const auto& p : builtin_requirement_profiles()) lines.push_back(csv::profile_line(p));
    return lines;
  });

  m.def("check_requirement", [](const ErrorReport& report, const std::string& profile) {
    const auto all = builtin_requirement_profiles();
    const RequirementCheck c = check_requirement(report, find_profile(all, profile));
    py::dict d;
    d["pass"] = c.pass;
    d["achieved_m"] = c.achieved_m;
    d["margin_m"] = c.margin_m;
    return d;
  }, py::arg("report"), py::arg("profile"));

  m.def("base_stations", [](const std::string& doc) {
    const Scenario sc = build_scenario(parse(doc).scenario);
    py::array_t<double> out({static_cast<py::ssize_t>(sc.sites.size()), py::ssize_t{2}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < sc.sites.size(); ++i) {
      v(static_cast<py::ssize_t>(i), 0) = sc.sites[i].position.x();
      v(static_cast<py::ssize_t>(i), 1) = sc.sites[i].position.y();
    }
    return out;
  }, py::arg("doc"));

  m.def("nearest_bs", [](const std::string& doc, std::pair<double, double> position, std::size_t n) {
    const Scenario sc = build_scenario(parse(doc).scenario);
    std::vector<int> ids;
    for (const BsSite& s : nearest_bs(Vec2(position.first, position.second), sc.sites, n)) ids.push_back(s.id);
    return ids;
  }, py::arg("doc"), py::arg("position"), py::arg("n"));

  m.def("true_range", [](std::pair<double, double> v, std::pair<double, double> bs) {
    return true_range(Vec2(v.first, v.second), Vec2(bs.first, bs.second));
  }, py::arg("vehicle"), py::arg("bs"));
  m.def("true_azimuth", [](std::pair<double, double> v, std::pair<double, double> bs) {
    return true_azimuth(Vec2(v.first, v.second), Vec2(bs.first, bs.second));
  }, py::arg("vehicle"), py::arg("bs"), "Azimuth of the vehicle seen from the BS, radians in (-pi, pi].");

  m.def("simulate_session", [](const std::string& doc, const std::string& architecture) {
    const ExperimentDocument d = parse(doc);
    const fog::FogTopology topo = make_topology(d.fog, d.scenario);
    const fog::Architecture arch = fog::parse_architecture(architecture);
    fog::SessionResult s;
    {
      py::gil_scoped_release release;
      s = fog::simulate_session(d.scenario, topo, arch);
    }
    py::list events;
    for (const auto& e : s.events) {
      py::dict ev;
      ev["t_ms"] = e.t_ms;
      ev["kind"] = std::string(fog::to_string(e.kind));
      std::vector<std::string> path;
      for (const auto& node : e.path) path.push_back(node.label());
      ev["path"] = path;
      ev["hops"] = e.hops();
      ev["latency_ms"] = e.latency_ms;
      ev["fog_owner"] = e.fog_owner ? py::cast(*e.fog_owner) : py::none();
      ev["context_version"] = e.context_version;
      events.append(ev);
    }
    py::dict out;
    out["architecture"] = std::string(fog::to_string(s.architecture));
    out["reports"] = s.reports;
    out["transfers"] = s.transfers;
    out["latency"] = s.latency;
    out["events"] = events;
    return out;
  }, py::arg("doc"), py::arg("architecture"));
}
