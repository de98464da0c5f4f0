#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "netexp/core/error.hpp"
#include "netexp/designs/plan.hpp"
#include "netexp/io/commands.hpp"
#include "netexp/io/config.hpp"
#include "netexp/io/csv.hpp"
#include "netexp/sim/scenario.hpp"
#include "netexp/sim/share.hpp"

PYBIND11_MAKE_OPAQUE(netexp::SessionLog)

namespace py = pybind11;
using namespace netexp;

namespace {

std::uint64_t seed_or(const sim::ScenarioConfig& c, std::optional<std::uint64_t> seed) {
  return seed.value_or(c.seed);
}

py::object maybe(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::none();
}

template <typename T, typename F>
py::array_t<T> column(const SessionLog& log, F get) {
  py::array_t<T> a(py::array::ShapeContainer{static_cast<py::ssize_t>(log.size())});
  T* out = a.mutable_data();
  for (const auto& r : log) *out++ = static_cast<T>(get(r));
  return a;
}

// Column arrays of a session log, keyed by column name.
py::dict log_columns(const SessionLog& log) {
  py::dict d;
  d["session_id"] = column<std::int64_t>(log, [](const SessionRecord& r) { return r.session_id; });
  d["account_id"] = column<std::int64_t>(log, [](const SessionRecord& r) { return r.account_id; });
  d["link_id"] = column<int>(log, [](const SessionRecord& r) { return r.link_id; });
  d["start_time_s"] = column<double>(log, [](const SessionRecord& r) { return r.start_time; });
  d["hour"] = column<int>(log, [](const SessionRecord& r) { return r.hour_of_day; });
  d["treatment"] = column<int>(log, [](const SessionRecord& r) { return r.treatment; });
  for (Metric m : kAllMetrics) {
    d[py::str(std::string(to_string(m)))] =
        column<double>(log, [m](const SessionRecord& r) { return r.value(m); });
  }
  return d;
}

py::dict means(const MetricValues& v) {
  py::dict d;
  for (Metric m : kAllMetrics) d[py::str(std::string(to_string(m)))] = v[m];
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Congestion-interference experiment simulator and estimators";

  static py::exception<Error> error(m, "NetexpError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args: (code, message)
      PyErr_SetObject(error.ptr(),
                      py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
    }
  });

  py::enum_<Metric>(m, "Metric")
      .value("avg_throughput", Metric::avg_throughput)
      .value("min_rtt", Metric::min_rtt)
      .value("retrans_frac", Metric::retrans_frac)
      .value("bitrate", Metric::bitrate)
      .value("play_delay", Metric::play_delay);

  py::enum_<Aggregation>(m, "Aggregation")
      .value("hourly", Aggregation::hourly)
      .value("account", Aggregation::account);

  py::class_<Estimand>(m, "Estimand")
      .def_static("ate", &Estimand::ate)
      .def_static("tte", &Estimand::tte)
      .def_static("spillover", &Estimand::spillover)
      .def_static("partial", &Estimand::partial)
      .def_static("parse", &Estimand::parse)
      .def_property_readonly("p", [](const Estimand& e) { return maybe(e.p); })
      .def_property_readonly("label", &Estimand::label)
      .def("__eq__", [](const Estimand& a, const Estimand& b) { return a == b; })
      .def("__hash__", [](const Estimand& e) { return py::hash(py::str(e.label())); })
      .def("__repr__", [](const Estimand& e) { return "Estimand(" + e.label() + ")"; });

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("estimand", &Estimate::estimand)
      .def_readonly("metric", &Estimate::metric)
      .def_readonly("point", &Estimate::point)
      .def_readonly("std_error", &Estimate::std_error)
      .def_readonly("ci95_lo", &Estimate::ci95_lo)
      .def_readonly("ci95_hi", &Estimate::ci95_hi)
      .def_readonly("n_units", &Estimate::n_units)
      .def_readonly("aggregation", &Estimate::aggregation)
      .def_property_readonly("normalization_base",
                             [](const Estimate& e) { return maybe(e.normalization_base); })
      .def_property_readonly("normalized", [](const Estimate& e) -> py::object {
        if (!e.normalized) return py::none();
        const auto& s = *e.normalized;
        py::dict d;
        d["point"] = s.point;
        d["std_error"] = s.std_error;
        d["ci95_lo"] = s.ci95_lo;
        d["ci95_hi"] = s.ci95_hi;
        return d;
      })
      .def("contains", &Estimate::contains)
      .def("__repr__", [](const Estimate& e) {
        std::ostringstream os;
        os << "Estimate(" << e.estimand.label() << ", " << to_string(e.metric) << ", point=" << e.point
           << ", se=" << e.std_error << ")";
        return os.str();
      });

  py::class_<SessionRecord>(m, "SessionRecord")
      .def_readonly("session_id", &SessionRecord::session_id)
      .def_readonly("account_id", &SessionRecord::account_id)
      .def_readonly("link_id", &SessionRecord::link_id)
      .def_readonly("start_time", &SessionRecord::start_time)
      .def_readonly("hour_of_day", &SessionRecord::hour_of_day)
      .def_readonly("treatment", &SessionRecord::treatment)
      .def_readonly("cell", &SessionRecord::cell)
      .def("value", &SessionRecord::value);

  py::class_<SessionLog>(m, "SessionLog")
      .def("__len__", &SessionLog::size)
      .def("__getitem__",
           [](const SessionLog& l, py::ssize_t i) {
             if (i < 0) i += static_cast<py::ssize_t>(l.size());
             if (i < 0 || static_cast<std::size_t>(i) >= l.size()) throw py::index_error();
             return l[static_cast<std::size_t>(i)];
           })
      .def("columns", &log_columns, "Dict of numpy arrays, one per column")
      .def("save", [](const SessionLog& l, const std::filesystem::path& p) { io::save_session_log(p, l); })
      .def_static("load", &io::load_session_log);

  py::class_<sim::ScenarioConfig>(m, "Config")
      .def_static("load", &io::load_config, py::arg("path"))
      .def_static("parse", &io::parse_config, py::arg("text"))
      .def("to_json", [](const sim::ScenarioConfig& c) { return io::serialize_config(c); })
      .def_property_readonly("hash", [](const sim::ScenarioConfig& c) { return io::hash_hex(io::config_hash(c)); })
      .def_readwrite("name", &sim::ScenarioConfig::name)
      .def_readwrite("seed", &sim::ScenarioConfig::seed)
      .def_property_readonly("metrics", [](const sim::ScenarioConfig& c) { return c.metrics; });

  py::class_<sim::SimulationResult>(m, "SimulationResult")
      .def_readonly("log", &sim::SimulationResult::log)
      .def_readonly("steps", &sim::SimulationResult::steps)
      .def_property_readonly("congested_hours", [](const sim::SimulationResult& r) {
        py::dict d;
        for (const auto& l : r.links) d[py::int_(l.link_id)] = l.congested_hours();
        return d;
      });

  m.def("weighted_share",
        [](std::vector<double> demands, std::vector<double> weights, double capacity) {
          return sim::weighted_share(demands, weights, capacity);
        },
        py::arg("demands"), py::arg("weights"), py::arg("capacity"),
        "Weighted max-min allocation; use math.inf for backlogged demand.");

  m.def("simulate",
        [](const sim::ScenarioConfig& c, std::optional<std::uint64_t> seed,
           std::optional<std::filesystem::path> out) {
          py::gil_scoped_release release;
          return io::cmd_simulate(c, seed_or(c, seed), out.value_or(std::filesystem::path{})).result;
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none(),
        "Runs the scenario; writes the log (and a .meta.json sidecar) when out is given.");

  m.def("analyze",
        [](const SessionLog& log, const sim::ScenarioConfig& c, std::optional<std::uint64_t> seed) {
          const auto r = io::cmd_analyze(log, c, seed_or(c, seed));
          return py::make_tuple(r.estimates, r.notes);
        },
        py::arg("log"), py::arg("config"), py::arg("seed") = py::none(),
        "Returns (estimates, notes).");

  m.def("sweep",
        [](const sim::ScenarioConfig& c, std::vector<double> allocations,
           std::optional<std::uint64_t> seed) {
          io::SweepReport r;
          {
            py::gil_scoped_release release;
            r = io::cmd_sweep(c, std::move(allocations), seed_or(c, seed));
          }
          py::list rows;
          for (const auto& row : r.rows) {
            py::dict d;
            d["p"] = row.p;
            d["treatment"] = row.treatment;
            d["sessions"] = row.sessions;
            d["mean"] = means(row.mean);
            rows.append(d);
          }
          py::dict interference;
          for (const auto& d : r.diagnostics) {
            interference[py::str(std::string(to_string(d.metric)))] =
                py::make_tuple(d.interference_detected, d.interference_bonferroni);
          }
          py::dict out;
          out["rows"] = rows;
          out["estimates"] = r.estimates;
          out["interference"] = interference;
          return out;
        },
        py::arg("config"), py::arg("allocations"), py::arg("seed") = py::none());

  m.def("replicate",
        [](const sim::ScenarioConfig& c, int replications, std::optional<std::uint64_t> seed) {
          io::ReplicateReport r;
          {
            py::gil_scoped_release release;
            r = io::cmd_replicate(c, replications, seed_or(c, seed));
          }
          py::list rows;
          for (const auto& row : r.rows) {
            py::dict d;
            d["estimand"] = row.estimand.label();
            d["metric"] = row.metric;
            d["aggregation"] = row.aggregation;
            d["replications"] = row.replications;
            d["mean"] = row.mean;
            d["sd"] = row.sd;
            d["mc_se"] = row.mc_se;
            d["truth"] = row.truth;
            d["bias_z"] = row.bias_z;
            d["coverage"] = row.coverage;
            d["positive_fraction"] = row.positive_fraction;
            d["mean_ci_width"] = row.mean_ci_width;
            rows.append(d);
          }
          return rows;
        },
        py::arg("config"), py::arg("replications"), py::arg("seed") = py::none());

  m.def("calibrate",
        [](const sim::ScenarioConfig& baseline, const std::map<std::string, sim::ScenarioConfig>& designs,
           std::optional<std::uint64_t> seed, double alpha) {
          std::vector<io::CalibrationCandidate> candidates;
          for (const auto& [name, c] : designs) candidates.push_back({name, c.design});
          io::CalibrationReport r;
          {
            py::gil_scoped_release release;
            r = io::cmd_calibrate(baseline, candidates, seed_or(baseline, seed), alpha);
          }
          py::dict out;
          for (const auto& v : r.verdicts) {
            py::dict d;
            d["flagged"] = v.flagged;
            d["raw_false_positives"] = v.raw_false_positives;
            d["warnings"] = v.warnings;
            out[py::str(v.design)] = d;
          }
          return out;
        },
        py::arg("baseline"), py::arg("designs"), py::arg("seed") = py::none(),
        py::arg("alpha") = 0.05, "A/A check of candidate designs, keyed by name.");
}
