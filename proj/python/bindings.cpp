/*
 *
 * Copyright 2026 shedcep authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

// Python bindings for the main operations. Structured inputs (queries,
// configs, reports) cross the boundary as JSON text.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shedcep/engine.hpp"
#include "shedcep/expr.hpp"
#include "shedcep/harness.hpp"
#include "shedcep/model_io.hpp"
#include "shedcep/shedder.hpp"
#include "shedcep/stats.hpp"
#include "shedcep/stream_io.hpp"
#include "shedcep/synthetic.hpp"

namespace py = pybind11;
using namespace shedcep;

namespace {

StreamSchema make_schema(const std::vector<std::string>& types, const py::list& attributes) {
  std::vector<AttributeDecl> attrs;
  for (const auto& a : attributes) {
    auto d = a.cast<py::dict>();
    AttributeDecl decl;
    decl.name = d["name"].cast<std::string>();
    decl.min = d["min"].cast<double>();
    decl.max = d["max"].cast<double>();
    decl.bin_size = d.contains("bin_size") ? d["bin_size"].cast<double>() : 1.0;
    attrs.push_back(decl);
  }
  return StreamSchema(types, std::move(attrs));
}

}  // namespace

PYBIND11_MODULE(_shedcep, m) {
  m.doc() = "Load-shedding complex event processing";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ExprError>(m, "ExprError", PyExc_ValueError);
  py::register_exception<StreamParseError>(m, "StreamParseError", PyExc_ValueError);

  py::class_<Event>(m, "Event")
      .def(py::init<>())
      .def(py::init([](Seq seq, double ts, TypeId type, std::vector<double> attrs) {
             return Event{seq, ts, type, std::move(attrs)};
           }),
           py::arg("seq"), py::arg("ts"), py::arg("type"), py::arg("attrs") = std::vector<double>{})
      .def_readwrite("seq", &Event::seq)
      .def_readwrite("ts", &Event::ts)
      .def_readwrite("type", &Event::type)
      .def_readwrite("attrs", &Event::attrs)
      .def("__eq__", [](const Event& a, const Event& b) { return a == b; })
      .def("__repr__", [](const Event& e) {
        return "Event(seq=" + std::to_string(e.seq) + ", ts=" + format_double(e.ts) +
               ", type=" + std::to_string(e.type) + ")";
      });

  py::class_<StreamSchema>(m, "StreamSchema")
      .def(py::init(&make_schema), py::arg("types"), py::arg("attributes") = py::list())
      .def_property_readonly("type_names", [](const StreamSchema& s) {
        std::vector<std::string> names;
        for (const auto& t : s.types()) names.push_back(t.name);
        return names;
      })
      .def_property_readonly("attribute_count", &StreamSchema::attribute_count)
      .def("find_type", &StreamSchema::find_type);

  m.def("bin_value", [](double x, double min, double max, double bin_size) {
    return bin_value(x, AttributeDecl{"x", min, max, bin_size});
  }, py::arg("x"), py::arg("min"), py::arg("max"), py::arg("bin_size") = 1.0);

  m.def("generate_preset", [](const std::string& preset, std::uint64_t count, std::uint64_t seed) {
    auto spec = dataset_preset(preset, count, seed);
    return py::make_tuple(spec.schema(), generate_synthetic(spec));
  }, py::arg("preset"), py::arg("count"), py::arg("seed") = 1,
        "Returns (schema, events) for one of DS1..DS8.");

  m.def("generate", [](std::vector<std::string> types, std::vector<double> mean_interarrival,
                       std::uint64_t count, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.types = std::move(types);
    spec.mean_interarrival = std::move(mean_interarrival);
    spec.count = count;
    spec.seed = seed;
    return py::make_tuple(spec.schema(), generate_synthetic(spec));
  }, py::arg("types"), py::arg("mean_interarrival"), py::arg("count"), py::arg("seed") = 1);

  m.def("read_stream", [](const std::filesystem::path& path, const StreamSchema& schema) {
    return read_stream(path, schema);
  });
  m.def("write_stream", [](const std::filesystem::path& path, const std::vector<Event>& events,
                           const StreamSchema& schema) { write_stream(path, events, schema); });

  m.def("detect", [](const std::string& queries_json, const StreamSchema& schema, const std::vector<Event>& events,
                     bool negation_kills_all) {
    const auto patterns = load_patterns(Json::parse(queries_json), schema);
    EngineOptions opts;
    opts.negation_kills_all = negation_kills_all;
    py::list out;
    for (const auto& ce : detect_all(patterns, events, opts))
      out.append(py::make_tuple(patterns[ce.pattern].id, ce.window, ce.events));
    return out;
  }, py::arg("queries_json"), py::arg("schema"), py::arg("events"), py::arg("negation_kills_all") = true,
        "Complex events as (pattern id, window id, contributing seqs).");

  m.def("aggregate", [](const std::vector<std::tuple<TypeId, std::vector<int>, std::vector<int>,
                                                     std::vector<double>>>& rows) {
    std::vector<Observation> obs;
    Seq seq = 0;
    for (const auto& [type, freq, attrs, credits] : rows) obs.push_back({seq++, {type, freq, attrs}, credits});
    py::list out;
    for (const auto& g : aggregate(obs))
      out.append(py::make_tuple(g.key.type, g.key.freq, g.key.attrs, g.M, g.O, g.M / static_cast<double>(g.O)));
    return out;
  }, "Groups (type, F, attr bins, credits) rows; returns (type, F, attrs, M, O, U).");

  m.def("select_threshold", [](const std::vector<double>& utilities, double rho) {
    UtilityHistogram h;
    for (double u : utilities) h.add(u);
    return select_threshold(h, rho).value();
  }, py::arg("utilities"), py::arg("rho"));

  m.def("estimate_rho", &estimate_rho, py::arg("lam"), py::arg("mu"), py::arg("queue_len"), py::arg("interval"),
        py::arg("rho_max") = 0.95);

  m.def("run_experiment", [](const std::filesystem::path& config, const std::vector<std::string>& overrides) {
    ExperimentConfig cfg = load_experiment(config, overrides);
    py::gil_scoped_release release;
    return run_experiment(cfg).to_json().dump(2);
  }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{}, "Returns the report as JSON text.");

  m.def("run_experiment_json", [](const std::string& config_json, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg = parse_experiment(Json::parse(config_json), base_dir);
    py::gil_scoped_release release;
    return run_experiment(cfg).to_json().dump(2);
  }, py::arg("config_json"), py::arg("base_dir") = std::filesystem::path{});

  m.def("compare", [](const std::vector<std::string>& reports, const std::string& format) {
    std::vector<QoRReport> rs;
    for (const auto& r : reports) rs.push_back(QoRReport::from_json(Json::parse(r)));
    return compare_reports(rs, format == "json" ? TableFormat::Json : TableFormat::Csv);
  }, py::arg("reports"), py::arg("format") = "csv");

  m.def("describe_model", [](const std::filesystem::path& path) { return describe_model(load_model(path)); });
}
