#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <variant>

#include "edgecl/alarm.hpp"
#include "edgecl/error.hpp"
#include "edgecl/json_io.hpp"
#include "edgecl/metrics.hpp"
#include "edgecl/model_io.hpp"
#include "edgecl/pipeline.hpp"
#include "edgecl/plant_sim.hpp"
#include "edgecl/registry.hpp"
#include "edgecl/sha256.hpp"
#include "edgecl/training.hpp"
#include "edgecl/wire.hpp"

namespace py = pybind11;
using namespace edgecl;

namespace {

std::vector<LabeledSample> samples_of(const std::vector<std::vector<double>> &x,
                                      const std::vector<int> &y) {
  if (x.size() != y.size()) throw py::value_error("X and y differ in length");
  std::vector<LabeledSample> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    LabeledSample s;
    s.features.values = x[i];
    s.features.sample_id = "py-" + std::to_string(i);
    s.label = y[i];
    out.push_back(std::move(s));
  }
  return out;
}

py::dict metrics_dict(const MetricsReport &m) {
  py::dict d;
  d["accuracy"] = m.accuracy;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["tp"] = m.tp;
  d["fp"] = m.fp;
  d["fn"] = m.fn;
  d["tn"] = m.tn;
  return d;
}

TrainConfig train_config(std::uint64_t seed, int epochs, double learning_rate, double rehearsal_ratio) {
  TrainConfig tc;
  tc.seed = seed;
  tc.epochs = epochs;
  tc.learning_rate = learning_rate;
  tc.rehearsal_ratio = rehearsal_ratio;
  return tc;
}

py::object from_json(const nlohmann::json &j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_edgecl, m) {
  m.doc() = "Edge continual-learning quality pipeline";

  py::register_exception<Error>(m, "EdgeclError", PyExc_RuntimeError);

  m.def("default_manifest", [] { return FeatureManifest::default_manifest().names(); },
        "Slot names of the default 14-slot manifest.");

  m.def("canonicalize", [](const std::string &line) { return format_message(parse_line(line)); },
        "Parse a wire line and format it back in canonical form.");

  m.def("sha256_hex", [](py::bytes b) { return sha256_hex(std::string(b)); });

  m.def("metrics_from_counts", [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
    return metrics_dict(metrics_from_counts(tp, fp, fn, tn));
  });

  m.def("alarm_condition", &alarm_condition, py::arg("total"), py::arg("defect"),
        py::arg("threshold") = 0.5, py::arg("min_count") = 10);

  m.def("score_alarms",
        [](std::uint64_t ad, std::uint64_t nad, std::uint64_t ag, std::uint64_t nag) {
          const auto r = confusion_from_counts(ad, nad, ag, nag);
          py::dict d;
          d["alarm_precision"] = r.alarm_precision ? py::cast(*r.alarm_precision) : py::none();
          d["no_alarm_correctness"] =
              r.no_alarm_correctness ? py::cast(*r.no_alarm_correctness) : py::none();
          return d;
        },
        py::arg("alarm_defect"), py::arg("no_alarm_defect"), py::arg("alarm_good"),
        py::arg("no_alarm_good"));

  m.def("simulate_labeled",
        [](std::size_t n, std::uint64_t seed) {
          PlantConfig cfg = PlantConfig::default_config();
          cfg.seed = seed;
          PlantSimulator sim(cfg);
          std::vector<std::vector<double>> x;
          std::vector<int> y;
          for (const auto &s : sample_labeled(sim, n)) {
            x.push_back(s.features.values);
            y.push_back(s.label);
          }
          return py::make_tuple(x, y);
        },
        py::arg("n"), py::arg("seed") = 7, "(X, y) with one vector per simulated batch.");

  py::class_<Model>(m, "Model")
      .def_static(
          "train",
          [](const std::vector<std::vector<double>> &x, const std::vector<int> &y, std::uint64_t seed,
             int epochs, double learning_rate) {
            for (const auto &row : x) {
              if (row.size() != FeatureManifest::default_manifest().dim()) {
                throw py::value_error("rows must have one value per default manifest slot");
              }
            }
            auto upd = initial_train(FeatureManifest::default_manifest().names(), samples_of(x, y),
                                     train_config(seed, epochs, learning_rate, 0.0));
            return upd.model;
          },
          py::arg("X"), py::arg("y"), py::arg("seed") = 0, py::arg("epochs") = 100,
          py::arg("learning_rate") = 2.0, "Version-1 model on raw default-manifest rows.")
      .def(
          "retrain",
          [](const Model &self, const std::vector<std::vector<double>> &x, const std::vector<int> &y,
             std::uint64_t seed, double rehearsal_ratio) {
            TrainConfig tc = train_config(seed, 100, 2.0, rehearsal_ratio);
            auto upd = retrain(self, samples_of(x, y), tc);
            return py::make_tuple(upd.model, metrics_dict(upd.result.metrics));
          },
          py::arg("X"), py::arg("y"), py::arg("seed") = 0, py::arg("rehearsal_ratio") = 1.0)
      .def("predict_proba",
           [](const Model &self, const std::vector<double> &x) {
             const auto p = self.predict_proba(x);
             return std::vector<double>{p[0], p[1]};
           })
      .def("evaluate",
           [](const Model &self, const std::vector<std::vector<double>> &x, const std::vector<int> &y) {
             return metrics_dict(evaluate(self.forest, standardize(self.scaler, samples_of(x, y))));
           })
      .def("to_text", [](const Model &self) { return serialize_model(self); })
      .def_static("from_text", [](const std::string &s) { return deserialize_model(s); })
      .def_property_readonly("version", &Model::version)
      .def_property_readonly("dim", &Model::dim)
      .def_property_readonly("slots", [](const Model &self) { return self.slots; })
      .def(
          "default_grid",
          [](const Model &self, const std::vector<std::vector<double>> &x, std::size_t points) {
            std::vector<int> y(x.size(), 0);
            const auto grid = edgecl::default_grid(standardize(self.scaler, samples_of(x, y)),
                                                   FeatureManifest::default_manifest().dynamic_indices(),
                                                   points);
            return grid_to_json(grid, self.scaler, self.slots).dump();
          },
          py::arg("X"), py::arg("points") = 5, "Grid spec JSON spanning the rows' phase-5 ranges.")
      .def(
          "optimize",
          [](const Model &self, const std::vector<double> &x, const std::string &grid_json) {
            const auto grid = grid_from_json(nlohmann::json::parse(grid_json), self.scaler, self.slots);
            FeatureVector fv;
            fv.values = x;
            return from_json(to_json(optimize_features(self, grid, fv)));
          },
          py::arg("features"), py::arg("grid_json"));

  py::class_<Registry>(m, "Registry")
      .def(py::init([](const std::string &root, bool read_only) {
             return std::make_unique<Registry>(root, read_only ? Registry::Mode::reader
                                                               : Registry::Mode::writer);
           }),
           py::arg("root"), py::arg("read_only") = false)
      .def("start_run",
           [](Registry &r, const std::map<std::string, std::string> &params) {
             return r.start_run(params).run_id;
           },
           py::arg("params") = std::map<std::string, std::string>{})
      .def("log_metric", &Registry::log_metric)
      .def("store_artifact",
           [](Registry &r, std::uint64_t run_id, const std::string &name, py::bytes data) {
             return from_json(to_json(r.store_artifact(run_id, name, std::string(data))));
           })
      .def("store_model",
           [](Registry &r, std::uint64_t run_id, const Model &model) {
             return from_json(to_json(
                 r.store_artifact(run_id, std::string(kModelArtifact), serialize_model(model))));
           })
      .def("fetch_artifact",
           [](const Registry &r, std::uint64_t run_id, const std::string &name) {
             for (const auto &a : r.artifacts(run_id)) {
               if (a.name == name) return py::bytes(r.fetch_artifact(a));
             }
             throw Error(Errc::not_found, "no artifact " + name);
           })
      .def("finish_run",
           [](Registry &r, std::uint64_t run_id, bool ok) {
             r.finish_run(run_id, ok ? RunStatus::finished : RunStatus::failed);
           },
           py::arg("run_id"), py::arg("ok") = true)
      .def("runs",
           [](const Registry &r) {
             py::list out;
             for (const auto &run : r.runs()) out.append(from_json(to_json(run)));
             return out;
           })
      .def("metrics",
           [](const Registry &r, std::uint64_t run_id) {
             py::list out;
             for (const auto &e : r.metrics(run_id)) out.append(from_json(to_json(e)));
             return out;
           })
      .def("latest_model", [](const Registry &r) { return r.latest_model().first; })
      .def("verify", &Registry::verify);
}
