#include "edgecl/pipeline.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "edgecl/dataset.hpp"
#include "edgecl/error.hpp"
#include "edgecl/http_api.hpp"
#include "edgecl/ingest_loop.hpp"
#include "edgecl/json_io.hpp"
#include "edgecl/model_io.hpp"

namespace edgecl {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int exit_for(const Error &e) {
  switch (e.code()) {
    case Errc::environment:
    case Errc::storage:
      return kExitEnvironment;
    case Errc::not_found:
      return kExitMissing;
    default:
      return kExitInput;
  }
}

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(Errc::rejected_input, "cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string percent(const std::optional<double> &v) {
  return v ? fixed(100.0 * *v, 2) + "%" : "n/a";
}

}  // namespace

OptimizeOutcome optimize_features(const Model &model, const CovariateGrid &grid,
                                  const FeatureVector &raw) {
  check_vector(raw.view(), model.dim());
  FeatureVector z = raw;
  z.values = model.scaler.transform(raw.view());
  OptimizeOutcome out;
  out.result = optimize(model.forest, z, grid);
  out.p_good_current = predict_proba(model.forest, z.values)[kGood];
  for (std::size_t k = 0; k < kCovariateCount; ++k) {
    out.best_raw.push_back(model.scaler.to_raw(grid.dims[k].slot, out.result.best[k]));
  }
  out.corrections = suggest_correction(out.result, z, grid, model.scaler, model.slots);
  return out;
}

std::optional<CovariateGrid> load_grid(const PipelineConfig &cfg, const Registry &registry,
                                       const Model &model, const ArtifactRef &model_ref) {
  std::string text;
  if (!cfg.grid_path.empty()) {
    text = read_file(cfg.grid_path);
  } else {
    bool found = false;
    for (const auto &a : registry.artifacts(model_ref.run_id)) {
      if (a.name == kGridArtifact) {
        text = registry.fetch_artifact(a);
        found = true;
      }
    }
    if (!found) return std::nullopt;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    fail(Errc::invalid_spec, std::string("grid spec: ") + e.what());
  }
  return grid_from_json(j, model.scaler, model.slots);
}

// ---------------------------------------------------------------- train

int cmd_train(const PipelineConfig &cfg, const TrainOptions &opt, std::ostream &out,
              std::ostream &err) {
  try {
    const FeatureManifest manifest = cfg.manifest();
    std::ifstream in(opt.data, std::ios::binary);
    if (!in) fail(Errc::rejected_input, "cannot read " + opt.data.string());
    const auto samples = read_labeled_csv(in, manifest);

    TrainConfig tc = cfg.train;
    if (opt.seed) tc.seed = *opt.seed;
    tc.holdout.clear();
    ModelUpdate upd = initial_train(manifest.names(), samples, tc, cfg.shape, cfg.ilvq);

    const auto standardized = standardize(upd.model.scaler, samples);
    const auto grid = default_grid(standardized, manifest.dynamic_indices(), cfg.grid_points);

    Registry registry(cfg.registry_root);
    const Run run = registry.start_run({{"kind", "initial"},
                                        {"data", opt.data.filename().string()},
                                        {"samples", std::to_string(samples.size())},
                                        {"seed", std::to_string(tc.seed)},
                                        {"epochs", std::to_string(tc.epochs)},
                                        {"learning_rate", shortest_decimal(tc.learning_rate)},
                                        {"leaf_iterations", std::to_string(tc.leaf_iterations)},
                                        {"trees", std::to_string(cfg.shape.trees)},
                                        {"depth", std::to_string(cfg.shape.depth)}});
    try {
      const auto ref = registry.store_artifact(run.run_id, std::string(kModelArtifact),
                                               serialize_model(upd.model));
      registry.store_artifact(run.run_id, std::string(kGridArtifact),
                              grid_to_json(grid, upd.model.scaler, upd.model.slots).dump(2) + "\n");
      registry.store_artifact(run.run_id, std::string(kManifestArtifact), manifest.to_text());
      const auto &m = upd.result.metrics;
      registry.log_metric(run.run_id, "accuracy", 0, m.accuracy);
      registry.log_metric(run.run_id, "precision", 0, m.precision);
      registry.log_metric(run.run_id, "recall", 0, m.recall);
      registry.log_metric(run.run_id, "f1", 0, m.f1);
      for (std::size_t e = 0; e < upd.result.epoch_nll.size(); ++e) {
        registry.log_metric(run.run_id, "nll", e, upd.result.epoch_nll[e]);
      }
      registry.finish_run(run.run_id, RunStatus::finished);
      out << "run_id " << run.run_id << "\n"
          << "model_version " << upd.model.version() << "\n"
          << "samples " << samples.size() << "\n"
          << "train_accuracy " << fixed(m.accuracy, 4) << "\n"
          << "sha256 " << ref.sha256 << "\n";
    } catch (...) {
      registry.finish_run(run.run_id, RunStatus::failed);
      throw;
    }
    return kExitOk;
  } catch (const Error &e) {
    err << "edgectl train: " << e.what() << "\n";
    return exit_for(e) == kExitMissing ? kExitInput : exit_for(e);
  }
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const PipelineConfig &cfg, const SimulateOptions &opt, std::ostream &out,
                 std::ostream &err) {
  try {
    PlantConfig plant = PlantConfig::default_config();
    plant.manifest = cfg.manifest();
    // Hardness coefficients are defined per default slot.
    if (plant.manifest.names() != FeatureManifest::default_manifest().names()) {
      fail(Errc::invalid_spec, "the simulator only supports the default manifest");
    }
    plant.seed = opt.seed.value_or(cfg.sim_seed);
    PlantSimulator sim(plant);

    if (opt.labeled) {
      if (*opt.labeled < 1) fail(Errc::rejected_input, "--labeled must be >= 1");
      if (opt.out.empty()) fail(Errc::rejected_input, "--labeled needs --out");
      const auto samples = sample_labeled(sim, *opt.labeled);
      std::ofstream f(opt.out, std::ios::binary | std::ios::trunc);
      if (!f) fail(Errc::environment, "cannot write " + opt.out.string());
      write_labeled_csv(f, plant.manifest, samples);
      out << "wrote " << samples.size() << " labeled samples to " << opt.out.string() << "\n";
      return kExitOk;
    }

    if (opt.batches < 1) fail(Errc::rejected_input, "--batches must be >= 1");
    if (opt.drift_at && *opt.drift_at >= opt.batches) {
      fail(Errc::rejected_input, "--drift-at must be below --batches");
    }
    const double speedup = opt.speedup.value_or(cfg.speedup);
    if (!(speedup > 0.0)) fail(Errc::rejected_input, "--speedup must be > 0");

    const fs::path labels_path = opt.labels.value_or(cfg.labels_path);
    if (labels_path.has_parent_path()) fs::create_directories(labels_path.parent_path());
    std::ofstream labels(labels_path, std::ios::binary | std::ios::trunc);
    if (!labels) fail(Errc::environment, "cannot write " + labels_path.string());
    write_labels_header(labels);

    // Sink: --out file, file: source, or a paced TCP connection.
    std::unique_ptr<std::ofstream> file;
    std::unique_ptr<TcpLineWriter> tcp;
    if (!opt.out.empty() || cfg.ingest_source.rfind("file:", 0) == 0) {
      const fs::path p = opt.out.empty() ? fs::path(cfg.ingest_source.substr(5)) : opt.out;
      file = std::make_unique<std::ofstream>(p, std::ios::binary | std::ios::trunc);
      if (!*file) fail(Errc::environment, "cannot write " + p.string());
    } else {
      Endpoint ep = parse_endpoint(std::string_view(cfg.ingest_source).substr(6));
      if (opt.port) ep.port = *opt.port;
      tcp = std::make_unique<TcpLineWriter>(ep.host, ep.port, std::chrono::seconds(10));
    }

    const auto wall0 = std::chrono::steady_clock::now();
    std::optional<Timestamp> sim0;
    std::uint64_t lines = 0;
    const auto send = [&](const std::string &line, Timestamp ts) {
      if (tcp) {
        if (!sim0) sim0 = ts;
        const auto sim_elapsed = std::chrono::duration<double>(ts - *sim0);
        const auto target = wall0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                        sim_elapsed / speedup);
        std::this_thread::sleep_until(target);
        tcp->write_line(line);
      } else {
        *file << line << '\n';
      }
      ++lines;
    };

    for (std::size_t b = 0; b < opt.batches; ++b) {
      if (opt.drift_at && b == *opt.drift_at) {
        sim.set_config(inject_drift(sim.config(), dynamic_shift(sim.config(), opt.drift_stds)));
      }
      const SimulatedBatch batch = sim.next_batch();
      for (const auto &r : batch.readings) send(format_reading(r), r.timestamp);
      const Timestamp end = batch.readings.empty() ? Timestamp{} : batch.readings.back().timestamp;
      send(format_batch_end({end, batch.batch_id}), end);
      write_label_row(labels, batch);
    }
    labels.flush();
    if (file) file->flush();
    if ((file && !*file) || !labels) fail(Errc::environment, "write failed");
    out << "emitted " << opt.batches << " batches (" << lines << " lines); labels in "
        << labels_path.string() << "\n";
    return kExitOk;
  } catch (const Error &e) {
    err << "edgectl simulate: " << e.what() << "\n";
    return exit_for(e) == kExitMissing ? kExitInput : exit_for(e);
  }
}

// ---------------------------------------------------------------- serve

int cmd_serve(const PipelineConfig &cfg, const ServeOptions &opt, std::ostream &out,
              std::ostream &err) {
  try {
    const FeatureManifest manifest = cfg.manifest();
    Registry registry(cfg.registry_root);
    std::pair<Model, ArtifactRef> latest;
    try {
      latest = registry.latest_model();
    } catch (const Error &e) {
      if (e.code() != Errc::not_found) throw;
      err << "edgectl serve: no trained model in " << cfg.registry_root.string()
          << "; run `edgectl train` first\n";
      return kExitMissing;
    }
    Model &model = latest.first;
    if (model.slots != manifest.names()) {
      fail(Errc::invalid_spec, "stored model slots do not match the manifest");
    }
    const auto grid = load_grid(cfg, registry, model, latest.second);

    ServiceConfig sc;
    sc.alarm = cfg.alarm;
    sc.retrain_batch = cfg.retrain_batch;
    sc.ring_size = cfg.ring_size;
    sc.train = cfg.train;
    sc.prediction_log = cfg.prediction_log();
    sc.alarm_log = cfg.alarm_log();
    PredictService service(sc, &registry);
    const std::uint64_t version = service.swap_model(std::move(model));
    if (grid) service.set_grid(*grid);

    HttpApi api(service, &registry);
    Endpoint http = parse_endpoint(cfg.listen);
    if (opt.http_port) http.port = *opt.http_port;
    const int http_port = api.bind(http.host, http.port);

    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> ended{0};
    IngestPipeline pipeline(manifest, service);
    pipeline.on_batch_end([&](const AlarmState &) {
      if (opt.max_batches && ++ended >= *opt.max_batches) stop = true;
    });
    pipeline.on_error([&](std::string_view line, const std::string &why) {
      err << "ingest: " << why << " [" << line.substr(0, 120) << "]\n";
    });

    TcpIngestServer tcp;
    int ingest_port = 0;
    const bool from_file = cfg.ingest_source.rfind("file:", 0) == 0;
    if (!from_file) {
      Endpoint ep = parse_endpoint(std::string_view(cfg.ingest_source).substr(6));
      if (opt.ingest_port) ep.port = *opt.ingest_port;
      ingest_port = tcp.bind(ep.host, ep.port);
    }

    api.start();
    out << "serving model v" << version << " on http://" << http.host << ":" << http_port;
    if (from_file) {
      out << "; replaying " << cfg.ingest_source.substr(5) << "\n";
    } else {
      out << "; ingest tcp://" << cfg.ingest_source.substr(6, cfg.ingest_source.rfind(':') - 6)
          << ":" << ingest_port << "\n";
    }
    out.flush();
    if (opt.on_ready) opt.on_ready(http_port, ingest_port);

    std::thread ingest([&] {
      if (from_file) {
        std::ifstream in(cfg.ingest_source.substr(5), std::ios::binary);
        if (!in) {
          err << "edgectl serve: cannot read " << cfg.ingest_source.substr(5) << "\n";
          stop = true;
          return;
        }
        pump(in, pipeline, stop);
      } else {
        tcp.run(pipeline, stop);
      }
    });
    while (!stop.load() && !(opt.stop && opt.stop->load())) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    stop = true;
    ingest.join();
    api.stop();
    service.wait_for_idle();

    const auto s = pipeline.stats();
    const auto h = service.handle();
    out << "stopped: " << s.batches << " batches, " << s.predictions << " predictions, "
        << s.parse_errors << " rejected lines, " << s.dropped_late << " late readings; model v"
        << (h ? h->version : 0) << "\n";
    return kExitOk;
  } catch (const Error &e) {
    err << "edgectl serve: " << e.what() << "\n";
    return exit_for(e) == kExitMissing ? kExitInput : exit_for(e);
  }
}

// ---------------------------------------------------------------- optimize

int cmd_optimize(const PipelineConfig &cfg, const OptimizeOptions &opt, std::ostream &out,
                 std::ostream &err) {
  try {
    const FeatureManifest manifest = cfg.manifest();
    std::vector<FeatureVector> rows;
    {
      std::ifstream in(opt.data, std::ios::binary);
      if (!in) fail(Errc::rejected_input, "cannot read " + opt.data.string());
      rows = read_feature_csv(in, manifest);
    }
    if (opt.row) {
      if (*opt.row >= rows.size()) fail(Errc::rejected_input, "--row out of range");
      rows = {rows[*opt.row]};
    }
    if (!fs::is_directory(cfg.registry_root)) {
      err << "edgectl optimize: no registry at " << cfg.registry_root.string()
          << "; run `edgectl train` first\n";
      return kExitMissing;
    }
    Registry registry(cfg.registry_root, Registry::Mode::reader);
    std::pair<Model, ArtifactRef> latest;
    try {
      latest = registry.latest_model();
    } catch (const Error &e) {
      if (e.code() != Errc::not_found) throw;
      err << "edgectl optimize: no trained model; run `edgectl train` first\n";
      return kExitMissing;
    }
    const auto grid = load_grid(cfg, registry, latest.first, latest.second);
    if (!grid) {
      err << "edgectl optimize: no grid (set optimizer.grid or retrain)\n";
      return kExitMissing;
    }
    for (const auto &fv : rows) {
      const auto o = optimize_features(latest.first, *grid, fv);
      out << fv.sample_id << ": p_good " << fixed(o.p_good_current, 4) << " -> "
          << fixed(o.result.p_good, 4) << " (" << o.result.evaluations << " points, model v"
          << latest.first.version() << ")\n";
      for (const auto &c : o.corrections) {
        out << "  " << std::left << std::setw(16) << c.variable << std::right << std::setw(12)
            << fixed(c.current, 4) << " -> " << std::setw(12) << fixed(c.suggested, 4) << "  ("
            << (c.delta >= 0 ? "+" : "") << fixed(c.delta, 4) << ")\n";
      }
    }
    return kExitOk;
  } catch (const Error &e) {
    err << "edgectl optimize: " << e.what() << "\n";
    return exit_for(e) == kExitMissing ? kExitInput : exit_for(e);
  }
}

// ---------------------------------------------------------------- report

std::map<std::string, bool> read_alarm_outcomes(std::istream &in) {
  std::map<std::string, bool> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &) {
      // A torn final line from an interrupted writer is skipped.
      if (in.peek() == std::char_traits<char>::eof()) break;
      fail(Errc::rejected_input, "alarms.log line " + std::to_string(lineno) + " is not JSON");
    }
    if (j.value("event", "") != "closed") continue;
    out[j.at("batch_id").get<std::string>()] = j.at("latched").get<bool>();
  }
  return out;
}

void print_confusion(std::ostream &out, const ConfusionReport &r) {
  out << std::left << std::setw(20) << "" << std::right << std::setw(18) << "Alarm activated"
      << std::setw(22) << "Alarm not activated" << "\n"
      << std::left << std::setw(20) << "Defective process" << std::right << std::setw(18)
      << r.alarm_defect << std::setw(22) << r.no_alarm_defect << "\n"
      << std::left << std::setw(20) << "Correct process" << std::right << std::setw(18)
      << r.alarm_good << std::setw(22) << r.no_alarm_good << "\n"
      << "\n"
      << "alarm precision (defective | alarm):        " << percent(r.alarm_precision) << "\n"
      << "no-alarm correctness (correct | no alarm):  " << percent(r.no_alarm_correctness)
      << "\n";
}

int cmd_report(const PipelineConfig &cfg, std::ostream &out, std::ostream &err) {
  try {
    std::ifstream alarms(cfg.alarm_log(), std::ios::binary);
    if (!alarms) {
      err << "edgectl report: missing " << cfg.alarm_log().string() << "\n";
      return kExitInput;
    }
    std::ifstream labels(cfg.labels_path, std::ios::binary);
    if (!labels) {
      err << "edgectl report: missing " << cfg.labels_path.string() << "\n";
      return kExitInput;
    }
    const auto outcomes = read_alarm_outcomes(alarms);
    const auto rows = read_labels_csv(labels);
    std::vector<AlarmOutcome> joined;
    std::vector<std::string> unmatched;
    for (const auto &row : rows) {
      const auto it = outcomes.find(row.batch_id);
      if (it == outcomes.end()) {
        unmatched.push_back(row.batch_id);
        continue;
      }
      joined.push_back({row.batch_id, row.true_label, it->second});
    }
    if (joined.empty()) {
      err << "edgectl report: no labelled batch has a closed alarm record\n";
      return kExitInput;
    }
    const ConfusionReport r = score_alarms(joined);
    out << "processes " << joined.size() << " (labels " << rows.size() << ", unmatched "
        << unmatched.size() << ")\n\n";
    print_confusion(out, r);
    return kExitOk;
  } catch (const Error &e) {
    err << "edgectl report: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace edgecl
