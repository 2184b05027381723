#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "edgecl/config.hpp"
#include "edgecl/plant_sim.hpp"
#include "edgecl/registry.hpp"
#include "edgecl/service.hpp"

namespace edgecl {

// Exit codes shared by every edgectl command.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitMissing = 3,
  kExitEnvironment = 4,
};

inline constexpr std::string_view kGridArtifact = "grid.json";
inline constexpr std::string_view kManifestArtifact = "manifest.txt";

// Optimization of raw features against a model snapshot.
OptimizeOutcome optimize_features(const Model &model, const CovariateGrid &grid,
                                  const FeatureVector &raw);

// Grid for a stored model: the config's grid file when set, else the run's
// grid.json artifact. Empty when neither exists.
std::optional<CovariateGrid> load_grid(const PipelineConfig &cfg, const Registry &registry,
                                       const Model &model, const ArtifactRef &model_ref);

struct TrainOptions {
  std::filesystem::path data;
  std::optional<std::uint64_t> seed;
};
int cmd_train(const PipelineConfig &cfg, const TrainOptions &opt, std::ostream &out, std::ostream &err);

struct SimulateOptions {
  std::size_t batches = 0;
  std::optional<std::size_t> drift_at;
  double drift_stds = 2.0;
  // Labeled-sample mode: one vector per batch into a training CSV at `out`.
  std::optional<std::size_t> labeled;
  std::filesystem::path out;  // stream mode: file sink overriding ingest.source
  std::optional<std::filesystem::path> labels;
  std::optional<std::uint64_t> seed;
  std::optional<double> speedup;
  // Overrides the port of a tcp:// ingest source (tests bind port 0).
  std::optional<int> port;
};
int cmd_simulate(const PipelineConfig &cfg, const SimulateOptions &opt, std::ostream &out,
                 std::ostream &err);

struct ServeOptions {
  // Stop after this many end-of-batch markers.
  std::optional<std::uint64_t> max_batches;
  const std::atomic<bool> *stop = nullptr;
  // Overrides for the configured ports (0 = any free port).
  std::optional<int> http_port;
  std::optional<int> ingest_port;
  // Called once both listeners are bound.
  std::function<void(int http_port, int ingest_port)> on_ready;
};
int cmd_serve(const PipelineConfig &cfg, const ServeOptions &opt, std::ostream &out, std::ostream &err);

struct OptimizeOptions {
  std::filesystem::path data;  // CSV with the manifest header
  std::optional<std::size_t> row;
};
int cmd_optimize(const PipelineConfig &cfg, const OptimizeOptions &opt, std::ostream &out,
                 std::ostream &err);

int cmd_report(const PipelineConfig &cfg, std::ostream &out, std::ostream &err);

// Last closed-batch outcome per batch id from an alarms.log stream.
std::map<std::string, bool> read_alarm_outcomes(std::istream &in);

// Rows defective / correct process, columns alarm activated / not activated,
// then the two rates. "n/a" for an empty denominator.
void print_confusion(std::ostream &out, const ConfusionReport &r);

}  // namespace edgecl
