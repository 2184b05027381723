// edgectl: train | serve | simulate | optimize | report

#include <CLI11.hpp>
#include <csignal>
#include <iostream>

#include "edgecl/error.hpp"
#include "edgecl/pipeline.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char **argv) {
  using namespace edgecl;

  CLI::App app{"Edge continual-learning quality pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "TOML-style pipeline config")->check(CLI::ExistingFile);

  std::optional<std::uint64_t> seed;
  std::optional<double> speedup;
  std::optional<std::size_t> drift_at;

  auto *train = app.add_subcommand("train", "Initial training from a labeled CSV");
  TrainOptions train_opt;
  train->add_option("data", train_opt.data, "Labeled CSV (manifest slots + label)")->required();
  train->add_option("--seed", seed, "Training seed");

  auto *serve = app.add_subcommand("serve", "Ingest + prediction HTTP service");
  ServeOptions serve_opt;
  std::optional<std::uint64_t> serve_batches;
  serve->add_option("--batches", serve_batches, "Exit after this many batches end");

  auto *simulate = app.add_subcommand("simulate", "Emit simulated batches or a labeled set");
  SimulateOptions sim_opt;
  std::optional<std::size_t> labeled;
  std::optional<std::string> labels_path;
  std::string sim_out;
  simulate->add_option("--batches", sim_opt.batches, "Batches to emit");
  simulate->add_option("--drift-at", drift_at, "Batch index where drift starts");
  simulate->add_option("--drift-stds", sim_opt.drift_stds, "Drift size in phase-5 std units");
  simulate->add_option("--seed", seed, "Simulator seed");
  simulate->add_option("--speedup", speedup, "Wall-clock speedup for TCP sinks");
  simulate->add_option("--labeled", labeled, "Write N labeled samples to --out instead");
  simulate->add_option("--out", sim_out, "Output file (wire lines, or labeled CSV)");
  simulate->add_option("--labels", labels_path, "Labels sidecar path");

  auto *optimize = app.add_subcommand("optimize", "Grid-search corrections for feature rows");
  OptimizeOptions opt_opt;
  std::optional<std::size_t> row;
  optimize->add_option("data", opt_opt.data, "CSV with the manifest header")->required();
  optimize->add_option("--row", row, "Only this 0-based row");

  auto *report = app.add_subcommand("report", "Alarm confusion matrix from serve logs + labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  PipelineConfig cfg;
  try {
    cfg = config_path.empty() ? PipelineConfig::from_text("", ".") : PipelineConfig::load(config_path);
  } catch (const Error &e) {
    std::cerr << "edgectl: " << e.what() << "\n";
    return kExitInput;
  }

  if (*train) {
    train_opt.seed = seed;
    return cmd_train(cfg, train_opt, std::cout, std::cerr);
  }
  if (*serve) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    serve_opt.max_batches = serve_batches;
    serve_opt.stop = &g_stop;
    return cmd_serve(cfg, serve_opt, std::cout, std::cerr);
  }
  if (*simulate) {
    sim_opt.seed = seed;
    sim_opt.speedup = speedup;
    sim_opt.drift_at = drift_at;
    sim_opt.labeled = labeled;
    sim_opt.out = sim_out;
    if (labels_path) sim_opt.labels = *labels_path;
    return cmd_simulate(cfg, sim_opt, std::cout, std::cerr);
  }
  if (*optimize) {
    opt_opt.row = row;
    return cmd_optimize(cfg, opt_opt, std::cout, std::cerr);
  }
  if (*report) return cmd_report(cfg, std::cout, std::cerr);
  return kExitInput;
}
