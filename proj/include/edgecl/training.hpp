#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edgecl/ilvq.hpp"
#include "edgecl/metrics.hpp"
#include "edgecl/soft_forest.hpp"

namespace edgecl {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 2.0;
  int leaf_iterations = 10;
  // Synthetic rehearsal count is ceil(rehearsal_ratio * |new samples|).
  double rehearsal_ratio = 1.0;
  double noise_scale = 0.05;
  // Leaves are mixed with the uniform distribution by this weight before an
  // update, so that leaves the EM update drove to exactly 0/1 can move again.
  double leaf_smoothing = 0.01;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  // An empty update is a no-op (no version bump) when set, an error otherwise.
  bool allow_empty = true;
  // Metrics are computed here; on the training samples when empty.
  std::vector<LabeledSample> holdout;

  void validate() const;
};

struct TrainResult {
  Forest forest;
  MetricsReport metrics;
  std::vector<double> epoch_nll;  // mean NLL over the training set after each epoch
  std::size_t synthetic_count = 0;
  bool trained = false;
};

// Incremental update on standardized samples. Mixes in pseudo-rehearsal draws
// from `memory` (taken before the new samples are learned), runs the epoch
// loop, then feeds every new sample to the prototype memory.
TrainResult train_incremental(const Forest &forest, PrototypeMemory &memory,
                              std::span<const LabeledSample> new_samples,
                              const TrainConfig &cfg);

// z-score transform, frozen at initial training.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static Scaler identity(std::size_t dim);
  static Scaler fit(std::span<const LabeledSample> samples);

  std::size_t dim() const { return mean.size(); }
  std::vector<double> transform(std::span<const double> raw) const;
  double to_raw(std::size_t j, double z) const { return z * scale[j] + mean[j]; }
  double to_z(std::size_t j, double raw) const { return (raw - mean[j]) / scale[j]; }
};

// The deployable unit: scaler + forest + prototype memory.
struct Model {
  std::vector<std::string> slots;
  Scaler scaler;
  Forest forest;
  PrototypeMemory memory;

  std::size_t dim() const { return forest.dim; }
  std::uint64_t version() const { return forest.version; }
  // Raw sensor-unit input.
  ClassProbs predict_proba(std::span<const double> raw) const;
};

std::vector<LabeledSample> standardize(const Scaler &scaler, std::span<const LabeledSample> raw);

struct ModelUpdate {
  Model model;
  TrainResult result;
};

// Version 1 from raw labeled samples: fits the scaler, trains without rehearsal.
ModelUpdate initial_train(std::vector<std::string> slots, std::span<const LabeledSample> raw,
                          TrainConfig cfg, ForestShape shape = {}, IlvqParams ilvq = {});

// Incremental retrain of a published model on raw labeled samples. The holdout
// in `cfg` is in raw units too.
ModelUpdate retrain(const Model &model, std::span<const LabeledSample> raw, TrainConfig cfg);

}  // namespace edgecl
