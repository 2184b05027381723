#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgecl/feature.hpp"
#include "edgecl/manifest.hpp"
#include "edgecl/wire.hpp"

namespace edgecl {

struct BatchSummary {
  std::string batch_id;
  std::array<std::uint64_t, 7> phase_counts{};  // index 1..6
  std::uint64_t vectors_emitted = 0;
  std::uint64_t dropped_late = 0;

  std::uint64_t readings() const;
};

// Per-connection assembly state. Not thread-safe; one session per ingest loop.
class IngestSession {
 public:
  explicit IngestSession(FeatureManifest manifest,
                         std::chrono::milliseconds late_window = std::chrono::seconds(60));

  // Routes a reading by phase: 1-3 aggregate, 5 assemble, 4/6 counted only.
  // Readings older than the batch's newest timestamp minus the late window
  // are dropped and counted. Returns a vector when phase 5 completes one.
  std::optional<FeatureVector> accept(const SensorReading &r);

  // Phase 1-3 running mean update. Other phases are routed through accept().
  void aggregate_static(const SensorReading &r);

  // Records the phase-5 value and emits a vector once every slot has data.
  std::optional<FeatureVector> assemble(const SensorReading &r);

  // Releases the batch. Throws unknown_batch if it is not active.
  BatchSummary end_batch(const std::string &batch_id);

  bool has_batch(const std::string &batch_id) const { return batches_.count(batch_id) != 0; }
  std::optional<double> static_mean(const std::string &batch_id, int phase, Variable v) const;
  std::uint64_t dropped_late() const { return dropped_late_; }
  const FeatureManifest &manifest() const { return manifest_; }

 private:
  struct Mean {
    double sum = 0.0;
    std::uint64_t count = 0;
  };
  struct BatchState {
    std::map<std::pair<int, Variable>, Mean> static_means;
    std::vector<std::optional<double>> dynamic_latest;
    BatchSummary summary;
    std::optional<Timestamp> newest;
  };

  BatchState &state_for(const std::string &batch_id);

  FeatureManifest manifest_;
  std::chrono::milliseconds late_window_;
  std::map<std::string, BatchState> batches_;
  std::uint64_t dropped_late_ = 0;
};

}  // namespace edgecl
