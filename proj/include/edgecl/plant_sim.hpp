#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "edgecl/feature.hpp"
#include "edgecl/manifest.hpp"
#include "edgecl/wire.hpp"

namespace edgecl {

// Per-batch setpoint ~ N(mean, std^2); each reading adds N(0, jitter^2).
struct VariableParams {
  int phase = 1;
  Variable variable = Variable::temperature;
  double mean = 0.0;
  double std = 0.0;
  double jitter = 0.0;
};

struct PlantConfig {
  FeatureManifest manifest;
  std::vector<VariableParams> variables;
  // Hardness = intercept + coefficients . (setpoints of the manifest slots) + N(0, noise^2).
  std::vector<double> hardness_coefficients;
  double hardness_intercept = 0.0;
  double hardness_noise = 0.0;
  double band_lo = 0.0;
  double band_hi = 1.0;
  int static_readings = 4;   // per variable, phases 1-4 and 6, one per minute
  int dynamic_readings = 30; // per variable, phase 5
  double rate_per_minute = 2.0;
  std::uint64_t seed = 7;
  Timestamp start{};

  // Six-stage cheese line over the default manifest. The band is centred on the
  // hardness mean and sized for a defect prevalence of about 48%.
  static PlantConfig default_config();

  void validate() const;
  const VariableParams *find(int phase, Variable v) const;

  double hardness_mean() const;
  double hardness_std() const;
  // Analytic P(hardness outside the band).
  double defect_probability() const;
};

struct SimulatedBatch {
  std::string batch_id;
  std::vector<SensorReading> readings;
  double true_hardness = 0.0;
  int true_label = kGood;
};

SimulatedBatch simulate_batch(const PlantConfig &cfg, std::mt19937_64 &rng,
                              const std::string &batch_id, Timestamp start);

// Simulated span of one batch.
std::chrono::milliseconds batch_duration(const PlantConfig &cfg);

// Sequential batch source: ids B00000, B00001, ... back to back in time.
class PlantSimulator {
 public:
  explicit PlantSimulator(PlantConfig cfg);

  SimulatedBatch next_batch();
  void set_config(PlantConfig cfg);
  const PlantConfig &config() const { return cfg_; }
  std::mt19937_64 &rng() { return rng_; }
  std::uint64_t batches_emitted() const { return index_; }

 private:
  PlantConfig cfg_;
  std::mt19937_64 rng_;
  std::uint64_t index_ = 0;
};

// Writes the batch as wire lines in timestamp order plus the EOB marker.
std::size_t emit(const SimulatedBatch &batch, std::ostream &sink);

struct VariableShift {
  int phase = 5;
  Variable variable = Variable::temperature;
  double offset = 0.0;
};

PlantConfig inject_drift(const PlantConfig &cfg, const std::vector<VariableShift> &shifts);

// +k std on every dynamic (phase-5) manifest variable.
std::vector<VariableShift> dynamic_shift(const PlantConfig &cfg, double stds);

// Replays a batch through a fresh ingest session and returns every vector it emits.
std::vector<FeatureVector> assemble_batch(const SimulatedBatch &batch,
                                          const FeatureManifest &manifest);

// One labelled vector per simulated batch, taken at a uniformly drawn point of
// the batch's phase-5 stream.
std::vector<LabeledSample> sample_labeled(PlantSimulator &sim, std::size_t n);

struct AlarmOutcome {
  std::string batch_id;
  int true_label = kGood;
  bool alarm = false;
};

struct ConfusionReport {
  std::uint64_t alarm_defect = 0;
  std::uint64_t no_alarm_defect = 0;
  std::uint64_t alarm_good = 0;
  std::uint64_t no_alarm_good = 0;
  // Empty when the denominator is zero.
  std::optional<double> alarm_precision;
  std::optional<double> no_alarm_correctness;

  std::uint64_t total() const { return alarm_defect + no_alarm_defect + alarm_good + no_alarm_good; }
};

ConfusionReport score_alarms(const std::vector<AlarmOutcome> &outcomes);
ConfusionReport confusion_from_counts(std::uint64_t alarm_defect, std::uint64_t no_alarm_defect,
                                      std::uint64_t alarm_good, std::uint64_t no_alarm_good);

// Sidecar: `batch_id,true_hardness,true_label`.
void write_labels_header(std::ostream &out);
void write_label_row(std::ostream &out, const SimulatedBatch &batch);
struct LabelRow {
  std::string batch_id;
  double true_hardness = 0.0;
  int true_label = kGood;
};
std::vector<LabelRow> read_labels_csv(std::istream &in);

}  // namespace edgecl
