#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "edgecl/alarm.hpp"
#include "edgecl/feature.hpp"
#include "edgecl/optimizer.hpp"
#include "edgecl/registry.hpp"
#include "edgecl/training.hpp"

namespace edgecl {

struct ModelHandle {
  std::shared_ptr<const Model> model;
  std::uint64_t version = 0;
  Timestamp activated_at{};
};

struct PredictionRecord {
  std::uint64_t seq = 0;  // stream cursor, starts at 1
  std::string sample_id;
  std::string batch_id;
  double p_defect = 0.0;
  int predicted_class = kGood;
  std::uint64_t model_version = 0;
  Timestamp timestamp{};
};

struct PredictResponse {
  PredictionRecord record;
  bool alarm_latched = false;
};

struct RetrainStatus {
  bool triggered = false;
  std::size_t buffer_size = 0;  // after this label, when queued
  std::uint64_t run_id = 0;     // when triggered
};

struct RetrainOutcome {
  std::uint64_t run_id = 0;
  bool ok = false;
  std::uint64_t version = 0;
  std::size_t samples = 0;
  std::string error;
};

struct ServiceConfig {
  AlarmParams alarm;
  std::size_t retrain_batch = 20;  // R
  std::size_t ring_size = 10000;
  double decision_threshold = 0.5;
  TrainConfig train;
  // Empty path: no log.
  std::filesystem::path prediction_log;
  std::filesystem::path alarm_log;
  std::size_t alarm_history = 1000;

  void validate() const;
};

struct OptimizeOutcome {
  OptimizationResult result;
  double p_good_current = 0.0;
  std::vector<double> best_raw;  // suggested covariate values in sensor units
  std::vector<Correction> corrections;
};

class PredictService {
 public:
  // `registry` may be null; retrain runs then get local ids and nothing is stored.
  PredictService(ServiceConfig cfg, Registry *registry);
  ~PredictService();
  PredictService(const PredictService &) = delete;
  PredictService &operator=(const PredictService &) = delete;

  // Throws stale_model unless model.version() > active version.
  std::uint64_t swap_model(Model model);
  // Null before the first swap.
  std::shared_ptr<const ModelHandle> handle() const;

  // Raw sensor-unit features. Throws service_unavailable / rejected_input. An
  // empty sample_id is replaced by "auto-<seq>".
  PredictResponse predict(const FeatureVector &x);

  RetrainStatus submit_label(const std::string &sample_id, int label,
                             const std::string &submitted_by = "");

  std::vector<AlarmState> alarm_status() const { return alarms_.snapshot(); }
  AlarmState acknowledge_alarm(const std::string &batch_id, const std::string &operator_id);
  AlarmState end_batch(const std::string &batch_id);

  // Records with seq > cursor, oldest first; waits up to `wait` when none.
  std::vector<PredictionRecord> stream(std::uint64_t cursor, std::size_t max,
                                       std::chrono::milliseconds wait) const;
  std::optional<PredictionRecord> find_prediction(const std::string &sample_id) const;
  // Raw features of a stored prediction.
  std::optional<FeatureVector> features_of(const std::string &sample_id) const;

  // Grid in the model's standardized space.
  void set_grid(CovariateGrid grid);
  std::optional<CovariateGrid> grid() const;
  // Raw features; snapshots the handle at call time.
  OptimizeOutcome optimize(const FeatureVector &raw) const;

  std::size_t label_buffer_size() const;
  // Blocks until no retrain job is queued or running.
  void wait_for_idle();
  std::vector<RetrainOutcome> retrain_history() const;
  // Called from the worker thread after each retrain job.
  void on_retrain(std::function<void(const RetrainOutcome &)> fn);

  std::chrono::steady_clock::time_point started() const { return started_; }
  const ServiceConfig &config() const { return cfg_; }

 private:
  struct Stored {
    PredictionRecord record;
    FeatureVector features;
  };
  struct Job {
    std::uint64_t run_id = 0;
    std::vector<LabeledSample> samples;
  };

  void worker_loop();
  void run_job(const Job &job);
  void write_line(std::FILE *f, const std::string &line);

  ServiceConfig cfg_;
  Registry *registry_;
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();

  mutable std::mutex handle_mu_;
  std::shared_ptr<const ModelHandle> handle_;

  AlarmBoard alarms_;

  mutable std::mutex ring_mu_;
  mutable std::condition_variable ring_cv_;
  std::deque<std::shared_ptr<const Stored>> ring_;
  std::unordered_map<std::string, std::shared_ptr<const Stored>> by_sample_;
  std::uint64_t next_seq_ = 1;

  std::mutex log_mu_;
  std::FILE *prediction_log_ = nullptr;
  std::FILE *alarm_log_ = nullptr;

  mutable std::mutex label_mu_;
  std::vector<LabeledSample> label_buffer_;
  std::set<std::string> labeled_;
  std::uint64_t local_run_id_ = 0;

  mutable std::mutex grid_mu_;
  std::optional<CovariateGrid> grid_;

  mutable std::mutex job_mu_;
  std::condition_variable job_cv_;
  std::deque<Job> jobs_;
  bool job_running_ = false;
  bool stopping_ = false;
  std::vector<RetrainOutcome> outcomes_;
  std::function<void(const RetrainOutcome &)> on_retrain_;
  std::thread worker_;
};

}  // namespace edgecl
