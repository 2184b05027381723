#include "edgecl/service.hpp"

#include <cmath>

#include "edgecl/error.hpp"
#include "edgecl/json_io.hpp"
#include "edgecl/model_io.hpp"
#include "edgecl/pipeline.hpp"

namespace edgecl {

void ServiceConfig::validate() const {
  alarm.validate();
  if (retrain_batch < 1) fail(Errc::invalid_spec, "retrain batch size must be >= 1");
  if (ring_size < 1) fail(Errc::invalid_spec, "prediction ring size must be >= 1");
  if (!(decision_threshold >= 0.0 && decision_threshold < 1.0)) {
    fail(Errc::invalid_spec, "decision threshold must be in [0, 1)");
  }
  train.validate();
}

namespace {

std::FILE *open_log(const std::filesystem::path &p) {
  if (p.empty()) return nullptr;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::FILE *f = std::fopen(p.c_str(), "ab");
  if (!f) fail(Errc::storage, "cannot open log " + p.string());
  return f;
}

}  // namespace

PredictService::PredictService(ServiceConfig cfg, Registry *registry)
    : cfg_(std::move(cfg)), registry_(registry), alarms_(cfg_.alarm, cfg_.alarm_history) {
  cfg_.validate();
  prediction_log_ = open_log(cfg_.prediction_log);
  alarm_log_ = open_log(cfg_.alarm_log);
  worker_ = std::thread([this] { worker_loop(); });
}

PredictService::~PredictService() {
  {
    std::lock_guard lock(job_mu_);
    stopping_ = true;
  }
  job_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  if (prediction_log_) std::fclose(prediction_log_);
  if (alarm_log_) std::fclose(alarm_log_);
}

void PredictService::write_line(std::FILE *f, const std::string &line) {
  if (!f) return;
  std::lock_guard lock(log_mu_);
  std::fwrite(line.data(), 1, line.size(), f);
  std::fputc('\n', f);
  std::fflush(f);
}

std::uint64_t PredictService::swap_model(Model model) {
  auto next = std::make_shared<ModelHandle>();
  next->version = model.version();
  next->activated_at = now_utc();
  next->model = std::make_shared<const Model>(std::move(model));
  std::lock_guard lock(handle_mu_);
  if (handle_ && next->version <= handle_->version) {
    fail(Errc::stale_model, "model version " + std::to_string(next->version) +
                                " is not newer than active version " +
                                std::to_string(handle_->version));
  }
  handle_ = std::move(next);
  return handle_->version;
}

std::shared_ptr<const ModelHandle> PredictService::handle() const {
  std::lock_guard lock(handle_mu_);
  return handle_;
}

PredictResponse PredictService::predict(const FeatureVector &x) {
  const auto h = handle();
  if (!h) fail(Errc::service_unavailable, "no model loaded");
  check_vector(x.view(), h->model->dim());

  const double p_defect = h->model->predict_proba(x.view())[kDefective];
  auto stored = std::make_shared<Stored>();
  PredictionRecord &rec = stored->record;
  rec.sample_id = x.sample_id;
  rec.batch_id = x.batch_id;
  rec.p_defect = p_defect;
  rec.predicted_class = p_defect > cfg_.decision_threshold ? kDefective : kGood;
  rec.model_version = h->version;
  rec.timestamp = now_utc();
  stored->features = x;

  {
    std::lock_guard lock(ring_mu_);
    rec.seq = next_seq_++;
    if (rec.sample_id.empty()) {
      rec.sample_id = "auto-" + std::to_string(rec.seq);
      stored->features.sample_id = rec.sample_id;
    }
    ring_.push_back(stored);
    by_sample_[rec.sample_id] = stored;
    while (ring_.size() > cfg_.ring_size) {
      const auto &old = ring_.front();
      const auto it = by_sample_.find(old->record.sample_id);
      if (it != by_sample_.end() && it->second == old) by_sample_.erase(it);
      ring_.pop_front();
    }
  }
  ring_cv_.notify_all();
  write_line(prediction_log_, to_json(rec).dump());

  const auto upd = alarms_.record(rec.batch_id, rec.predicted_class == kDefective, rec.timestamp);
  if (upd.fired) {
    auto j = to_json(upd.state);
    j["event"] = "fired";
    write_line(alarm_log_, j.dump());
  }
  return {rec, upd.state.latched};
}

AlarmState PredictService::acknowledge_alarm(const std::string &batch_id,
                                             const std::string &operator_id) {
  return alarms_.acknowledge(batch_id, operator_id);
}

AlarmState PredictService::end_batch(const std::string &batch_id) {
  const auto s = alarms_.end_batch(batch_id);
  auto j = to_json(s);
  j["event"] = "closed";
  write_line(alarm_log_, j.dump());
  return s;
}

std::vector<PredictionRecord> PredictService::stream(std::uint64_t cursor, std::size_t max,
                                                     std::chrono::milliseconds wait) const {
  std::unique_lock lock(ring_mu_);
  ring_cv_.wait_for(lock, wait, [&] { return next_seq_ > cursor + 1; });
  std::vector<PredictionRecord> out;
  for (const auto &s : ring_) {
    if (out.size() >= max) break;
    if (s->record.seq > cursor) out.push_back(s->record);
  }
  return out;
}

std::optional<PredictionRecord> PredictService::find_prediction(const std::string &sample_id) const {
  std::lock_guard lock(ring_mu_);
  const auto it = by_sample_.find(sample_id);
  if (it == by_sample_.end()) return std::nullopt;
  return it->second->record;
}

std::optional<FeatureVector> PredictService::features_of(const std::string &sample_id) const {
  std::lock_guard lock(ring_mu_);
  const auto it = by_sample_.find(sample_id);
  if (it == by_sample_.end()) return std::nullopt;
  return it->second->features;
}

RetrainStatus PredictService::submit_label(const std::string &sample_id, int label,
                                           const std::string &submitted_by) {
  if (label != kGood && label != kDefective) fail(Errc::rejected_input, "label must be 0 or 1");
  const auto features = features_of(sample_id);
  if (!features) fail(Errc::not_found, "no prediction for sample " + sample_id);

  RetrainStatus status;
  Job job;
  {
    std::lock_guard lock(label_mu_);
    if (labeled_.count(sample_id)) fail(Errc::conflict, "sample " + sample_id + " already labelled");
    labeled_.insert(sample_id);
    label_buffer_.push_back({*features, label});
    if (label_buffer_.size() < cfg_.retrain_batch) {
      status.buffer_size = label_buffer_.size();
      return status;
    }
    job.samples = std::move(label_buffer_);
    label_buffer_.clear();
    if (registry_) {
      const auto h = handle();
      job.run_id = registry_
                       ->start_run({{"kind", "retrain"},
                                    {"samples", std::to_string(job.samples.size())},
                                    {"base_version", std::to_string(h ? h->version : 0)},
                                    {"submitted_by", submitted_by}})
                       .run_id;
    } else {
      job.run_id = ++local_run_id_;
    }
  }
  status.triggered = true;
  status.run_id = job.run_id;
  {
    std::lock_guard lock(job_mu_);
    jobs_.push_back(std::move(job));
  }
  job_cv_.notify_all();
  return status;
}

std::size_t PredictService::label_buffer_size() const {
  std::lock_guard lock(label_mu_);
  return label_buffer_.size();
}

void PredictService::wait_for_idle() {
  std::unique_lock lock(job_mu_);
  job_cv_.wait(lock, [&] { return jobs_.empty() && !job_running_; });
}

std::vector<RetrainOutcome> PredictService::retrain_history() const {
  std::lock_guard lock(job_mu_);
  return outcomes_;
}

void PredictService::on_retrain(std::function<void(const RetrainOutcome &)> fn) {
  std::lock_guard lock(job_mu_);
  on_retrain_ = std::move(fn);
}

void PredictService::worker_loop() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(job_mu_);
      job_cv_.wait(lock, [&] { return stopping_ || !jobs_.empty(); });
      if (jobs_.empty()) return;  // stopping with nothing queued
      job = std::move(jobs_.front());
      jobs_.pop_front();
      job_running_ = true;
    }
    run_job(job);
    {
      std::lock_guard lock(job_mu_);
      job_running_ = false;
    }
    job_cv_.notify_all();
  }
}

void PredictService::run_job(const Job &job) {
  RetrainOutcome out;
  out.run_id = job.run_id;
  out.samples = job.samples.size();
  try {
    const auto h = handle();
    if (!h) fail(Errc::service_unavailable, "no model to retrain");
    TrainConfig tc = cfg_.train;
    tc.holdout.clear();
    ModelUpdate upd = retrain(*h->model, job.samples, tc);
    if (registry_) {
      registry_->store_artifact(job.run_id, std::string(kModelArtifact),
                                serialize_model(upd.model));
      const auto &m = upd.result.metrics;
      registry_->log_metric(job.run_id, "accuracy", 0, m.accuracy);
      registry_->log_metric(job.run_id, "precision", 0, m.precision);
      registry_->log_metric(job.run_id, "recall", 0, m.recall);
      registry_->log_metric(job.run_id, "f1", 0, m.f1);
      for (std::size_t e = 0; e < upd.result.epoch_nll.size(); ++e) {
        if (std::isfinite(upd.result.epoch_nll[e])) {
          registry_->log_metric(job.run_id, "nll", e, upd.result.epoch_nll[e]);
        }
      }
    }
    out.version = swap_model(std::move(upd.model));
    out.ok = true;
    if (registry_) registry_->finish_run(job.run_id, RunStatus::finished);
  } catch (const std::exception &e) {
    out.ok = false;
    out.error = e.what();
    if (registry_) {
      try {
        registry_->finish_run(job.run_id, RunStatus::failed);
      } catch (const std::exception &) {
      }
    }
  }
  std::function<void(const RetrainOutcome &)> cb;
  {
    std::lock_guard lock(job_mu_);
    outcomes_.push_back(out);
    cb = on_retrain_;
  }
  if (cb) cb(out);
}

void PredictService::set_grid(CovariateGrid grid) {
  std::lock_guard lock(grid_mu_);
  grid_ = std::move(grid);
}

std::optional<CovariateGrid> PredictService::grid() const {
  std::lock_guard lock(grid_mu_);
  return grid_;
}

OptimizeOutcome PredictService::optimize(const FeatureVector &raw) const {
  const auto h = handle();
  if (!h) fail(Errc::service_unavailable, "no model loaded");
  const auto g = grid();
  if (!g) fail(Errc::precondition, "no optimizer grid configured");
  OptimizeOutcome out = optimize_features(*h->model, *g, raw);
  out.result.model_version = h->version;
  return out;
}

}  // namespace edgecl
