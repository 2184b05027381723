#include "edgecl/alarm.hpp"

#include <cmath>

#include "edgecl/error.hpp"

namespace edgecl {

void AlarmParams::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) fail(Errc::invalid_spec, "alarm threshold must be in (0, 1]");
  if (min_count < 1) fail(Errc::invalid_spec, "alarm min_count must be >= 1");
}

AlarmState AlarmState::fresh(std::string batch_id, const AlarmParams &params) {
  AlarmState s;
  s.batch_id = std::move(batch_id);
  s.threshold = params.threshold;
  s.min_count = params.min_count;
  return s;
}

bool alarm_condition(std::uint64_t total, std::uint64_t defect, double threshold,
                     std::uint64_t min_count) {
  if (total == 0 || total < min_count) return false;
  // defect/total > threshold without the division.
  return static_cast<double>(defect) > threshold * static_cast<double>(total);
}

AlarmState update_alarm(AlarmState state, bool defect_predicted, Timestamp now) {
  ++state.total_predictions;
  if (defect_predicted) ++state.defect_predictions;
  if (!state.latched && alarm_condition(state.total_predictions, state.defect_predictions,
                                        state.threshold, state.min_count)) {
    state.latched = true;
    state.fired_at = now;
  }
  return state;
}

AlarmBoard::AlarmBoard(AlarmParams params, std::size_t history_limit)
    : params_(params), history_limit_(history_limit) {
  params_.validate();
}

std::shared_ptr<AlarmBoard::Entry> AlarmBoard::lookup(const std::string &batch_id) const {
  std::lock_guard lock(mu_);
  if (const auto it = active_.find(batch_id); it != active_.end()) return it->second;
  for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
    if ((*it)->state.batch_id == batch_id) return *it;
  }
  return nullptr;
}

AlarmBoard::Update AlarmBoard::record(const std::string &batch_id, bool defect_predicted,
                                      Timestamp now) {
  std::shared_ptr<Entry> e;
  {
    std::lock_guard lock(mu_);
    auto &slot = active_[batch_id];
    if (!slot) {
      slot = std::make_shared<Entry>();
      slot->state = AlarmState::fresh(batch_id, params_);
    }
    e = slot;
  }
  std::lock_guard lock(e->mu);
  const bool was = e->state.latched;
  e->state = update_alarm(std::move(e->state), defect_predicted, now);
  return {e->state, !was && e->state.latched};
}

AlarmState AlarmBoard::end_batch(const std::string &batch_id) {
  std::shared_ptr<Entry> e;
  {
    std::lock_guard lock(mu_);
    const auto it = active_.find(batch_id);
    if (it != active_.end()) {
      e = it->second;
      active_.erase(it);
    } else {
      e = std::make_shared<Entry>();
      e->state = AlarmState::fresh(batch_id, params_);
    }
    history_.push_back(e);
    while (history_.size() > history_limit_) history_.pop_front();
  }
  std::lock_guard lock(e->mu);
  e->state.closed = true;
  return e->state;
}

AlarmState AlarmBoard::acknowledge(const std::string &batch_id, const std::string &operator_id) {
  const auto e = lookup(batch_id);
  if (!e) fail(Errc::precondition, "no alarm for batch " + batch_id);
  std::lock_guard lock(e->mu);
  if (!e->state.latched) fail(Errc::precondition, "alarm for batch " + batch_id + " is not latched");
  if (!e->state.acknowledged) {
    e->state.acknowledged = true;
    e->state.acknowledged_by = operator_id;
  }
  return e->state;
}

std::vector<AlarmState> AlarmBoard::snapshot() const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(mu_);
    for (const auto &[id, e] : active_) entries.push_back(e);
    entries.insert(entries.end(), history_.begin(), history_.end());
  }
  std::vector<AlarmState> out;
  out.reserve(entries.size());
  for (const auto &e : entries) {
    std::lock_guard lock(e->mu);
    out.push_back(e->state);
  }
  return out;
}

std::optional<AlarmState> AlarmBoard::find(const std::string &batch_id) const {
  const auto e = lookup(batch_id);
  if (!e) return std::nullopt;
  std::lock_guard lock(e->mu);
  return e->state;
}

}  // namespace edgecl
