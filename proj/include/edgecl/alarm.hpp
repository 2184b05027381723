#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "edgecl/timestamp.hpp"

namespace edgecl {

struct AlarmParams {
  double threshold = 0.5;  // tau, in (0, 1]
  std::uint64_t min_count = 10;

  void validate() const;
};

struct AlarmState {
  std::string batch_id;
  std::uint64_t total_predictions = 0;
  std::uint64_t defect_predictions = 0;
  double threshold = 0.5;
  std::uint64_t min_count = 10;
  bool latched = false;
  std::optional<Timestamp> fired_at;
  bool acknowledged = false;
  std::string acknowledged_by;
  bool closed = false;  // end-of-batch seen

  static AlarmState fresh(std::string batch_id, const AlarmParams &params);
};

// total >= min_count and defect/total > threshold.
bool alarm_condition(std::uint64_t total, std::uint64_t defect, double threshold,
                     std::uint64_t min_count);

// Counts one prediction. Latches on the first prefix that meets the condition;
// stays latched afterwards.
AlarmState update_alarm(AlarmState state, bool defect_predicted, Timestamp now);

// Per-batch alarm states. Each batch has its own lock; the map lock is only
// held for lookup and lifecycle moves.
class AlarmBoard {
 public:
  explicit AlarmBoard(AlarmParams params, std::size_t history_limit = 1000);

  struct Update {
    AlarmState state;
    bool fired = false;  // this prediction latched the alarm
  };
  Update record(const std::string &batch_id, bool defect_predicted, Timestamp now);

  // Moves the batch to history. A batch with no predictions gets an empty
  // closed state so that every ended batch has an outcome.
  AlarmState end_batch(const std::string &batch_id);

  // Throws precondition when the batch has no latched alarm.
  AlarmState acknowledge(const std::string &batch_id, const std::string &operator_id);

  // Active batches (by id), then history (oldest first).
  std::vector<AlarmState> snapshot() const;
  std::optional<AlarmState> find(const std::string &batch_id) const;

  const AlarmParams &params() const { return params_; }

 private:
  struct Entry {
    mutable std::mutex mu;
    AlarmState state;
  };
  std::shared_ptr<Entry> lookup(const std::string &batch_id) const;

  AlarmParams params_;
  std::size_t history_limit_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> active_;
  std::deque<std::shared_ptr<Entry>> history_;
};

}  // namespace edgecl
