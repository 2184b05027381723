#include "edgecl/ingest.hpp"

#include "edgecl/error.hpp"

namespace edgecl {

std::uint64_t BatchSummary::readings() const {
  std::uint64_t total = 0;
  for (auto c : phase_counts) total += c;
  return total;
}

IngestSession::IngestSession(FeatureManifest manifest, std::chrono::milliseconds late_window)
    : manifest_(std::move(manifest)), late_window_(late_window) {}

IngestSession::BatchState &IngestSession::state_for(const std::string &batch_id) {
  auto it = batches_.find(batch_id);
  if (it == batches_.end()) {
    BatchState st;
    st.dynamic_latest.assign(manifest_.dim(), std::nullopt);
    st.summary.batch_id = batch_id;
    it = batches_.emplace(batch_id, std::move(st)).first;
  }
  return it->second;
}

std::optional<FeatureVector> IngestSession::accept(const SensorReading &r) {
  BatchState &st = state_for(r.batch_id);
  if (st.newest && r.timestamp < *st.newest - late_window_) {
    ++st.summary.dropped_late;
    ++dropped_late_;
    return std::nullopt;
  }
  if (!st.newest || r.timestamp > *st.newest) st.newest = r.timestamp;

  switch (r.phase) {
    case 1:
    case 2:
    case 3:
      aggregate_static(r);
      return std::nullopt;
    case 5:
      return assemble(r);
    default:
      ++st.summary.phase_counts[static_cast<std::size_t>(r.phase)];
      return std::nullopt;
  }
}

void IngestSession::aggregate_static(const SensorReading &r) {
  if (r.phase < 1 || r.phase > 3) {
    fail(Errc::rejected_input, "aggregate_static: phase " + std::to_string(r.phase));
  }
  BatchState &st = state_for(r.batch_id);
  Mean &m = st.static_means[{r.phase, r.variable}];
  m.sum += r.value;
  ++m.count;
  ++st.summary.phase_counts[static_cast<std::size_t>(r.phase)];
}

std::optional<FeatureVector> IngestSession::assemble(const SensorReading &r) {
  if (r.phase != 5) fail(Errc::rejected_input, "assemble: phase " + std::to_string(r.phase));
  BatchState &st = state_for(r.batch_id);
  ++st.summary.phase_counts[5];
  if (const auto idx = manifest_.index_of(5, r.variable)) st.dynamic_latest[*idx] = r.value;

  FeatureVector fv;
  fv.values.resize(manifest_.dim());
  const auto &slots = manifest_.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].source() == SlotSource::dynamic) {
      if (!st.dynamic_latest[i]) return std::nullopt;
      fv.values[i] = *st.dynamic_latest[i];
    } else {
      const auto it = st.static_means.find({slots[i].phase, slots[i].variable});
      if (it == st.static_means.end()) return std::nullopt;
      fv.values[i] = it->second.sum / static_cast<double>(it->second.count);
    }
  }
  fv.batch_id = r.batch_id;
  fv.sample_id = r.batch_id + "-" + std::to_string(st.summary.vectors_emitted);
  fv.timestamp = r.timestamp;
  ++st.summary.vectors_emitted;
  return fv;
}

BatchSummary IngestSession::end_batch(const std::string &batch_id) {
  const auto it = batches_.find(batch_id);
  if (it == batches_.end()) fail(Errc::unknown_batch, "unknown batch '" + batch_id + "'");
  BatchSummary summary = std::move(it->second.summary);
  batches_.erase(it);
  return summary;
}

std::optional<double> IngestSession::static_mean(const std::string &batch_id, int phase,
                                                 Variable v) const {
  const auto it = batches_.find(batch_id);
  if (it == batches_.end()) return std::nullopt;
  const auto m = it->second.static_means.find({phase, v});
  if (m == it->second.static_means.end()) return std::nullopt;
  return m->second.sum / static_cast<double>(m->second.count);
}

}  // namespace edgecl
