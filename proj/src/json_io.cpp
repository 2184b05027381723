#include "edgecl/json_io.hpp"

#include "edgecl/error.hpp"

namespace edgecl {

using json = nlohmann::json;

json to_json(const AlarmState &s) {
  json j{{"batch_id", s.batch_id},
         {"total_predictions", s.total_predictions},
         {"defect_predictions", s.defect_predictions},
         {"threshold", s.threshold},
         {"min_count", s.min_count},
         {"latched", s.latched},
         {"fired_at", nullptr},
         {"acknowledged", s.acknowledged},
         {"closed", s.closed}};
  if (s.fired_at) j["fired_at"] = format_timestamp(*s.fired_at);
  if (s.acknowledged) j["acknowledged_by"] = s.acknowledged_by;
  return j;
}

json to_json(const PredictionRecord &r) {
  return json{{"seq", r.seq},
              {"sample_id", r.sample_id},
              {"batch_id", r.batch_id},
              {"p_defect", r.p_defect},
              {"predicted_class", r.predicted_class},
              {"model_version", r.model_version},
              {"timestamp", format_timestamp(r.timestamp)}};
}

json to_json(const Run &r) {
  return json{{"run_id", r.run_id},
              {"created_at", format_timestamp(r.created_at)},
              {"params", r.params},
              {"status", run_status_name(r.status)}};
}

json to_json(const MetricEntry &m) {
  return json{{"name", m.name},
              {"step", m.step},
              {"value", m.value},
              {"timestamp", format_timestamp(m.timestamp)}};
}

json to_json(const ArtifactRef &a) {
  return json{{"name", a.name}, {"path", a.path}, {"bytes", a.bytes}, {"sha256", a.sha256}};
}

json to_json(const OptimizeOutcome &o) {
  json corrections = json::array();
  for (const auto &c : o.corrections) {
    corrections.push_back(
        {{"variable", c.variable}, {"current", c.current}, {"suggested", c.suggested}, {"delta", c.delta}});
  }
  return json{{"best", o.best_raw},
              {"p_good", o.result.p_good},
              {"p_good_current", o.p_good_current},
              {"evaluations", o.result.evaluations},
              {"base_sample_id", o.result.base_sample_id},
              {"model_version", o.result.model_version},
              {"corrections", corrections}};
}

json to_json(const RetrainOutcome &o) {
  json j{{"run_id", o.run_id}, {"ok", o.ok}, {"version", o.version}, {"samples", o.samples}};
  if (!o.ok) j["error"] = o.error;
  return j;
}

json grid_to_json(const CovariateGrid &grid, const Scaler &scaler,
                  std::span<const std::string> slot_names) {
  json dims = json::array();
  for (const auto &d : grid.dims) {
    if (d.slot >= slot_names.size()) fail(Errc::invalid_spec, "grid slot out of range");
    dims.push_back({{"slot", slot_names[d.slot]},
                    {"lower", scaler.to_raw(d.slot, d.lower)},
                    {"upper", scaler.to_raw(d.slot, d.upper)},
                    {"points", d.points}});
  }
  return json{{"max_points", grid.max_points}, {"dims", dims}};
}

CovariateGrid grid_from_json(const json &j, const Scaler &scaler,
                             std::span<const std::string> slot_names) {
  CovariateGrid grid;
  try {
    if (j.contains("max_points")) grid.max_points = j.at("max_points").get<std::size_t>();
    const auto &dims = j.at("dims");
    if (!dims.is_array() || dims.size() != kCovariateCount) {
      fail(Errc::invalid_spec, "grid needs exactly five dims");
    }
    for (std::size_t k = 0; k < kCovariateCount; ++k) {
      const auto &d = dims[k];
      const std::string name = d.at("slot");
      std::size_t slot = slot_names.size();
      for (std::size_t i = 0; i < slot_names.size(); ++i) {
        if (slot_names[i] == name) slot = i;
      }
      if (slot == slot_names.size()) fail(Errc::invalid_spec, "grid slot '" + name + "' not in manifest");
      if (slot >= scaler.dim()) fail(Errc::invalid_spec, "grid slot beyond scaler dimension");
      grid.dims[k] = {slot, scaler.to_z(slot, d.at("lower").get<double>()),
                      scaler.to_z(slot, d.at("upper").get<double>()),
                      d.at("points").get<std::size_t>()};
    }
  } catch (const json::exception &e) {
    fail(Errc::invalid_spec, std::string("grid spec: ") + e.what());
  }
  grid.validate(slot_names.size());
  return grid;
}

}  // namespace edgecl
