#pragma once

#include <json.hpp>
#include <span>
#include <string>

#include "edgecl/alarm.hpp"
#include "edgecl/optimizer.hpp"
#include "edgecl/registry.hpp"
#include "edgecl/service.hpp"

namespace edgecl {

nlohmann::json to_json(const AlarmState &s);
nlohmann::json to_json(const PredictionRecord &r);
nlohmann::json to_json(const Run &r);
nlohmann::json to_json(const MetricEntry &m);
nlohmann::json to_json(const ArtifactRef &a);
nlohmann::json to_json(const OptimizeOutcome &o);
nlohmann::json to_json(const RetrainOutcome &o);

// Grid spec, bounds in sensor units:
//   {"max_points": N, "dims": [{"slot": "p5_temperature", "lower": .., "upper": .., "points": ..}, x5]}
// The in-memory grid lives in the model's standardized space.
nlohmann::json grid_to_json(const CovariateGrid &grid, const Scaler &scaler,
                            std::span<const std::string> slot_names);
CovariateGrid grid_from_json(const nlohmann::json &j, const Scaler &scaler,
                             std::span<const std::string> slot_names);

}  // namespace edgecl
