#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "edgecl/timestamp.hpp"

namespace edgecl {

enum class Variable {
  temperature,
  pressure,
  pH,
  hardness,
  fat_ratio,
  protein_ratio,
  lactose,
  flow_rate,
  viscosity,
  frequency,
};

inline constexpr int kVariableCount = 10;

std::string_view variable_name(Variable v);
std::optional<Variable> variable_from_name(std::string_view name);

struct SensorReading {
  Timestamp timestamp{};
  std::string batch_id;
  int phase = 1;  // 1..6
  Variable variable = Variable::temperature;
  double value = 0.0;

  bool operator==(const SensorReading &) const = default;
};

// `v1|<ts>|<batch_id>|0|EOB|0`
struct BatchEnd {
  Timestamp timestamp{};
  std::string batch_id;

  bool operator==(const BatchEnd &) const = default;
};

using WireMessage = std::variant<SensorReading, BatchEnd>;

// v1|<RFC3339 UTC>|<batch_id>|<phase 1-6>|<variable>|<decimal value>
// Throws ParseError naming the offending field.
WireMessage parse_line(std::string_view line);
// Same grammar, but an end-of-batch marker is a parse error.
SensorReading parse_reading(std::string_view line);

// Canonical encoding: shortest round-trip decimal for the value, so
// format_reading(parse_reading(line)) == line for every canonical line.
std::string format_reading(const SensorReading &r);
std::string format_batch_end(const BatchEnd &e);
std::string format_message(const WireMessage &m);

// Shortest decimal that parses back to the same double.
std::string shortest_decimal(double v);

}  // namespace edgecl
