#include "edgecl/wire.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <vector>

#include "edgecl/error.hpp"

namespace edgecl {

namespace {

constexpr std::array<std::string_view, kVariableCount> kNames = {
    "temperature", "pressure", "pH",       "hardness",  "fat_ratio",
    "protein_ratio", "lactose", "flow_rate", "viscosity", "frequency",
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto bar = line.find('|', start);
    if (bar == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, bar - start));
    start = bar + 1;
  }
}

bool valid_batch_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c <= ' ' || c == '|' || c == 0x7f) return false;
  }
  return true;
}

}  // namespace

std::string_view variable_name(Variable v) { return kNames[static_cast<std::size_t>(v)]; }

std::optional<Variable> variable_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Variable>(i);
  }
  return std::nullopt;
}

WireMessage parse_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = split_fields(line);
  if (f.size() != 6) {
    throw ParseError("line", "expected 6 '|'-separated fields, got " + std::to_string(f.size()));
  }
  if (f[0] != "v1") throw ParseError("version", "unsupported protocol version");

  const auto ts = parse_timestamp(f[1]);
  if (!ts) throw ParseError("timestamp", "not an RFC3339 UTC instant");
  if (!valid_batch_id(f[2])) throw ParseError("batch_id", "empty or contains separator/space");

  int phase = -1;
  {
    const auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), phase);
    if (ec != std::errc{} || p != f[3].data() + f[3].size() || f[3].size() != 1) {
      throw ParseError("phase", "not an integer in 0..6");
    }
  }
  if (phase == 0) {
    if (f[4] != "EOB" || f[5] != "0") throw ParseError("phase", "phase 0 is reserved for EOB");
    return BatchEnd{*ts, std::string(f[2])};
  }
  if (phase < 1 || phase > 6) throw ParseError("phase", "out of range 1..6");

  const auto var = variable_from_name(f[4]);
  if (!var) throw ParseError("variable", "unknown variable '" + std::string(f[4]) + "'");

  double value = 0.0;
  const auto [p, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), value);
  if (ec != std::errc{} || p != f[5].data() + f[5].size() || f[5].empty()) {
    throw ParseError("value", "not a decimal number");
  }
  if (!std::isfinite(value)) throw ParseError("value", "not finite");

  return SensorReading{*ts, std::string(f[2]), phase, *var, value};
}

SensorReading parse_reading(std::string_view line) {
  auto msg = parse_line(line);
  if (auto *r = std::get_if<SensorReading>(&msg)) return std::move(*r);
  throw ParseError("phase", "end-of-batch marker where a reading was expected");
}

std::string shortest_decimal(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, p};
}

std::string format_reading(const SensorReading &r) {
  std::string out = "v1|";
  out += format_timestamp(r.timestamp);
  out += '|';
  out += r.batch_id;
  out += '|';
  out += std::to_string(r.phase);
  out += '|';
  out += variable_name(r.variable);
  out += '|';
  out += shortest_decimal(r.value);
  return out;
}

std::string format_batch_end(const BatchEnd &e) {
  return "v1|" + format_timestamp(e.timestamp) + "|" + e.batch_id + "|0|EOB|0";
}

std::string format_message(const WireMessage &m) {
  return std::visit(
      [](const auto &x) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, SensorReading>) {
          return format_reading(x);
        } else {
          return format_batch_end(x);
        }
      },
      m);
}

}  // namespace edgecl
