#include <doctest.h>

#include <cmath>
#include <random>

#include "edgecl/error.hpp"
#include "edgecl/wire.hpp"

using namespace edgecl;

namespace {

std::string field_of(std::string_view line) {
  try {
    parse_line(line);
  } catch (const ParseError &e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_SUITE("wire") {
  TEST_CASE("reading decodes every field") {
    const auto r = parse_reading("v1|2024-05-01T10:00:00Z|B042|5|viscosity|1.25");
    CHECK(format_timestamp(r.timestamp) == "2024-05-01T10:00:00Z");
    CHECK(r.batch_id == "B042");
    CHECK(r.phase == 5);
    CHECK(r.variable == Variable::viscosity);
    CHECK(r.value == 1.25);
  }

  TEST_CASE("errors name the offending field") {
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|7|pH|4.6") == "phase");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|2|color|3.0") == "variable");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|2|pH") == "line");
    CHECK(field_of("v2|2024-05-01T10:00:00Z|B042|2|pH|1") == "version");
    CHECK(field_of("v1|2024-05-01 10:00:00|B042|2|pH|1") == "timestamp");
    CHECK(field_of("v1|2024-05-01T10:00:00Z||2|pH|1") == "batch_id");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|x|pH|1") == "phase");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|2|pH|abc") == "value");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|2|pH|nan") == "value");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|2|pH|inf") == "value");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|0|pH|1") == "phase");
    CHECK(field_of("v1|2024-05-01T10:00:00Z|B042|0|pH|1").size() > 0);
  }

  TEST_CASE("parse errors carry the parse code") {
    try {
      parse_line("v1|2024-05-01T10:00:00Z|B042|7|pH|4.6");
      FAIL("no throw");
    } catch (const Error &e) {
      CHECK(e.code() == Errc::parse);
    }
  }

  TEST_CASE("end-of-batch marker") {
    const auto m = parse_line("v1|2024-05-01T10:30:00Z|B042|0|EOB|0");
    REQUIRE(std::holds_alternative<BatchEnd>(m));
    CHECK(std::get<BatchEnd>(m).batch_id == "B042");
    CHECK(format_message(m) == "v1|2024-05-01T10:30:00Z|B042|0|EOB|0");
    CHECK_THROWS_AS(parse_reading("v1|2024-05-01T10:30:00Z|B042|0|EOB|0"), ParseError);
  }

  TEST_CASE("vocabulary") {
    for (int i = 0; i < kVariableCount; ++i) {
      const auto v = static_cast<Variable>(i);
      CHECK(variable_from_name(variable_name(v)) == v);
    }
    CHECK_FALSE(variable_from_name("color"));
    CHECK_FALSE(variable_from_name("EOB"));
  }

  TEST_CASE("canonical lines round trip") {
    for (const char *line : {"v1|2024-05-01T10:00:00Z|B042|5|viscosity|1.25",
                             "v1|2024-05-01T10:00:00.123Z|X-1|1|pH|-4.5",
                             "v1|2024-12-31T23:59:59Z|b|6|frequency|0",
                             "v1|2024-05-01T10:00:00Z|B042|3|fat_ratio|0.1"}) {
      CHECK(format_message(parse_line(line)) == line);
    }
  }

  TEST_CASE("random readings round trip through the formatter") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> value(0.0, 1e3);
    std::uniform_int_distribution<int> phase(1, 6), var(0, kVariableCount - 1);
    std::uniform_int_distribution<long long> ms(0, 4'000'000'000'000LL);
    for (int i = 0; i < 5000; ++i) {
      SensorReading r;
      r.timestamp = Timestamp(std::chrono::milliseconds(ms(rng)));
      r.batch_id = "B" + std::to_string(i);
      r.phase = phase(rng);
      r.variable = static_cast<Variable>(var(rng));
      r.value = value(rng);
      const std::string line = format_reading(r);
      const auto back = parse_reading(line);
      REQUIRE(back == r);
      REQUIRE(format_reading(back) == line);
    }
  }

  TEST_CASE("shortest decimal") {
    CHECK(shortest_decimal(1.25) == "1.25");
    CHECK(shortest_decimal(0.1) == "0.1");
    CHECK(shortest_decimal(-3.0) == "-3");
    CHECK(std::strtod(shortest_decimal(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
  }
}
