#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace edgecl {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Canonical form: YYYY-MM-DDTHH:MM:SSZ, with a `.mmm` fraction only when the
// millisecond part is non-zero.
std::string format_timestamp(Timestamp t);

// Strict inverse of format_timestamp. Accepts exactly three fractional digits
// when a fraction is present so that parse/format is the identity.
std::optional<Timestamp> parse_timestamp(std::string_view text);

Timestamp now_utc();

}  // namespace edgecl
