#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgecl {

enum class Errc {
  rejected_input,
  empty_input,
  empty_memory,
  empty_batch,
  rehearsal_unavailable,
  parse,
  unknown_batch,
  service_unavailable,
  stale_model,
  not_found,
  conflict,
  precondition,
  invalid_spec,
  immutable,
  storage,
  environment,  // e.g. port already in use
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Wire-protocol decoding failure. `field()` names the offending field.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string &what)
      : Error(Errc::parse, field + ": " + what), field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

 private:
  std::string field_;
};

[[noreturn]] inline void fail(Errc code, const std::string &what) {
  throw Error(code, what);
}

}  // namespace edgecl
