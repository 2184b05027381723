#include "edgecl/error.hpp"

namespace edgecl {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::rejected_input: return "rejected_input";
    case Errc::empty_input: return "empty_input";
    case Errc::empty_memory: return "empty_memory";
    case Errc::empty_batch: return "empty_batch";
    case Errc::rehearsal_unavailable: return "rehearsal_unavailable";
    case Errc::parse: return "parse";
    case Errc::unknown_batch: return "unknown_batch";
    case Errc::service_unavailable: return "service_unavailable";
    case Errc::stale_model: return "stale_model";
    case Errc::not_found: return "not_found";
    case Errc::conflict: return "conflict";
    case Errc::precondition: return "precondition";
    case Errc::invalid_spec: return "invalid_spec";
    case Errc::immutable: return "immutable";
    case Errc::storage: return "storage";
    case Errc::environment: return "environment";
  }
  return "unknown";
}

}  // namespace edgecl
