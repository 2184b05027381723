#pragma once

#include <string>
#include <string_view>

#include "edgecl/training.hpp"

namespace edgecl {

// Line-oriented text format, header `TRIL3-MODEL 1`, sections [meta],
// [scaler], [tree i] and [ilvq]. Reals use 17 significant digits, so
// load(save(m)) re-serializes bit-identically.
std::string serialize_model(const Model &model);
Model deserialize_model(std::string_view text);

// Reads only the [meta] version, for registry scans.
std::uint64_t model_version_of(std::string_view text);

// "%.16e"
std::string format_real(double v);

}  // namespace edgecl
