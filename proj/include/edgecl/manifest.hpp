#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgecl/wire.hpp"

namespace edgecl {

enum class SlotSource { static_mean, dynamic };

// Static slots average phases 1-3; dynamic slots carry the latest phase-5 value.
struct FeatureSlot {
  int phase = 1;
  Variable variable = Variable::temperature;

  SlotSource source() const { return phase == 5 ? SlotSource::dynamic : SlotSource::static_mean; }
  // "p<phase>_<variable>", e.g. "p5_flow_rate".
  std::string name() const;
  static FeatureSlot from_name(std::string_view name);

  bool operator==(const FeatureSlot &) const = default;
};

class FeatureManifest {
 public:
  FeatureManifest() = default;
  explicit FeatureManifest(std::vector<FeatureSlot> slots);

  // Phases 1-3 x {temperature, pH, fat_ratio} static, then phase 5 x
  // {temperature, pH, fat_ratio, flow_rate, viscosity} dynamic. d = 14.
  static FeatureManifest default_manifest();

  // One slot name per line; blank lines and '#' comments ignored.
  static FeatureManifest parse(std::string_view text);
  std::string to_text() const;

  std::size_t dim() const { return slots_.size(); }
  const std::vector<FeatureSlot> &slots() const { return slots_; }
  std::vector<std::string> names() const;
  std::optional<std::size_t> index_of(int phase, Variable v) const;
  std::vector<std::size_t> dynamic_indices() const;

 private:
  std::vector<FeatureSlot> slots_;
};

}  // namespace edgecl
