#include "edgecl/manifest.hpp"

#include <set>

#include "edgecl/error.hpp"

namespace edgecl {

std::string FeatureSlot::name() const {
  return "p" + std::to_string(phase) + "_" + std::string(variable_name(variable));
}

FeatureSlot FeatureSlot::from_name(std::string_view name) {
  if (name.size() < 4 || name[0] != 'p' || name[2] != '_' || name[1] < '1' || name[1] > '6') {
    fail(Errc::invalid_spec, "bad slot name '" + std::string(name) + "'");
  }
  const auto var = variable_from_name(name.substr(3));
  if (!var) fail(Errc::invalid_spec, "unknown variable in slot '" + std::string(name) + "'");
  return {name[1] - '0', *var};
}

FeatureManifest::FeatureManifest(std::vector<FeatureSlot> slots) : slots_(std::move(slots)) {
  std::set<std::pair<int, Variable>> seen;
  bool any_dynamic = false;
  for (const auto &s : slots_) {
    if (!seen.insert({s.phase, s.variable}).second) {
      fail(Errc::invalid_spec, "duplicate manifest slot " + s.name());
    }
    if (s.phase == 5) {
      any_dynamic = true;
    } else if (s.phase < 1 || s.phase > 3) {
      fail(Errc::invalid_spec, "slot " + s.name() + ": only phases 1-3 (static) and 5 (dynamic)");
    }
  }
  if (!any_dynamic) fail(Errc::invalid_spec, "manifest needs at least one dynamic slot");
}

FeatureManifest FeatureManifest::default_manifest() {
  std::vector<FeatureSlot> slots;
  for (int phase = 1; phase <= 3; ++phase) {
    for (auto v : {Variable::temperature, Variable::pH, Variable::fat_ratio}) {
      slots.push_back({phase, v});
    }
  }
  for (auto v : {Variable::temperature, Variable::pH, Variable::fat_ratio, Variable::flow_rate,
                 Variable::viscosity}) {
    slots.push_back({5, v});
  }
  return FeatureManifest(std::move(slots));
}

FeatureManifest FeatureManifest::parse(std::string_view text) {
  std::vector<FeatureSlot> slots;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty()) slots.push_back(FeatureSlot::from_name(line));
  }
  return FeatureManifest(std::move(slots));
}

std::string FeatureManifest::to_text() const {
  std::string out;
  for (const auto &s : slots_) out += s.name() + "\n";
  return out;
}

std::vector<std::string> FeatureManifest::names() const {
  std::vector<std::string> out;
  for (const auto &s : slots_) out.push_back(s.name());
  return out;
}

std::optional<std::size_t> FeatureManifest::index_of(int phase, Variable v) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].phase == phase && slots_[i].variable == v) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> FeatureManifest::dynamic_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].source() == SlotSource::dynamic) out.push_back(i);
  }
  return out;
}

}  // namespace edgecl
