#pragma once

#include <span>
#include <string>
#include <vector>

#include "edgecl/timestamp.hpp"

namespace edgecl {

enum Label : int { kGood = 0, kDefective = 1 };

struct FeatureVector {
  std::vector<double> values;
  std::string batch_id;
  std::string sample_id;
  Timestamp timestamp{};

  std::size_t dim() const { return values.size(); }
  std::span<const double> view() const { return values; }
};

struct LabeledSample {
  FeatureVector features;
  int label = kGood;
};

// Throws rejected_input unless `values` has `dim` finite entries.
void check_vector(std::span<const double> values, std::size_t dim);

}  // namespace edgecl
