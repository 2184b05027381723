#pragma once

#include <iosfwd>
#include <vector>

#include "edgecl/feature.hpp"
#include "edgecl/manifest.hpp"

namespace edgecl {

// Labeled CSV: header = manifest slot names then `label`; one sample per row.
// Throws rejected_input with the 1-based line number on any mismatch.
std::vector<LabeledSample> read_labeled_csv(std::istream &in, const FeatureManifest &manifest);
void write_labeled_csv(std::ostream &out, const FeatureManifest &manifest,
                       const std::vector<LabeledSample> &samples);

// Same layout without the label column (optimize input). A trailing `label`
// column is accepted and ignored.
std::vector<FeatureVector> read_feature_csv(std::istream &in, const FeatureManifest &manifest);

}  // namespace edgecl
