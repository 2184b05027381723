#pragma once

#include <cstdint>
#include <span>

#include "edgecl/feature.hpp"
#include "edgecl/soft_forest.hpp"

namespace edgecl {

// Positive class is 1 (defective).
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
};

// Degenerate cases: precision is 1 when nothing was predicted positive and no
// positive was missed, else 0 (recall mirrors this with fp). F1 is
// 2tp / (2tp + fp + fn), reported as 1 when tp = fp = fn = 0.
MetricsReport metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                                  std::uint64_t tn);

// Predicted class is 1 iff p1 > threshold.
MetricsReport evaluate(const Forest &forest, std::span<const LabeledSample> samples,
                       double threshold = 0.5);

}  // namespace edgecl
