#include "edgecl/metrics.hpp"

#include "edgecl/error.hpp"

namespace edgecl {

MetricsReport metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                                  std::uint64_t tn) {
  MetricsReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  const auto n = r.total();
  if (n == 0) fail(Errc::empty_input, "metrics over zero samples");
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  r.accuracy = d(tp + tn) / d(n);
  r.precision = (tp + fp == 0) ? (fn == 0 ? 1.0 : 0.0) : d(tp) / d(tp + fp);
  r.recall = (tp + fn == 0) ? (fp == 0 ? 1.0 : 0.0) : d(tp) / d(tp + fn);
  const auto denom = 2 * tp + fp + fn;
  r.f1 = denom == 0 ? 1.0 : d(2 * tp) / d(denom);
  return r;
}

MetricsReport evaluate(const Forest &forest, std::span<const LabeledSample> samples,
                       double threshold) {
  if (samples.empty()) fail(Errc::empty_input, "evaluate: no samples");
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto &s : samples) {
    const bool predicted = predict_proba(forest, s.features.view())[1] > threshold;
    const bool actual = s.label == kDefective;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

}  // namespace edgecl
