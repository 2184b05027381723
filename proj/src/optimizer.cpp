#include "edgecl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "edgecl/error.hpp"

namespace edgecl {

std::size_t CovariateGrid::total_points() const {
  std::size_t total = 1;
  for (const auto &d : dims) {
    if (d.points == 0) return 0;
    if (total > std::numeric_limits<std::size_t>::max() / d.points) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= d.points;
  }
  return total;
}

void CovariateGrid::validate(std::size_t dim) const {
  std::set<std::size_t> slots;
  for (const auto &d : dims) {
    if (d.slot >= dim) fail(Errc::invalid_spec, "covariate slot out of range");
    if (!slots.insert(d.slot).second) fail(Errc::invalid_spec, "covariate slots must be distinct");
    if (!std::isfinite(d.lower) || !std::isfinite(d.upper)) {
      fail(Errc::invalid_spec, "covariate bounds must be finite");
    }
    if (d.lower > d.upper) fail(Errc::invalid_spec, "covariate lower bound exceeds upper bound");
    if (d.points < 1) fail(Errc::invalid_spec, "covariate point count must be >= 1");
  }
  if (total_points() > max_points) {
    fail(Errc::invalid_spec, "grid has more than " + std::to_string(max_points) + " points");
  }
}

namespace {

std::vector<double> linspace(const CovariateDim &d) {
  std::vector<double> v(d.points);
  if (d.points == 1) {
    v[0] = d.lower;
    return v;
  }
  const double span = d.upper - d.lower;
  const double steps = static_cast<double>(d.points - 1);
  for (std::size_t i = 0; i < d.points; ++i) {
    v[i] = d.lower + span * (static_cast<double>(i) / steps);
  }
  v.back() = d.upper;
  return v;
}

}  // namespace

std::vector<GridPoint> build_grid(const CovariateGrid &grid) {
  std::size_t max_slot = 0;
  for (const auto &d : grid.dims) max_slot = std::max(max_slot, d.slot);
  grid.validate(max_slot + 1);

  std::array<std::vector<double>, kCovariateCount> axes;
  for (std::size_t k = 0; k < kCovariateCount; ++k) axes[k] = linspace(grid.dims[k]);

  std::vector<GridPoint> out;
  out.reserve(grid.total_points());
  std::array<std::size_t, kCovariateCount> idx{};
  for (;;) {
    GridPoint p;
    for (std::size_t k = 0; k < kCovariateCount; ++k) p[k] = axes[k][idx[k]];
    out.push_back(p);
    // Odometer with the last dim fastest.
    std::size_t k = kCovariateCount;
    while (k-- > 0) {
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

OptimizationResult optimize(const Forest &forest, const FeatureVector &base,
                            const CovariateGrid &grid) {
  check_vector(base.view(), forest.dim);
  grid.validate(forest.dim);
  const auto points = build_grid(grid);

  std::vector<double> x = base.values;
  OptimizationResult r;
  r.base_sample_id = base.sample_id;
  r.model_version = forest.version;
  r.evaluations = points.size();
  double best_dev = std::numeric_limits<double>::infinity();
  bool have = false;
  for (const auto &p : points) {
    double dev = 0.0;
    for (std::size_t k = 0; k < kCovariateCount; ++k) {
      const std::size_t slot = grid.dims[k].slot;
      x[slot] = p[k];
      const double diff = p[k] - base.values[slot];
      dev += diff * diff;
    }
    const double p_good = predict_proba(forest, x)[0];
    if (!have || p_good > r.p_good || (p_good == r.p_good && dev < best_dev)) {
      have = true;
      r.best = p;
      r.p_good = p_good;
      best_dev = dev;
    }
  }
  return r;
}

std::vector<Correction> suggest_correction(const OptimizationResult &result,
                                           const FeatureVector &base, const CovariateGrid &grid,
                                           const Scaler &scaler,
                                           std::span<const std::string> slot_names) {
  std::vector<Correction> out;
  for (std::size_t k = 0; k < kCovariateCount; ++k) {
    const std::size_t slot = grid.dims[k].slot;
    Correction c;
    c.variable = slot < slot_names.size() ? slot_names[slot] : "slot" + std::to_string(slot);
    c.current = scaler.to_raw(slot, base.values[slot]);
    c.suggested = scaler.to_raw(slot, result.best[k]);
    c.delta = c.suggested - c.current;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Correction &a, const Correction &b) {
    return std::abs(a.delta) > std::abs(b.delta);
  });
  return out;
}

CovariateGrid default_grid(std::span<const LabeledSample> standardized,
                           std::span<const std::size_t> dynamic_slots, std::size_t points) {
  if (dynamic_slots.size() != kCovariateCount) {
    fail(Errc::invalid_spec, "default grid needs exactly five dynamic slots");
  }
  if (standardized.empty()) fail(Errc::empty_input, "default grid needs training samples");
  CovariateGrid grid;
  for (std::size_t k = 0; k < kCovariateCount; ++k) {
    const std::size_t slot = dynamic_slots[k];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto &s : standardized) {
      lo = std::min(lo, s.features.values.at(slot));
      hi = std::max(hi, s.features.values.at(slot));
    }
    grid.dims[k] = {slot, lo, hi, points};
  }
  return grid;
}

}  // namespace edgecl
