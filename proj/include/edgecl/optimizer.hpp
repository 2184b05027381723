#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edgecl/soft_forest.hpp"
#include "edgecl/training.hpp"

namespace edgecl {

inline constexpr std::size_t kCovariateCount = 5;

struct CovariateDim {
  std::size_t slot = 0;  // index into the feature vector
  double lower = 0.0;
  double upper = 0.0;
  std::size_t points = 1;
};

struct CovariateGrid {
  std::array<CovariateDim, kCovariateCount> dims{};
  std::size_t max_points = 100000;

  std::size_t total_points() const;
  // Throws invalid_spec. `dim` bounds the slot indices.
  void validate(std::size_t dim) const;
};

using GridPoint = std::array<double, kCovariateCount>;

// Cartesian product of per-dim linspace(lower, upper, points); dim 0 varies
// slowest, values ascending.
std::vector<GridPoint> build_grid(const CovariateGrid &grid);

struct OptimizationResult {
  GridPoint best{};
  double p_good = 0.0;
  std::size_t evaluations = 0;
  std::string base_sample_id;
  std::uint64_t model_version = 0;
};

// Exhaustive search for the maximum of p0 (probability of class 0) over the
// grid, in the forest's (standardized) space. Ties go to the smallest
// Euclidean deviation from the base's current covariate values, then to the
// earlier grid point.
OptimizationResult optimize(const Forest &forest, const FeatureVector &base,
                            const CovariateGrid &grid);

struct Correction {
  std::string variable;
  double current = 0.0;
  double suggested = 0.0;
  double delta = 0.0;
};

// Per-covariate deltas in sensor units, largest |delta| first. `base` is the
// standardized vector the result was computed against.
std::vector<Correction> suggest_correction(const OptimizationResult &result,
                                           const FeatureVector &base, const CovariateGrid &grid,
                                           const Scaler &scaler,
                                           std::span<const std::string> slot_names);

// Bounds = min/max of each phase-5 slot over the (standardized) samples, with
// `points` per dim.
CovariateGrid default_grid(std::span<const LabeledSample> standardized,
                           std::span<const std::size_t> dynamic_slots, std::size_t points = 7);

}  // namespace edgecl
