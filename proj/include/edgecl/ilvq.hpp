#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "edgecl/feature.hpp"

namespace edgecl {

// Welford accumulator, one slot per feature.
class RunningStats {
 public:
  RunningStats() = default;
  explicit RunningStats(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}
  RunningStats(std::uint64_t count, std::vector<double> mean, std::vector<double> m2);

  void push(std::span<const double> x);

  std::uint64_t count() const { return count_; }
  std::size_t dim() const { return mean_.size(); }
  const std::vector<double> &mean() const { return mean_; }
  const std::vector<double> &m2() const { return m2_; }
  // Population variance; zero until two observations exist.
  double variance(std::size_t j) const;
  double stddev(std::size_t j) const;

 private:
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct Prototype {
  std::vector<double> w;
  int label = kGood;
  std::uint64_t wins = 1;
  std::uint64_t created_at = 0;
};

struct IlvqParams {
  std::size_t capacity = 200;
  // Insertion threshold multiplier on the mean nearest-neighbour distance.
  double kappa = 1.5;
};

struct Neighbor {
  std::size_t index;
  double distance;
};

class PrototypeMemory {
 public:
  PrototypeMemory() = default;
  explicit PrototypeMemory(std::size_t dim, IlvqParams params = {});

  // Rebuilds a memory from persisted state. Validates every invariant.
  static PrototypeMemory restore(std::size_t dim, IlvqParams params,
                                 std::vector<Prototype> prototypes, RunningStats stats,
                                 std::uint64_t step);

  // One ILVQ step: update running stats, then either insert a prototype at x
  // or pull the winner (and the runner-up of the same class) towards x.
  void learn(std::span<const double> x, int label);
  void learn(const LabeledSample &sample) { learn(sample.features.view(), sample.label); }

  // k nearest prototypes, ascending distance, ties to the older prototype.
  std::vector<Neighbor> nearest(std::span<const double> x, std::size_t k) const;

  // Drops the lowest-win prototypes until the capacity holds, never removing
  // the last prototype of a class.
  void prune();

  // kappa * mean nearest-neighbour distance; +inf with fewer than two prototypes.
  double insertion_threshold() const;

  std::size_t dim() const { return dim_; }
  bool empty() const { return prototypes_.empty(); }
  std::size_t size() const { return prototypes_.size(); }
  const std::vector<Prototype> &prototypes() const { return prototypes_; }
  const RunningStats &stats() const { return stats_; }
  const IlvqParams &params() const { return params_; }
  std::uint64_t step() const { return step_; }

  // Test hook: place a prototype without running the learning rule.
  void insert(Prototype p);

 private:
  std::size_t dim_ = 0;
  IlvqParams params_;
  std::vector<Prototype> prototypes_;
  RunningStats stats_;
  std::uint64_t step_ = 0;
};

// Pseudo-rehearsal draw: pick a prototype with probability proportional to its
// win count, then add N(0, (noise_scale * running_std_j)^2) per feature.
std::vector<LabeledSample> generate_synthetic(const PrototypeMemory &memory, std::size_t n,
                                              double noise_scale, std::mt19937_64 &rng);

}  // namespace edgecl
