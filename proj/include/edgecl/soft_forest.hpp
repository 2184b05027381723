#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "edgecl/feature.hpp"

namespace edgecl {

using ClassProbs = std::array<double, 2>;

// Complete binary tree in heap order: internal node i routes left with
// probability sigmoid(w_i . x + b_i); children are 2i+1 (left) and 2i+2.
struct SoftTree {
  int depth = 0;
  std::vector<double> weights;  // internal_count() x dim, row-major
  std::vector<double> biases;   // internal_count()
  std::vector<ClassProbs> leaves;

  std::size_t internal_count() const { return biases.size(); }
  std::size_t leaf_count() const { return leaves.size(); }
};

struct ForestShape {
  std::size_t trees = 5;
  int depth = 4;
};

struct Forest {
  std::size_t dim = 0;
  std::vector<SoftTree> trees;
  std::uint64_t version = 0;
  std::uint64_t seed = 0;
};

// Routing weights ~ N(0, (init_scale / sqrt(dim))^2), biases 0, leaves uniform.
Forest make_forest(std::size_t dim, ForestShape shape, std::uint64_t seed,
                   double init_scale = 0.1);

// A tree with every parameter zeroed and uniform leaves.
SoftTree make_tree(std::size_t dim, int depth);

// Mean over trees of sum_l mu_l(x) * pi_l.
ClassProbs predict_proba(const Forest &forest, std::span<const double> x);

// Leaf reach probabilities mu_l(x) for one tree.
std::vector<double> leaf_routing(const SoftTree &tree, std::span<const double> x);

// Mean negative log-likelihood of the forest over the batch.
double mean_nll(const Forest &forest, std::span<const LabeledSample> batch);

struct RoutingGradient {
  std::vector<std::vector<double>> weights;  // per tree, same layout as SoftTree::weights
  std::vector<std::vector<double>> biases;
  double nll = 0.0;
};

// Analytic gradient of mean_nll with respect to every routing parameter.
RoutingGradient routing_gradient(const Forest &forest, std::span<const LabeledSample> batch);

// One full-batch gradient step on the routing parameters. Returns the mean
// NLL before the step. Leaf distributions are untouched.
double grad_step(Forest &forest, std::span<const LabeledSample> batch, double learning_rate);

// `iterations` rounds of the EM fixed-point update of every leaf distribution
// under fixed routing.
void update_leaves(Forest &forest, std::span<const LabeledSample> batch, int iterations);

}  // namespace edgecl
