#include "edgecl/soft_forest.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "edgecl/error.hpp"

namespace edgecl {

namespace {

// Probabilities below this are clamped before taking logs or dividing.
constexpr double kProbFloor = 1e-300;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t node_count(int depth) { return (std::size_t{1} << depth) - 1; }

// Left-routing probability of every internal node.
void routing_decisions(const SoftTree &tree, std::span<const double> x,
                       std::vector<double> &left) {
  const std::size_t dim = x.size();
  left.resize(tree.internal_count());
  for (std::size_t n = 0; n < tree.internal_count(); ++n) {
    const double *w = tree.weights.data() + n * dim;
    double f = tree.biases[n];
    for (std::size_t j = 0; j < dim; ++j) f += w[j] * x[j];
    left[n] = sigmoid(f);
  }
}

// reach[k] over all 2^(D+1)-1 heap slots.
void reach_probabilities(const SoftTree &tree, const std::vector<double> &left,
                         std::vector<double> &reach) {
  const std::size_t internal = tree.internal_count();
  reach.assign(internal + tree.leaf_count(), 0.0);
  reach[0] = 1.0;
  for (std::size_t n = 0; n < internal; ++n) {
    reach[2 * n + 1] = reach[n] * left[n];
    reach[2 * n + 2] = reach[n] * (1.0 - left[n]);
  }
}

double tree_prob(const SoftTree &tree, const std::vector<double> &reach, int label) {
  const std::size_t offset = tree.internal_count();
  double p = 0.0;
  for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
    p += reach[offset + l] * tree.leaves[l][static_cast<std::size_t>(label)];
  }
  return p;
}

void check_batch(const Forest &forest, std::span<const LabeledSample> batch) {
  if (batch.empty()) fail(Errc::empty_batch, "batch is empty");
  for (const auto &s : batch) {
    check_vector(s.features.view(), forest.dim);
    if (s.label != kGood && s.label != kDefective) fail(Errc::rejected_input, "bad label");
  }
}

}  // namespace

SoftTree make_tree(std::size_t dim, int depth) {
  if (depth < 0 || depth > 20) fail(Errc::rejected_input, "tree depth out of range");
  SoftTree t;
  t.depth = depth;
  const std::size_t internal = node_count(depth);
  t.weights.assign(internal * dim, 0.0);
  t.biases.assign(internal, 0.0);
  t.leaves.assign(std::size_t{1} << depth, ClassProbs{0.5, 0.5});
  return t;
}

Forest make_forest(std::size_t dim, ForestShape shape, std::uint64_t seed, double init_scale) {
  if (dim == 0) fail(Errc::rejected_input, "forest needs dim >= 1");
  if (shape.trees == 0) fail(Errc::rejected_input, "forest needs at least one tree");
  Forest f;
  f.dim = dim;
  f.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init(0.0, init_scale / std::sqrt(static_cast<double>(dim)));
  for (std::size_t t = 0; t < shape.trees; ++t) {
    SoftTree tree = make_tree(dim, shape.depth);
    for (double &w : tree.weights) w = init(rng);
    f.trees.push_back(std::move(tree));
  }
  return f;
}

std::vector<double> leaf_routing(const SoftTree &tree, std::span<const double> x) {
  std::vector<double> left, reach;
  routing_decisions(tree, x, left);
  reach_probabilities(tree, left, reach);
  return {reach.begin() + static_cast<std::ptrdiff_t>(tree.internal_count()), reach.end()};
}

ClassProbs predict_proba(const Forest &forest, std::span<const double> x) {
  check_vector(x, forest.dim);
  std::vector<double> left, reach;
  double p1 = 0.0;
  for (const auto &tree : forest.trees) {
    routing_decisions(tree, x, left);
    reach_probabilities(tree, left, reach);
    p1 += tree_prob(tree, reach, kDefective);
  }
  p1 /= static_cast<double>(forest.trees.size());
  p1 = std::clamp(p1, 0.0, 1.0);
  return {1.0 - p1, p1};
}

double mean_nll(const Forest &forest, std::span<const LabeledSample> batch) {
  check_batch(forest, batch);
  std::vector<double> left, reach;
  double total = 0.0;
  for (const auto &s : batch) {
    double p = 0.0;
    for (const auto &tree : forest.trees) {
      routing_decisions(tree, s.features.values, left);
      reach_probabilities(tree, left, reach);
      p += tree_prob(tree, reach, s.label);
    }
    p /= static_cast<double>(forest.trees.size());
    total -= std::log(std::max(p, kProbFloor));
  }
  return total / static_cast<double>(batch.size());
}

RoutingGradient routing_gradient(const Forest &forest, std::span<const LabeledSample> batch) {
  check_batch(forest, batch);
  const std::size_t dim = forest.dim;
  const std::size_t trees = forest.trees.size();
  const double inv_trees = 1.0 / static_cast<double>(trees);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  RoutingGradient g;
  for (const auto &tree : forest.trees) {
    g.weights.emplace_back(tree.weights.size(), 0.0);
    g.biases.emplace_back(tree.biases.size(), 0.0);
  }

  std::vector<std::vector<double>> left(trees), reach(trees), value(trees);
  for (const auto &s : batch) {
    const auto x = s.features.view();
    const auto y = static_cast<std::size_t>(s.label);
    double p = 0.0;
    for (std::size_t t = 0; t < trees; ++t) {
      const SoftTree &tree = forest.trees[t];
      routing_decisions(tree, x, left[t]);
      reach_probabilities(tree, left[t], reach[t]);
      // value[k]: probability of y conditional on having reached slot k.
      const std::size_t internal = tree.internal_count();
      auto &v = value[t];
      v.resize(internal + tree.leaf_count());
      for (std::size_t l = 0; l < tree.leaf_count(); ++l) v[internal + l] = tree.leaves[l][y];
      for (std::size_t n = internal; n-- > 0;) {
        v[n] = left[t][n] * v[2 * n + 1] + (1.0 - left[t][n]) * v[2 * n + 2];
      }
      p += v[0];
    }
    p *= inv_trees;
    g.nll -= std::log(std::max(p, kProbFloor));
    const double scale = -inv_n * inv_trees / std::max(p, kProbFloor);

    for (std::size_t t = 0; t < trees; ++t) {
      const SoftTree &tree = forest.trees[t];
      for (std::size_t n = 0; n < tree.internal_count(); ++n) {
        const double d = left[t][n];
        const double df =
            scale * reach[t][n] * d * (1.0 - d) * (value[t][2 * n + 1] - value[t][2 * n + 2]);
        if (df == 0.0) continue;
        g.biases[t][n] += df;
        double *gw = g.weights[t].data() + n * dim;
        for (std::size_t j = 0; j < dim; ++j) gw[j] += df * x[j];
      }
    }
  }
  g.nll *= inv_n;
  return g;
}

double grad_step(Forest &forest, std::span<const LabeledSample> batch, double learning_rate) {
  RoutingGradient g = routing_gradient(forest, batch);
  if (learning_rate == 0.0) return g.nll;
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    SoftTree &tree = forest.trees[t];
    for (std::size_t k = 0; k < tree.weights.size(); ++k) {
      tree.weights[k] -= learning_rate * g.weights[t][k];
    }
    for (std::size_t n = 0; n < tree.biases.size(); ++n) {
      tree.biases[n] -= learning_rate * g.biases[t][n];
    }
  }
  return g.nll;
}

void update_leaves(Forest &forest, std::span<const LabeledSample> batch, int iterations) {
  if (iterations < 0) fail(Errc::rejected_input, "leaf iterations must be >= 0");
  check_batch(forest, batch);
  if (iterations == 0) return;

  const std::size_t trees = forest.trees.size();
  // Routing is fixed for the whole update, so leaf reach is computed once.
  std::vector<std::vector<std::vector<double>>> mu(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    mu[i].reserve(trees);
    for (const auto &tree : forest.trees) {
      mu[i].push_back(leaf_routing(tree, batch[i].features.view()));
    }
  }

  std::vector<std::vector<ClassProbs>> mass(trees);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t t = 0; t < trees; ++t) {
      mass[t].assign(forest.trees[t].leaf_count(), ClassProbs{0.0, 0.0});
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto y = static_cast<std::size_t>(batch[i].label);
      double p = 0.0;
      for (std::size_t t = 0; t < trees; ++t) {
        const auto &leaves = forest.trees[t].leaves;
        for (std::size_t l = 0; l < leaves.size(); ++l) p += mu[i][t][l] * leaves[l][y];
      }
      p = std::max(p / static_cast<double>(trees), kProbFloor);
      // Posterior over (tree, leaf); the 1/T mixture weight cancels on normalization.
      for (std::size_t t = 0; t < trees; ++t) {
        const auto &leaves = forest.trees[t].leaves;
        for (std::size_t l = 0; l < leaves.size(); ++l) {
          mass[t][l][y] += mu[i][t][l] * leaves[l][y] / p;
        }
      }
    }
    for (std::size_t t = 0; t < trees; ++t) {
      auto &leaves = forest.trees[t].leaves;
      for (std::size_t l = 0; l < leaves.size(); ++l) {
        const double z = mass[t][l][0] + mass[t][l][1];
        if (!(z > 0.0) || !std::isfinite(z)) continue;
        const double p1 = mass[t][l][1] / z;
        leaves[l] = {1.0 - p1, p1};
      }
    }
  }
}

}  // namespace edgecl
