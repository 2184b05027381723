#include "edgecl/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "edgecl/error.hpp"

namespace edgecl {

void TrainConfig::validate() const {
  if (epochs < 1) fail(Errc::rejected_input, "epochs must be >= 1");
  if (!(learning_rate > 0.0)) fail(Errc::rejected_input, "learning rate must be > 0");
  if (leaf_iterations < 1) fail(Errc::rejected_input, "leaf iterations must be >= 1");
  if (!(rehearsal_ratio >= 0.0)) fail(Errc::rejected_input, "rehearsal ratio must be >= 0");
  if (!(noise_scale >= 0.0)) fail(Errc::rejected_input, "noise scale must be >= 0");
  if (!(leaf_smoothing >= 0.0 && leaf_smoothing <= 1.0)) {
    fail(Errc::rejected_input, "leaf smoothing must be in [0, 1]");
  }
  if (batch_size == 0) fail(Errc::rejected_input, "batch size must be >= 1");
}

TrainResult train_incremental(const Forest &forest, PrototypeMemory &memory,
                              std::span<const LabeledSample> new_samples,
                              const TrainConfig &cfg) {
  cfg.validate();
  if (memory.dim() != forest.dim) fail(Errc::rejected_input, "memory/forest dimension mismatch");
  for (const auto &s : new_samples) check_vector(s.features.view(), forest.dim);
  for (const auto &s : cfg.holdout) check_vector(s.features.view(), forest.dim);

  TrainResult result;
  result.forest = forest;
  if (new_samples.empty()) {
    if (!cfg.allow_empty) fail(Errc::empty_input, "no new samples to train on");
    if (!cfg.holdout.empty()) result.metrics = evaluate(forest, cfg.holdout);
    return result;
  }

  std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(forest.version)};
  std::mt19937_64 rng(seq);

  const auto n_synthetic = static_cast<std::size_t>(
      std::ceil(cfg.rehearsal_ratio * static_cast<double>(new_samples.size())));
  if (n_synthetic > 0 && memory.empty()) {
    fail(Errc::rehearsal_unavailable,
         "rehearsal requested but the prototype memory is empty (use rehearsal_ratio = 0)");
  }

  std::vector<LabeledSample> train(new_samples.begin(), new_samples.end());
  auto synthetic = generate_synthetic(memory, n_synthetic, cfg.noise_scale, rng);
  result.synthetic_count = synthetic.size();
  std::move(synthetic.begin(), synthetic.end(), std::back_inserter(train));

  Forest &f = result.forest;
  if (cfg.leaf_smoothing > 0.0) {
    for (auto &tree : f.trees) {
      for (auto &leaf : tree.leaves) {
        const double p1 = (1.0 - cfg.leaf_smoothing) * leaf[1] + 0.5 * cfg.leaf_smoothing;
        leaf = {1.0 - p1, p1};
      }
    }
  }
  std::vector<std::size_t> order(train.size());
  std::vector<LabeledSample> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train[order[k]]);
      grad_step(f, batch, cfg.learning_rate);
    }
    update_leaves(f, train, cfg.leaf_iterations);
    result.epoch_nll.push_back(mean_nll(f, train));
  }

  for (const auto &s : new_samples) memory.learn(s);

  f.version = forest.version + 1;
  result.trained = true;
  result.metrics = cfg.holdout.empty() ? evaluate(f, new_samples) : evaluate(f, cfg.holdout);
  return result;
}

Scaler Scaler::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

Scaler Scaler::fit(std::span<const LabeledSample> samples) {
  if (samples.empty()) fail(Errc::empty_input, "cannot fit a scaler on zero samples");
  const std::size_t dim = samples.front().features.dim();
  RunningStats stats(dim);
  for (const auto &s : samples) {
    check_vector(s.features.view(), dim);
    stats.push(s.features.view());
  }
  Scaler sc{stats.mean(), std::vector<double>(dim, 1.0)};
  for (std::size_t j = 0; j < dim; ++j) {
    const double sd = stats.stddev(j);
    if (sd > 0.0) sc.scale[j] = sd;
  }
  return sc;
}

std::vector<double> Scaler::transform(std::span<const double> raw) const {
  check_vector(raw, dim());
  std::vector<double> z(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) z[j] = to_z(j, raw[j]);
  return z;
}

ClassProbs Model::predict_proba(std::span<const double> raw) const {
  return edgecl::predict_proba(forest, scaler.transform(raw));
}

std::vector<LabeledSample> standardize(const Scaler &scaler, std::span<const LabeledSample> raw) {
  std::vector<LabeledSample> out(raw.begin(), raw.end());
  for (auto &s : out) s.features.values = scaler.transform(s.features.values);
  return out;
}

ModelUpdate initial_train(std::vector<std::string> slots, std::span<const LabeledSample> raw,
                          TrainConfig cfg, ForestShape shape, IlvqParams ilvq) {
  if (raw.empty()) fail(Errc::empty_input, "initial training needs at least one sample");
  const std::size_t dim = raw.front().features.dim();
  if (slots.size() != dim) fail(Errc::rejected_input, "slot names do not match feature dimension");

  Model model;
  model.slots = std::move(slots);
  model.scaler = Scaler::fit(raw);
  model.forest = make_forest(dim, shape, cfg.seed);
  model.memory = PrototypeMemory(dim, ilvq);

  cfg.rehearsal_ratio = 0.0;
  cfg.holdout = standardize(model.scaler, cfg.holdout);
  const auto z = standardize(model.scaler, raw);
  auto result = train_incremental(model.forest, model.memory, z, cfg);
  model.forest = result.forest;
  return {std::move(model), std::move(result)};
}

ModelUpdate retrain(const Model &model, std::span<const LabeledSample> raw, TrainConfig cfg) {
  Model next = model;
  cfg.holdout = standardize(model.scaler, cfg.holdout);
  const auto z = standardize(model.scaler, raw);
  auto result = train_incremental(model.forest, next.memory, z, cfg);
  next.forest = result.forest;
  return {std::move(next), std::move(result)};
}

}  // namespace edgecl
