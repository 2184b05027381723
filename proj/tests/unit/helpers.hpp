#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "edgecl/feature.hpp"
#include "edgecl/plant_sim.hpp"
#include "edgecl/soft_forest.hpp"
#include "edgecl/training.hpp"

namespace testing {

inline std::vector<double> random_vector(std::mt19937_64 &rng, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(dim);
  for (auto &x : v) x = n(rng);
  return v;
}

inline std::vector<edgecl::LabeledSample> random_batch(std::mt19937_64 &rng, std::size_t n,
                                                       std::size_t dim) {
  std::vector<edgecl::LabeledSample> out(n);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].features.values = random_vector(rng, dim);
    out[i].features.sample_id = "s" + std::to_string(i);
    out[i].label = coin(rng) ? edgecl::kDefective : edgecl::kGood;
  }
  return out;
}

// Forest with random routing and random (valid) leaves.
inline edgecl::Forest random_forest(std::mt19937_64 &rng, std::size_t dim, std::size_t trees,
                                    int depth) {
  edgecl::Forest f = edgecl::make_forest(dim, {trees, depth}, rng());
  std::normal_distribution<double> n(0.0, 0.7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (auto &t : f.trees) {
    for (auto &w : t.weights) w = n(rng);
    for (auto &b : t.biases) b = n(rng);
    for (auto &l : t.leaves) {
      l[1] = u(rng);
      l[0] = 1.0 - l[1];
    }
  }
  return f;
}

// Version-1 model trained on the default simulator.
inline edgecl::ModelUpdate sim_model(std::size_t samples = 120, std::uint64_t seed = 7,
                                     int epochs = 20) {
  auto cfg = edgecl::PlantConfig::default_config();
  cfg.seed = seed;
  edgecl::PlantSimulator sim(cfg);
  edgecl::TrainConfig tc;
  tc.epochs = epochs;
  return edgecl::initial_train(cfg.manifest.names(), edgecl::sample_labeled(sim, samples), tc);
}

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("edgecl-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
