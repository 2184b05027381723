#include <doctest.h>

#include <cmath>

#include "edgecl/error.hpp"
#include "edgecl/model_io.hpp"
#include "edgecl/plant_sim.hpp"
#include "edgecl/training.hpp"
#include "helpers.hpp"

using namespace edgecl;

namespace {

std::vector<LabeledSample> sim_samples(std::size_t n, std::uint64_t seed) {
  PlantConfig cfg = PlantConfig::default_config();
  cfg.seed = seed;
  PlantSimulator sim(cfg);
  return sample_labeled(sim, n);
}

TrainConfig quick(std::uint64_t seed) {
  TrainConfig tc;
  tc.seed = seed;
  tc.epochs = 15;
  return tc;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("config validation") {
    TrainConfig tc;
    CHECK_NOTHROW(tc.validate());
    tc.epochs = 0;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc = {};
    tc.learning_rate = 0.0;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc = {};
    tc.leaf_iterations = 0;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc = {};
    tc.rehearsal_ratio = -0.1;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc = {};
    tc.noise_scale = -1.0;
    CHECK_THROWS_AS(tc.validate(), Error);
  }

  TEST_CASE("initial training on 317 samples yields version 1") {
    const auto raw = sim_samples(317, 7);
    const auto upd = initial_train(FeatureManifest::default_manifest().names(), raw, TrainConfig{});
    CHECK(upd.model.version() == 1);
    CHECK(upd.result.trained);
    CHECK(upd.result.synthetic_count == 0);
    CHECK(upd.result.metrics.total() == 317);
    CHECK(upd.result.metrics.accuracy > 0.85);
    CHECK(upd.model.memory.size() > 0);
    CHECK(upd.result.epoch_nll.size() == 100);
  }

  TEST_CASE("empty update is a no-op without a version bump") {
    const auto raw = sim_samples(60, 3);
    auto upd = initial_train(FeatureManifest::default_manifest().names(), raw, quick(1));
    PrototypeMemory mem = upd.model.memory;
    TrainConfig tc = quick(2);
    tc.rehearsal_ratio = 0.0;
    const auto r = train_incremental(upd.model.forest, mem, {}, tc);
    CHECK_FALSE(r.trained);
    CHECK(r.forest.version == upd.model.forest.version);
    CHECK(serialize_model({upd.model.slots, upd.model.scaler, r.forest, mem}) ==
          serialize_model(upd.model));
    tc.allow_empty = false;
    CHECK_THROWS_AS(train_incremental(upd.model.forest, mem, {}, tc), Error);
  }

  TEST_CASE("rehearsal needs a non-empty memory") {
    std::mt19937_64 rng(1);
    const Forest f = make_forest(3, {2, 2}, 1);
    PrototypeMemory empty(3);
    const auto batch = testing::random_batch(rng, 10, 3);
    try {
      train_incremental(f, empty, batch, quick(0));
      FAIL("no throw");
    } catch (const Error &e) {
      CHECK(e.code() == Errc::rehearsal_unavailable);
    }
    TrainConfig tc = quick(0);
    tc.rehearsal_ratio = 0.0;
    const auto r = train_incremental(f, empty, batch, tc);
    CHECK(r.forest.version == f.version + 1);
    CHECK(empty.size() > 0);
  }

  TEST_CASE("synthetic count is ceil(rho * n)") {
    const auto raw = sim_samples(40, 5);
    auto upd = initial_train(FeatureManifest::default_manifest().names(), raw, quick(1));
    const auto more = standardize(upd.model.scaler, sim_samples(7, 6));
    PrototypeMemory mem = upd.model.memory;
    TrainConfig tc = quick(3);
    tc.rehearsal_ratio = 0.5;
    CHECK(train_incremental(upd.model.forest, mem, more, tc).synthetic_count == 4);
  }

  TEST_CASE("dimension mismatch is rejected") {
    std::mt19937_64 rng(1);
    const Forest f = make_forest(3, {2, 2}, 1);
    PrototypeMemory mem(3);
    TrainConfig tc = quick(0);
    tc.rehearsal_ratio = 0.0;
    try {
      train_incremental(f, mem, testing::random_batch(rng, 4, 2), tc);
      FAIL("no throw");
    } catch (const Error &e) {
      CHECK(e.code() == Errc::rejected_input);
    }
  }

  TEST_CASE("determinism: same seed, bit-identical model") {
    const auto raw = sim_samples(80, 9);
    const auto names = FeatureManifest::default_manifest().names();
    const auto a = initial_train(names, raw, quick(4));
    const auto b = initial_train(names, raw, quick(4));
    CHECK(serialize_model(a.model) == serialize_model(b.model));
    const auto c = initial_train(names, raw, quick(5));
    CHECK(serialize_model(a.model) != serialize_model(c.model));
    const auto more = sim_samples(20, 10);
    CHECK(serialize_model(retrain(a.model, more, quick(6)).model) ==
          serialize_model(retrain(b.model, more, quick(6)).model));
  }

  TEST_CASE("retrain bumps the version and keeps the scaler") {
    const auto names = FeatureManifest::default_manifest().names();
    const auto v1 = initial_train(names, sim_samples(60, 1), quick(1));
    const auto v2 = retrain(v1.model, sim_samples(20, 2), quick(2));
    CHECK(v2.model.version() == 2);
    CHECK(v2.model.scaler.mean == v1.model.scaler.mean);
    CHECK(v2.model.scaler.scale == v1.model.scaler.scale);
    CHECK(v2.result.synthetic_count == 20);
  }

  TEST_CASE("scaler") {
    std::vector<LabeledSample> s{{FeatureVector{{1.0, 5.0}}, 0}, {FeatureVector{{3.0, 5.0}}, 1}};
    const Scaler sc = Scaler::fit(s);
    CHECK(sc.mean == std::vector<double>{2.0, 5.0});
    CHECK(sc.scale[0] == doctest::Approx(1.0));
    CHECK(sc.scale[1] == 1.0);  // constant column
    const auto z = sc.transform(std::vector<double>{3.0, 7.0});
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(2.0));
    CHECK(sc.to_raw(0, z[0]) == doctest::Approx(3.0));
  }
}
