#include <doctest.h>

#include <cstdlib>

#include "edgecl/error.hpp"
#include "edgecl/model_io.hpp"
#include "edgecl/plant_sim.hpp"
#include "edgecl/training.hpp"
#include "helpers.hpp"

using namespace edgecl;

namespace {

Model trained_model() {
  PlantConfig cfg = PlantConfig::default_config();
  PlantSimulator sim(cfg);
  TrainConfig tc;
  tc.epochs = 10;
  return initial_train(cfg.manifest.names(), sample_labeled(sim, 50), tc).model;
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("header and sections") {
    const std::string text = serialize_model(trained_model());
    CHECK(text.rfind("TRIL3-MODEL 1\n", 0) == 0);
    for (const char *section : {"[meta]", "[scaler]", "[tree 0]", "[tree 4]", "[ilvq]"}) {
      CHECK(text.find(section) != std::string::npos);
    }
    CHECK(model_version_of(text) == 1);
  }

  TEST_CASE("round trip is bit-identical and predicts identically") {
    const Model m = trained_model();
    const std::string text = serialize_model(m);
    const Model back = deserialize_model(text);
    CHECK(serialize_model(back) == text);
    std::mt19937_64 rng(3);
    PlantSimulator sim(PlantConfig::default_config());
    for (const auto &s : sample_labeled(sim, 100)) {
      const auto a = m.predict_proba(s.features.view());
      const auto b = back.predict_proba(s.features.view());
      REQUIRE(a[0] == b[0]);
      REQUIRE(a[1] == b[1]);
    }
  }

  TEST_CASE("reals survive exactly") {
    for (double v : {0.1, -1e-300, 1.0 / 3.0, 6.02214076e23, 5e-324}) {
      CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
    }
  }

  TEST_CASE("corrupt input is rejected") {
    const std::string text = serialize_model(trained_model());
    CHECK_THROWS_AS(deserialize_model("TRIL3-MODEL 2\n"), Error);
    CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), Error);
    CHECK_THROWS_AS(deserialize_model(text + "extra\n"), Error);
    std::string bad = text;
    bad.replace(bad.find("[ilvq]"), 6, "[ilvx]");
    CHECK_THROWS_AS(deserialize_model(bad), Error);
  }
}
