#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "edgecl/error.hpp"
#include "edgecl/registry.hpp"
#include "edgecl/service.hpp"
#include "helpers.hpp"

using namespace edgecl;

namespace {

Errc code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::environment;
}

// Raw features for prediction: one simulated batch's assembled vectors.
std::vector<FeatureVector> batch_vectors(std::uint64_t seed, int batches = 1) {
  auto cfg = PlantConfig::default_config();
  cfg.seed = seed;
  PlantSimulator sim(cfg);
  std::vector<FeatureVector> out;
  for (int i = 0; i < batches; ++i) {
    for (auto &v : assemble_batch(sim.next_batch(), cfg.manifest)) out.push_back(std::move(v));
  }
  return out;
}

Model uniform_model(std::size_t dim, std::uint64_t version) {
  Model m;
  m.scaler = Scaler::identity(dim);
  m.forest = make_forest(dim, {3, 2}, 1);
  m.forest.version = version;
  m.memory = PrototypeMemory(dim);
  for (std::size_t i = 0; i < dim; ++i) m.slots.push_back("s" + std::to_string(i));
  return m;
}

ServiceConfig quick_config(std::size_t r = 5) {
  ServiceConfig cfg;
  cfg.retrain_batch = r;
  cfg.train.epochs = 10;
  return cfg;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("no model: service unavailable") {
    PredictService svc(quick_config(), nullptr);
    CHECK_FALSE(svc.handle());
    FeatureVector x;
    x.values.assign(14, 0.0);
    CHECK(code_of([&] { svc.predict(x); }) == Errc::service_unavailable);
    CHECK(svc.alarm_status().empty());
  }

  TEST_CASE("uniform model predicts 0.5 and class 0") {
    PredictService svc(quick_config(), nullptr);
    svc.swap_model(uniform_model(4, 1));
    FeatureVector x;
    x.values = {1, 2, 3, 4};
    x.sample_id = "s1";
    x.batch_id = "B";
    const auto r = svc.predict(x);
    CHECK(r.record.p_defect == doctest::Approx(0.5));
    CHECK(r.record.predicted_class == kGood);
    CHECK(r.record.model_version == 1);
    CHECK(r.record.seq == 1);
    CHECK_FALSE(r.alarm_latched);
  }

  TEST_CASE("mismatched vector is rejected and nothing is stored") {
    PredictService svc(quick_config(), nullptr);
    svc.swap_model(uniform_model(4, 1));
    FeatureVector x;
    x.values = {1, 2, 3};
    x.sample_id = "bad";
    CHECK(code_of([&] { svc.predict(x); }) == Errc::rejected_input);
    CHECK_FALSE(svc.find_prediction("bad"));
    CHECK(svc.stream(0, 10, std::chrono::milliseconds(0)).empty());
    x.values = {1, 2, 3, std::nan("")};
    CHECK(code_of([&] { svc.predict(x); }) == Errc::rejected_input);
  }

  TEST_CASE("swap and stale versions") {
    PredictService svc(quick_config(), nullptr);
    CHECK(svc.swap_model(uniform_model(4, 1)) == 1);
    CHECK(svc.swap_model(uniform_model(4, 2)) == 2);
    CHECK(svc.handle()->version == 2);
    CHECK(code_of([&] { svc.swap_model(uniform_model(4, 1)); }) == Errc::stale_model);
    CHECK(code_of([&] { svc.swap_model(uniform_model(4, 2)); }) == Errc::stale_model);
    CHECK(svc.handle()->version == 2);
  }

  TEST_CASE("concurrent predictions across a swap see one whole model") {
    const auto v1 = testing::sim_model(80, 3, 10).model;
    auto v2 = testing::sim_model(80, 4, 10).model;
    v2.forest.version = 2;
    const auto xs = batch_vectors(21, 2);
    PredictService svc(quick_config(), nullptr);
    svc.swap_model(v1);

    std::atomic<int> failures{0}, mixed{0}, regress{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> ts;
    for (int t = 0; t < 8; ++t) {
      ts.emplace_back([&, t] {
        while (!go) std::this_thread::yield();
        std::uint64_t last = 0;
        for (int i = 0; i < 125; ++i) {
          FeatureVector x = xs[static_cast<std::size_t>(t * 125 + i) % xs.size()];
          x.sample_id = "t" + std::to_string(t) + "-" + std::to_string(i);
          try {
            const auto r = svc.predict(x).record;
            const Model &m = r.model_version == 1 ? v1 : v2;
            if (r.model_version != 1 && r.model_version != 2) ++mixed;
            else if (r.p_defect != m.predict_proba(x.view())[kDefective]) ++mixed;
            if (r.model_version < last) ++regress;
            last = r.model_version;
          } catch (...) {
            ++failures;
          }
        }
      });
    }
    go = true;
    std::this_thread::sleep_for(std::chrono::microseconds(300));
    svc.swap_model(v2);
    for (auto &t : ts) t.join();
    CHECK(failures == 0);
    CHECK(mixed == 0);
    CHECK(regress == 0);
    CHECK(svc.stream(0, 2000, std::chrono::milliseconds(0)).size() == 1000);
  }

  TEST_CASE("labels: queued, triggered, not found, conflict") {
    testing::TempDir dir;
    Registry reg(dir.path() / "reg");
    PredictService svc(quick_config(5), &reg);
    svc.swap_model(testing::sim_model(80, 3, 10).model);
    const auto xs = batch_vectors(5);
    for (std::size_t i = 0; i < 10; ++i) svc.predict(xs[i]);

    const auto first = svc.submit_label(xs[0].sample_id, kDefective, "op");
    CHECK_FALSE(first.triggered);
    CHECK(first.buffer_size == 1);
    CHECK(code_of([&] { svc.submit_label(xs[0].sample_id, kGood); }) == Errc::conflict);
    CHECK(code_of([&] { svc.submit_label("missing", kGood); }) == Errc::not_found);
    CHECK(code_of([&] { svc.submit_label(xs[1].sample_id, 2); }) == Errc::rejected_input);
    for (std::size_t i = 1; i < 4; ++i) CHECK(svc.submit_label(xs[i].sample_id, kGood).buffer_size == i + 1);
    const auto fifth = svc.submit_label(xs[4].sample_id, kDefective);
    CHECK(fifth.triggered);
    CHECK(fifth.run_id > 0);
    svc.wait_for_idle();
    CHECK(svc.label_buffer_size() == 0);
    CHECK(svc.handle()->version == 2);

    const auto hist = svc.retrain_history();
    REQUIRE(hist.size() == 1);
    CHECK(hist[0].ok);
    CHECK(hist[0].run_id == fifth.run_id);
    CHECK(hist[0].samples == 5);
    const auto run = reg.run(fifth.run_id);
    REQUIRE(run);
    CHECK(run->status == RunStatus::finished);
    CHECK(run->params.at("samples") == "5");
    CHECK(reg.latest_model().first.version() == 2);
    const auto ms = reg.metrics(fifth.run_id);
    const auto has = [&](const std::string &name) {
      return std::any_of(ms.begin(), ms.end(), [&](const auto &m) { return m.name == name; });
    };
    CHECK(has("accuracy"));
    CHECK(has("precision"));
    CHECK(has("recall"));
    CHECK(has("f1"));
    CHECK(has("nll"));

    // Predictions after the swap report the new version.
    CHECK(svc.predict(xs[20]).record.model_version == 2);
  }

  TEST_CASE("every accepted label lands in exactly one retrain") {
    PredictService svc(quick_config(3), nullptr);
    svc.swap_model(testing::sim_model(60, 3, 5).model);
    const auto xs = batch_vectors(6);
    for (std::size_t i = 0; i < 40; ++i) svc.predict(xs[i]);
    std::size_t accepted = 0;
    std::vector<std::thread> ts;
    std::atomic<std::size_t> acc{0};
    for (int t = 0; t < 4; ++t) {
      ts.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < 40; i += 4) {
          svc.submit_label(xs[i].sample_id, static_cast<int>(i % 2));
          ++acc;
        }
      });
    }
    for (auto &t : ts) t.join();
    accepted = acc;
    svc.wait_for_idle();
    std::size_t used = 0;
    for (const auto &o : svc.retrain_history()) {
      CHECK(o.ok);
      CHECK(o.samples == 3);
      used += o.samples;
    }
    CHECK(used + svc.label_buffer_size() == accepted);
    CHECK(svc.label_buffer_size() == 1);
    CHECK(svc.handle()->version == 1 + 13);
  }

  TEST_CASE("failed retrain marks the run failed and keeps the model") {
    testing::TempDir dir;
    Registry reg(dir.path() / "reg");
    auto cfg = quick_config(2);
    PredictService svc(cfg, &reg);
    // Empty prototype memory with rehearsal on: the update must fail.
    auto m = uniform_model(14, 1);
    svc.swap_model(m);
    const auto xs = batch_vectors(8);
    svc.predict(xs[0]);
    svc.predict(xs[1]);
    svc.submit_label(xs[0].sample_id, kGood);
    const auto st = svc.submit_label(xs[1].sample_id, kDefective);
    REQUIRE(st.triggered);
    svc.wait_for_idle();
    const auto hist = svc.retrain_history();
    REQUIRE(hist.size() == 1);
    CHECK_FALSE(hist[0].ok);
    CHECK_FALSE(hist[0].error.empty());
    CHECK(reg.run(st.run_id)->status == RunStatus::failed);
    CHECK(svc.handle()->version == 1);
  }

  TEST_CASE("alarm lifecycle and logs") {
    testing::TempDir dir;
    auto cfg = quick_config();
    cfg.alarm = {0.5, 3};
    cfg.prediction_log = dir.path() / "predictions.jsonl";
    cfg.alarm_log = dir.path() / "alarms.log";
    cfg.decision_threshold = 0.0;  // every prediction counts as defective
    {
      PredictService svc(cfg, nullptr);
      svc.swap_model(uniform_model(2, 1));
      FeatureVector x;
      x.values = {0, 0};
      x.batch_id = "B1";
      bool latched = false;
      for (int i = 0; i < 3; ++i) {
        x.sample_id = "s" + std::to_string(i);
        latched = svc.predict(x).alarm_latched;
      }
      CHECK(latched);
      const auto status = svc.alarm_status();
      REQUIRE(status.size() == 1);
      CHECK(status[0].latched);
      CHECK(svc.acknowledge_alarm("B1", "op").acknowledged);
      CHECK(svc.acknowledge_alarm("B1", "op").acknowledged);
      CHECK(code_of([&] { svc.acknowledge_alarm("B2", "op"); }) == Errc::precondition);
      const auto closed = svc.end_batch("B1");
      CHECK(closed.closed);
      CHECK(svc.alarm_status().front().closed);
    }
    std::ifstream preds(cfg.prediction_log);
    std::string line;
    int n = 0;
    while (std::getline(preds, line)) ++n;
    CHECK(n == 3);
    std::ifstream alarms(cfg.alarm_log);
    std::vector<std::string> lines;
    while (std::getline(alarms, line)) lines.push_back(line);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].find("\"fired\"") != std::string::npos);
    CHECK(lines[1].find("\"closed\"") != std::string::npos);
  }

  TEST_CASE("stream cursor") {
    auto cfg = quick_config();
    cfg.ring_size = 5;
    PredictService svc(cfg, nullptr);
    svc.swap_model(uniform_model(2, 1));
    FeatureVector x;
    x.values = {0, 0};
    x.batch_id = "B";
    for (int i = 0; i < 8; ++i) {
      x.sample_id = "s" + std::to_string(i);
      svc.predict(x);
    }
    const auto all = svc.stream(0, 100, std::chrono::milliseconds(0));
    REQUIRE(all.size() == 5);  // ring keeps the newest five
    CHECK(all.front().seq == 4);
    CHECK(all.back().seq == 8);
    CHECK(svc.stream(6, 100, std::chrono::milliseconds(0)).size() == 2);
    CHECK(svc.stream(6, 1, std::chrono::milliseconds(0)).front().seq == 7);
    CHECK_FALSE(svc.find_prediction("s0"));
    CHECK(svc.find_prediction("s7"));

    std::thread late([&] {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      x.sample_id = "late";
      svc.predict(x);
    });
    const auto t0 = std::chrono::steady_clock::now();
    const auto got = svc.stream(8, 10, std::chrono::seconds(5));
    late.join();
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(4));
    REQUIRE(got.size() == 1);
    CHECK(got[0].sample_id == "late");
  }

  TEST_CASE("optimize through the service") {
    PredictService svc(quick_config(), nullptr);
    const auto upd = testing::sim_model(80, 3, 10);
    const auto xs = batch_vectors(9);
    CHECK(code_of([&] { svc.optimize(xs[0]); }) == Errc::service_unavailable);
    svc.swap_model(upd.model);
    CHECK(code_of([&] { svc.optimize(xs[0]); }) == Errc::precondition);
    const auto dyn = FeatureManifest::default_manifest().dynamic_indices();
    CovariateGrid g;
    for (std::size_t k = 0; k < 5; ++k) g.dims[k] = {dyn[k], -1.0, 1.0, 3};
    svc.set_grid(g);
    const auto out = svc.optimize(xs[0]);
    CHECK(out.result.evaluations == 243);
    CHECK(out.result.p_good >= out.p_good_current - 1e-12);
    CHECK(out.corrections.size() == 5);
    CHECK(out.best_raw.size() == 5);
    CHECK(out.result.model_version == 1);
  }
}
