#include <doctest.h>

#include <fstream>

#include "edgecl/config.hpp"
#include "edgecl/error.hpp"
#include "helpers.hpp"

using namespace edgecl;

namespace {

bool invalid(const char *text) {
  try {
    PipelineConfig::from_text(text, "/base");
  } catch (const Error &e) {
    return e.code() == Errc::invalid_spec;
  }
  return false;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("document parser") {
    const auto doc = KeyValueDoc::parse(
        "# top\nname = \"a \\\"q\\\" b\" # trailing\n[s]\nx = 1.5\nn = -3\nflag = true\n");
    CHECK(doc.string("name") == "a \"q\" b");
    CHECK(doc.real("s.x") == 1.5);
    CHECK(doc.integer("s.n") == -3);
    CHECK(doc.boolean("s.flag") == true);
    CHECK_FALSE(doc.has("s.missing"));
    CHECK(doc.unused().empty());
    CHECK_THROWS_AS(KeyValueDoc::parse("[s\nx = 1\n"), Error);
    CHECK_THROWS_AS(KeyValueDoc::parse("x 1\n"), Error);
    CHECK_THROWS_AS(KeyValueDoc::parse("x = 1\nx = 2\n"), Error);
    CHECK_THROWS_AS(KeyValueDoc::parse("x = \"open\n"), Error);
    const auto typed = KeyValueDoc::parse("x = \"str\"\ny = 1.5\n");
    CHECK_THROWS_AS(typed.real("x"), Error);
    CHECK_THROWS_AS(typed.integer("y"), Error);
  }

  TEST_CASE("defaults") {
    const auto c = PipelineConfig::from_text("", "");
    CHECK(c.registry_root == "registry");
    CHECK(c.listen == "127.0.0.1:8080");
    CHECK(c.alarm.threshold == 0.5);
    CHECK(c.alarm.min_count == 10);
    CHECK(c.retrain_batch == 20);
    CHECK(c.ring_size == 10000);
    CHECK(c.grid_points == 7);
    CHECK(c.manifest().dim() == 14);
    CHECK(c.prediction_log() == "logs/predictions.jsonl");
    CHECK(c.alarm_log() == "logs/alarms.log");
  }

  TEST_CASE("full document with relative paths") {
    const auto c = PipelineConfig::from_text(R"(
[registry]
root = "reg"
[service]
listen = "0.0.0.0:9000"
log_dir = "/var/log/edge"
alarm_threshold = 0.6
min_count = 12
retrain_batch = 30
ring_size = 500
[ingest]
source = "file:stream.txt"
[train]
epochs = 50
learning_rate = 1.5
seed = 3
trees = 4
depth = 2
[optimizer]
points = 5
[simulate]
labels = "out/labels.csv"
speedup = 1000
seed = 8
)",
                                             "/base");
    CHECK(c.registry_root == "/base/reg");
    CHECK(c.listen == "0.0.0.0:9000");
    CHECK(c.log_dir == "/var/log/edge");
    CHECK(c.alarm.threshold == 0.6);
    CHECK(c.alarm.min_count == 12);
    CHECK(c.retrain_batch == 30);
    CHECK(c.ring_size == 500);
    CHECK(c.ingest_source == "file:/base/stream.txt");
    CHECK(c.train.epochs == 50);
    CHECK(c.train.learning_rate == 1.5);
    CHECK(c.train.seed == 3);
    CHECK(c.shape.trees == 4);
    CHECK(c.shape.depth == 2);
    CHECK(c.grid_points == 5);
    CHECK(c.labels_path == "/base/out/labels.csv");
    CHECK(c.speedup == 1000.0);
    CHECK(c.sim_seed == 8);
  }

  TEST_CASE("invalid documents") {
    CHECK(invalid("[service]\nunknown_key = 1\n"));
    CHECK(invalid("[service]\nalarm_threshold = 0\n"));
    CHECK(invalid("[service]\nmin_count = 0\n"));
    CHECK(invalid("[service]\nlisten = \"nohost\"\n"));
    CHECK(invalid("[service]\nlisten = \"h:99999\"\n"));
    CHECK(invalid("[service]\nretrain_batch = 0\n"));
    CHECK(invalid("[ingest]\nsource = \"udp://x:1\"\n"));
    CHECK(invalid("[train]\nepochs = 0\n"));
    CHECK(invalid("[train]\nseed = -1\n"));
    CHECK(invalid("[simulate]\nspeedup = 0\n"));
  }

  TEST_CASE("load from file and manifest path") {
    testing::TempDir dir;
    {
      std::ofstream f(dir.path() / "edge.toml");
      f << "[ingest]\nmanifest = \"m.txt\"\n";
      std::ofstream m(dir.path() / "m.txt");
      m << "p1_pH\np5_viscosity\n";
    }
    const auto c = PipelineConfig::load(dir.path() / "edge.toml");
    CHECK(c.manifest().dim() == 2);
    CHECK_THROWS_AS(PipelineConfig::load(dir.path() / "missing.toml"), Error);
  }

  TEST_CASE("endpoints") {
    const auto e = parse_endpoint("127.0.0.1:8080");
    CHECK(e.host == "127.0.0.1");
    CHECK(e.port == 8080);
    CHECK(parse_endpoint("localhost:0").port == 0);
    CHECK_THROWS_AS(parse_endpoint(":80"), Error);
    CHECK_THROWS_AS(parse_endpoint("h:x"), Error);
  }
}
