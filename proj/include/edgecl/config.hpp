#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "edgecl/alarm.hpp"
#include "edgecl/ilvq.hpp"
#include "edgecl/manifest.hpp"
#include "edgecl/soft_forest.hpp"
#include "edgecl/training.hpp"

namespace edgecl {

// Flat view of a TOML-style document: "section.key" -> raw value text.
// Supported: [section] headers, key = value, "strings", numbers, true/false,
// '#' comments. Strings keep escapes \" \\ \n \t only.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text);

  bool has(const std::string &key) const { return values_.count(key) != 0; }
  std::optional<std::string> string(const std::string &key) const;
  std::optional<double> real(const std::string &key) const;
  std::optional<std::int64_t> integer(const std::string &key) const;
  std::optional<bool> boolean(const std::string &key) const;
  // Keys present in the document that were never read.
  std::vector<std::string> unused() const;

 private:
  struct Value {
    std::string text;
    bool quoted = false;
    int line = 0;
  };
  const Value *get(const std::string &key) const;

  std::map<std::string, Value> values_;
  mutable std::map<std::string, bool> used_;
};

struct PipelineConfig {
  std::filesystem::path registry_root = "registry";
  std::string listen = "127.0.0.1:8080";
  // tcp://host:port (serve listens, simulate connects) or file:<path>
  std::string ingest_source = "tcp://127.0.0.1:9100";
  std::filesystem::path manifest_path;  // empty: default manifest
  std::filesystem::path log_dir = "logs";

  TrainConfig train;
  ForestShape shape;
  IlvqParams ilvq;

  AlarmParams alarm;
  std::size_t retrain_batch = 20;
  std::size_t ring_size = 10000;

  std::filesystem::path grid_path;  // empty: grid stored with the model
  std::size_t grid_points = 7;

  std::filesystem::path labels_path = "labels.csv";
  double speedup = 100.0;
  std::uint64_t sim_seed = 7;

  // Relative paths in a file resolve against the file's directory.
  static PipelineConfig from_text(std::string_view text, const std::filesystem::path &base_dir);
  static PipelineConfig load(const std::filesystem::path &file);

  FeatureManifest manifest() const;
  std::filesystem::path prediction_log() const { return log_dir / "predictions.jsonl"; }
  std::filesystem::path alarm_log() const { return log_dir / "alarms.log"; }
  void validate() const;
};

struct Endpoint {
  std::string host;
  int port = 0;
};
// "host:port"; throws invalid_spec.
Endpoint parse_endpoint(std::string_view text);

}  // namespace edgecl
