#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgecl/timestamp.hpp"
#include "edgecl/training.hpp"

namespace edgecl {

enum class RunStatus { running, finished, failed };

std::string_view run_status_name(RunStatus s);

struct Run {
  std::uint64_t run_id = 0;
  Timestamp created_at{};
  std::map<std::string, std::string> params;
  RunStatus status = RunStatus::running;
};

struct MetricEntry {
  std::uint64_t run_id = 0;
  std::string name;
  std::uint64_t step = 0;
  double value = 0.0;
  Timestamp timestamp{};
};

struct ArtifactRef {
  std::uint64_t run_id = 0;
  std::string name;
  std::string path;  // relative to the registry root
  std::uint64_t bytes = 0;
  std::string sha256;
};

inline constexpr std::string_view kModelArtifact = "model.tril3";

// File-backed run/metric/artifact store.
//
// Layout under the root:
//   runs.log                     newline-delimited JSON, append-only
//   artifacts/<run_id>/<name>    artifact bytes
//   LOCK                         flock()ed by the single writer
//
// runs.log records carry a "kind" of run | metric | artifact | status. A
// trailing line without its newline (torn write) is ignored on replay and
// truncated when a writer opens the root.
class Registry {
 public:
  enum class Mode { writer, reader };

  explicit Registry(std::filesystem::path root, Mode mode = Mode::writer);
  ~Registry();
  Registry(const Registry &) = delete;
  Registry &operator=(const Registry &) = delete;

  Run start_run(std::map<std::string, std::string> params = {});
  void log_metric(std::uint64_t run_id, const std::string &name, std::uint64_t step, double value);
  ArtifactRef store_artifact(std::uint64_t run_id, const std::string &name, std::string_view bytes);
  void finish_run(std::uint64_t run_id, RunStatus status);

  // Reads the bytes back and checks the recorded digest.
  std::string fetch_artifact(const ArtifactRef &ref) const;

  std::vector<Run> runs() const;
  std::optional<Run> run(std::uint64_t run_id) const;
  // Ordered by (name, step).
  std::vector<MetricEntry> metrics(std::uint64_t run_id) const;
  std::vector<ArtifactRef> artifacts(std::uint64_t run_id) const;

  // Greatest model version among finished runs. Throws not_found.
  std::pair<Model, ArtifactRef> latest_model() const;

  // Re-reads every artifact and checks its digest. Throws storage on mismatch.
  void verify() const;

  // Re-reads runs.log (for reader handles).
  void reload();

  const std::filesystem::path &root() const { return root_; }

 private:
  // Returns the byte length of the committed (newline-terminated) prefix.
  std::uintmax_t replay();
  void append(const std::string &line);
  Run &running(std::uint64_t run_id);

  std::filesystem::path root_;
  Mode mode_;
  int lock_fd_ = -1;
  std::FILE *log_ = nullptr;

  mutable std::mutex mu_;
  std::map<std::uint64_t, Run> runs_;
  std::map<std::uint64_t, std::map<std::pair<std::string, std::uint64_t>, MetricEntry>> metrics_;
  std::map<std::uint64_t, std::vector<ArtifactRef>> artifacts_;
  std::uint64_t next_id_ = 1;
};

}  // namespace edgecl
