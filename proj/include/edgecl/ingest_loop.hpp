#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>

#include "edgecl/ingest.hpp"
#include "edgecl/service.hpp"

namespace edgecl {

struct IngestStats {
  std::uint64_t lines = 0;
  std::uint64_t readings = 0;
  std::uint64_t batches = 0;
  std::uint64_t predictions = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t predict_errors = 0;
  std::uint64_t dropped_late = 0;
};

// Wire lines -> ingest session -> predictions. Bad lines are counted and
// skipped; the loop never stops on input errors.
class IngestPipeline {
 public:
  IngestPipeline(FeatureManifest manifest, PredictService &service);

  void feed(std::string_view line);
  // Fresh assembly state, e.g. for a new transport connection. Batches still
  // open in the old session are abandoned.
  void reset_session();
  IngestStats stats() const;
  // Called after each end-of-batch with the closed alarm state.
  void on_batch_end(std::function<void(const AlarmState &)> fn) { on_batch_end_ = std::move(fn); }
  // Called with each rejected line and the reason.
  void on_error(std::function<void(std::string_view, const std::string &)> fn) { on_error_ = std::move(fn); }

 private:
  FeatureManifest manifest_;
  IngestSession session_;
  PredictService &service_;
  std::uint64_t dropped_before_reset_ = 0;
  mutable std::mutex mu_;
  IngestStats stats_;
  std::function<void(const AlarmState &)> on_batch_end_;
  std::function<void(std::string_view, const std::string &)> on_error_;
};

// Feeds every line of `in` until EOF or `stop`.
void pump(std::istream &in, IngestPipeline &pipeline, const std::atomic<bool> &stop);

// Accepts one connection at a time; each connection gets a fresh session.
class TcpIngestServer {
 public:
  TcpIngestServer() = default;
  ~TcpIngestServer();
  TcpIngestServer(const TcpIngestServer &) = delete;
  TcpIngestServer &operator=(const TcpIngestServer &) = delete;

  // Port 0 picks a free port. Returns the bound port; throws environment.
  int bind(const std::string &host, int port);
  // Runs until `stop` is set; polls it every 100 ms.
  void run(IngestPipeline &pipeline, const std::atomic<bool> &stop);

 private:
  int fd_ = -1;
};

// Line-oriented TCP client. Retries the connect for up to `timeout`.
class TcpLineWriter {
 public:
  TcpLineWriter(const std::string &host, int port, std::chrono::milliseconds timeout);
  ~TcpLineWriter();
  TcpLineWriter(const TcpLineWriter &) = delete;
  TcpLineWriter &operator=(const TcpLineWriter &) = delete;

  void write_line(std::string_view line);

 private:
  int fd_ = -1;
};

}  // namespace edgecl
