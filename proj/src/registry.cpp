#include "edgecl/registry.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "edgecl/error.hpp"
#include "edgecl/model_io.hpp"
#include "edgecl/sha256.hpp"

namespace edgecl {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::finished: return "finished";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

namespace {

RunStatus status_from_name(std::string_view s) {
  if (s == "running") return RunStatus::running;
  if (s == "finished") return RunStatus::finished;
  if (s == "failed") return RunStatus::failed;
  fail(Errc::storage, "runs.log: unknown status '" + std::string(s) + "'");
}

bool valid_artifact_name(const std::string &name) {
  if (name.empty() || name == "." || name == "..") return false;
  for (char c : name) {
    if (c == '/' || c == '\\' || c == '\0' || c == '\n') return false;
  }
  return true;
}

Timestamp ts_from(const json &j) {
  const auto t = parse_timestamp(j.get<std::string>());
  if (!t) fail(Errc::storage, "runs.log: bad timestamp");
  return *t;
}

}  // namespace

Registry::Registry(fs::path root, Mode mode) : root_(std::move(root)), mode_(mode) {
  std::error_code ec;
  if (mode_ == Mode::writer) {
    fs::create_directories(root_ / "artifacts", ec);
    if (ec) fail(Errc::storage, "cannot create registry at " + root_.string() + ": " + ec.message());
    lock_fd_ = ::open((root_ / "LOCK").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) fail(Errc::storage, "cannot open registry lock");
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      lock_fd_ = -1;
      fail(Errc::storage, "registry " + root_.string() + " is locked by another writer");
    }
  } else if (!fs::is_directory(root_)) {
    fail(Errc::storage, "no registry at " + root_.string());
  }
  const std::uintmax_t committed = replay();
  if (mode_ == Mode::writer) {
    // Drop a torn tail so the next append starts on a fresh line.
    const fs::path log_path = root_ / "runs.log";
    if (fs::exists(log_path) && fs::file_size(log_path) > committed) {
      fs::resize_file(log_path, committed, ec);
      if (ec) fail(Errc::storage, "cannot truncate torn runs.log tail: " + ec.message());
    }
    log_ = std::fopen((root_ / "runs.log").c_str(), "ab");
    if (!log_) fail(Errc::storage, "cannot open runs.log for append");
  }
}

Registry::~Registry() {
  if (log_) std::fclose(log_);
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void Registry::reload() {
  std::lock_guard lock(mu_);
  replay();
}

std::uintmax_t Registry::replay() {
  runs_.clear();
  metrics_.clear();
  artifacts_.clear();
  next_id_ = 1;
  std::ifstream in(root_ / "runs.log", std::ios::binary);
  if (!in) return 0;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      fail(Errc::storage, std::string("runs.log: ") + e.what());
    }
    const std::string kind = j.at("kind");
    const std::uint64_t id = j.at("run_id");
    if (kind == "run") {
      Run r;
      r.run_id = id;
      r.created_at = ts_from(j.at("created_at"));
      r.params = j.at("params").get<std::map<std::string, std::string>>();
      runs_[id] = std::move(r);
      next_id_ = std::max(next_id_, id + 1);
    } else if (kind == "metric") {
      MetricEntry m{id, j.at("name"), j.at("step"), j.at("value"), ts_from(j.at("timestamp"))};
      metrics_[id][{m.name, m.step}] = std::move(m);
    } else if (kind == "artifact") {
      artifacts_[id].push_back(
          {id, j.at("name"), j.at("path"), j.at("bytes"), j.at("sha256")});
    } else if (kind == "status") {
      runs_.at(id).status = status_from_name(j.at("status").get<std::string>());
    } else {
      fail(Errc::storage, "runs.log: unknown record kind '" + kind + "'");
    }
  }
  return pos;
}

void Registry::append(const std::string &line) {
  if (mode_ != Mode::writer) fail(Errc::storage, "registry opened read-only");
  const std::string rec = line + "\n";
  if (std::fwrite(rec.data(), 1, rec.size(), log_) != rec.size() || std::fflush(log_) != 0 ||
      ::fsync(::fileno(log_)) != 0) {
    fail(Errc::storage, "runs.log append failed");
  }
}

Run &Registry::running(std::uint64_t run_id) {
  const auto it = runs_.find(run_id);
  if (it == runs_.end()) fail(Errc::not_found, "no run " + std::to_string(run_id));
  if (it->second.status != RunStatus::running) {
    fail(Errc::immutable, "run " + std::to_string(run_id) + " is " +
                              std::string(run_status_name(it->second.status)));
  }
  return it->second;
}

Run Registry::start_run(std::map<std::string, std::string> params) {
  std::lock_guard lock(mu_);
  Run r;
  r.run_id = next_id_;
  r.created_at = now_utc();
  r.params = std::move(params);
  append(json{{"kind", "run"},
              {"run_id", r.run_id},
              {"created_at", format_timestamp(r.created_at)},
              {"params", r.params}}
             .dump());
  runs_[r.run_id] = r;
  ++next_id_;
  return r;
}

void Registry::log_metric(std::uint64_t run_id, const std::string &name, std::uint64_t step,
                          double value) {
  std::lock_guard lock(mu_);
  running(run_id);
  if (name.empty()) fail(Errc::rejected_input, "metric name is empty");
  if (!std::isfinite(value)) fail(Errc::rejected_input, "metric value must be finite");
  auto &per_run = metrics_[run_id];
  if (per_run.count({name, step})) {
    fail(Errc::conflict, "metric " + name + "@" + std::to_string(step) + " already logged");
  }
  MetricEntry m{run_id, name, step, value, now_utc()};
  append(json{{"kind", "metric"},
              {"run_id", run_id},
              {"name", name},
              {"step", step},
              {"value", value},
              {"timestamp", format_timestamp(m.timestamp)}}
             .dump());
  per_run[{name, step}] = std::move(m);
}

ArtifactRef Registry::store_artifact(std::uint64_t run_id, const std::string &name,
                                     std::string_view bytes) {
  std::lock_guard lock(mu_);
  if (!runs_.count(run_id)) fail(Errc::not_found, "no run " + std::to_string(run_id));
  if (!valid_artifact_name(name)) fail(Errc::rejected_input, "bad artifact name '" + name + "'");
  for (const auto &a : artifacts_[run_id]) {
    if (a.name == name) fail(Errc::conflict, "artifact " + name + " already stored for run");
  }

  const fs::path rel = fs::path("artifacts") / std::to_string(run_id) / name;
  const fs::path dst = root_ / rel;
  std::error_code ec;
  fs::create_directories(dst.parent_path(), ec);
  if (ec) fail(Errc::storage, "cannot create " + dst.parent_path().string());
  const fs::path tmp = dst.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(Errc::storage, "cannot write " + tmp.string());
  }
  fs::rename(tmp, dst, ec);
  if (ec) fail(Errc::storage, "cannot commit " + dst.string());

  ArtifactRef ref{run_id, name, rel.generic_string(), bytes.size(), sha256_hex(bytes)};
  append(json{{"kind", "artifact"},
              {"run_id", run_id},
              {"name", ref.name},
              {"path", ref.path},
              {"bytes", ref.bytes},
              {"sha256", ref.sha256}}
             .dump());
  artifacts_[run_id].push_back(ref);
  return ref;
}

void Registry::finish_run(std::uint64_t run_id, RunStatus status) {
  std::lock_guard lock(mu_);
  Run &r = running(run_id);
  if (status == RunStatus::running) fail(Errc::rejected_input, "cannot finish into running");
  append(json{{"kind", "status"},
              {"run_id", run_id},
              {"status", run_status_name(status)},
              {"timestamp", format_timestamp(now_utc())}}
             .dump());
  r.status = status;
}

std::string Registry::fetch_artifact(const ArtifactRef &ref) const {
  std::ifstream in(root_ / ref.path, std::ios::binary);
  if (!in) fail(Errc::not_found, "artifact file missing: " + ref.path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  if (bytes.size() != ref.bytes || sha256_hex(bytes) != ref.sha256) {
    fail(Errc::storage, "artifact digest mismatch: " + ref.path);
  }
  return bytes;
}

std::vector<Run> Registry::runs() const {
  std::lock_guard lock(mu_);
  std::vector<Run> out;
  for (const auto &[id, r] : runs_) out.push_back(r);
  return out;
}

std::optional<Run> Registry::run(std::uint64_t run_id) const {
  std::lock_guard lock(mu_);
  const auto it = runs_.find(run_id);
  if (it == runs_.end()) return std::nullopt;
  return it->second;
}

std::vector<MetricEntry> Registry::metrics(std::uint64_t run_id) const {
  std::lock_guard lock(mu_);
  std::vector<MetricEntry> out;
  if (const auto it = metrics_.find(run_id); it != metrics_.end()) {
    for (const auto &[key, m] : it->second) out.push_back(m);
  }
  return out;
}

std::vector<ArtifactRef> Registry::artifacts(std::uint64_t run_id) const {
  std::lock_guard lock(mu_);
  const auto it = artifacts_.find(run_id);
  return it == artifacts_.end() ? std::vector<ArtifactRef>{} : it->second;
}

std::pair<Model, ArtifactRef> Registry::latest_model() const {
  std::vector<ArtifactRef> candidates;
  {
    std::lock_guard lock(mu_);
    for (const auto &[id, r] : runs_) {
      if (r.status != RunStatus::finished) continue;
      const auto it = artifacts_.find(id);
      if (it == artifacts_.end()) continue;
      for (const auto &a : it->second) {
        if (a.name == kModelArtifact) candidates.push_back(a);
      }
    }
  }
  std::optional<std::pair<std::uint64_t, ArtifactRef>> best;
  for (const auto &ref : candidates) {
    const std::uint64_t v = model_version_of(fetch_artifact(ref));
    if (!best || v >= best->first) best = {v, ref};
  }
  if (!best) fail(Errc::not_found, "no finished run has a stored model");
  return {deserialize_model(fetch_artifact(best->second)), best->second};
}

void Registry::verify() const {
  std::vector<ArtifactRef> all;
  {
    std::lock_guard lock(mu_);
    for (const auto &[id, refs] : artifacts_) all.insert(all.end(), refs.begin(), refs.end());
  }
  for (const auto &ref : all) fetch_artifact(ref);
}

}  // namespace edgecl
