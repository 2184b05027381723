#include "edgecl/ingest_loop.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <thread>
#include <variant>

#include "edgecl/error.hpp"
#include "edgecl/wire.hpp"

namespace edgecl {

IngestPipeline::IngestPipeline(FeatureManifest manifest, PredictService &service)
    : manifest_(manifest), session_(std::move(manifest)), service_(service) {}

void IngestPipeline::reset_session() {
  std::lock_guard lock(mu_);
  dropped_before_reset_ += session_.dropped_late();
  session_ = IngestSession(manifest_);
}

IngestStats IngestPipeline::stats() const {
  std::lock_guard lock(mu_);
  IngestStats s = stats_;
  s.dropped_late = dropped_before_reset_ + session_.dropped_late();
  return s;
}

void IngestPipeline::feed(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::unique_lock lock(mu_);
  ++stats_.lines;
  if (line.empty()) return;
  WireMessage msg;
  try {
    msg = parse_line(line);
  } catch (const Error &e) {
    ++stats_.parse_errors;
    lock.unlock();
    if (on_error_) on_error_(line, e.what());
    return;
  }
  if (const auto *r = std::get_if<SensorReading>(&msg)) {
    ++stats_.readings;
    const auto fv = session_.accept(*r);
    if (!fv) return;
    try {
      service_.predict(*fv);
      ++stats_.predictions;
    } catch (const Error &e) {
      ++stats_.predict_errors;
      lock.unlock();
      if (on_error_) on_error_(line, e.what());
    }
    return;
  }
  const auto &end = std::get<BatchEnd>(msg);
  if (session_.has_batch(end.batch_id)) session_.end_batch(end.batch_id);
  ++stats_.batches;
  lock.unlock();
  const AlarmState closed = service_.end_batch(end.batch_id);
  if (on_batch_end_) on_batch_end_(closed);
}

void pump(std::istream &in, IngestPipeline &pipeline, const std::atomic<bool> &stop) {
  std::string line;
  while (!stop.load() && std::getline(in, line)) pipeline.feed(line);
}

namespace {

sockaddr_in resolve(const std::string &host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo *res = nullptr;
    if (::getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || !res) {
      fail(Errc::environment, "cannot resolve host " + host);
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in *>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  return addr;
}

}  // namespace

TcpIngestServer::~TcpIngestServer() {
  if (fd_ >= 0) ::close(fd_);
}

int TcpIngestServer::bind(const std::string &host, int port) {
  const sockaddr_in addr = resolve(host, port);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) fail(Errc::environment, "socket() failed");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_, reinterpret_cast<const sockaddr *>(&addr), sizeof addr) != 0 ||
      ::listen(fd_, 4) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    fail(Errc::environment, "cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd_, reinterpret_cast<sockaddr *>(&bound), &len);
  return ntohs(bound.sin_port);
}

void TcpIngestServer::run(IngestPipeline &pipeline, const std::atomic<bool> &stop) {
  if (fd_ < 0) fail(Errc::precondition, "ingest server is not bound");
  while (!stop.load()) {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int conn = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (conn < 0) continue;
    pipeline.reset_session();
    std::string buf;
    char chunk[65536];
    while (!stop.load()) {
      pollfd c{conn, POLLIN, 0};
      if (::poll(&c, 1, 100) <= 0) continue;
      const ssize_t n = ::read(conn, chunk, sizeof chunk);
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t start = 0;
      for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n', start)) {
        pipeline.feed(std::string_view(buf).substr(start, nl - start));
        start = nl + 1;
      }
      buf.erase(0, start);
    }
    if (!buf.empty()) pipeline.feed(buf);
    ::close(conn);
  }
}

TcpLineWriter::TcpLineWriter(const std::string &host, int port, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(host, port);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) fail(Errc::environment, "socket() failed");
    if (::connect(fd_, reinterpret_cast<const sockaddr *>(&addr), sizeof addr) == 0) return;
    ::close(fd_);
    fd_ = -1;
    if (std::chrono::steady_clock::now() >= deadline) {
      fail(Errc::environment, "cannot connect to " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

TcpLineWriter::~TcpLineWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpLineWriter::write_line(std::string_view line) {
  std::string buf(line);
  buf += '\n';
  std::size_t off = 0;
  while (off < buf.size()) {
    const ssize_t n = ::send(fd_, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(Errc::environment, std::string("ingest connection lost: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace edgecl
