#pragma once

#include <memory>
#include <string>
#include <thread>

#include "edgecl/error.hpp"
#include "edgecl/registry.hpp"
#include "edgecl/service.hpp"

namespace httplib {
class Server;
}

namespace edgecl {

// HTTP status for an error code.
int http_status(Errc code);

// JSON-over-HTTP front for a PredictService:
//   POST /v1/predict, POST /v1/labels, GET /v1/alarms, POST /v1/alarms/{id}/ack,
//   POST /v1/optimize, GET /v1/runs, GET /v1/runs/{id}, GET /v1/stream, GET /v1/health
// Errors are {"error": <code name>, "message": ...}.
class HttpApi {
 public:
  // `registry` may be null; run views are then empty.
  HttpApi(PredictService &service, Registry *registry);
  ~HttpApi();
  HttpApi(const HttpApi &) = delete;
  HttpApi &operator=(const HttpApi &) = delete;

  // Port 0 picks a free port. Returns the bound port; throws environment.
  int bind(const std::string &host, int port);
  // Blocks until stop().
  void serve();
  // serve() on a background thread.
  void start();
  void stop();

 private:
  void routes();

  PredictService &service_;
  Registry *registry_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace edgecl
