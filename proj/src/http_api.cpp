#include "edgecl/http_api.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <json.hpp>

#include "edgecl/error.hpp"
#include "edgecl/json_io.hpp"

namespace edgecl {

using json = nlohmann::json;

int http_status(Errc code) {
  switch (code) {
    case Errc::rejected_input:
    case Errc::empty_input:
    case Errc::parse:
    case Errc::invalid_spec:
      return 400;
    case Errc::not_found:
    case Errc::unknown_batch:
      return 404;
    case Errc::conflict:
    case Errc::precondition:
    case Errc::stale_model:
    case Errc::immutable:
      return 409;
    case Errc::service_unavailable:
      return 503;
    default:
      return 500;
  }
}

namespace {

void reply(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response &res, Errc code, const std::string &message) {
  reply(res, http_status(code), json{{"error", errc_name(code)}, {"message", message}});
}

// Wraps a handler so that library errors become JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request &req, httplib::Response &res) {
    try {
      f(req, res);
    } catch (const Error &e) {
      reply_error(res, e.code(), e.what());
    } catch (const json::exception &e) {
      reply_error(res, Errc::rejected_input, std::string("bad request body: ") + e.what());
    } catch (const std::exception &e) {
      reply_error(res, Errc::storage, e.what());
    }
  };
}

json body_of(const httplib::Request &req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) fail(Errc::rejected_input, "request body must be a JSON object");
  return j;
}

FeatureVector features_from(const json &j) {
  FeatureVector fv;
  fv.values = j.at("features").get<std::vector<double>>();
  fv.sample_id = j.value("sample_id", "");
  fv.batch_id = j.value("batch_id", "");
  fv.timestamp = now_utc();
  return fv;
}

std::uint64_t query_u64(const httplib::Request &req, const char *key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    fail(Errc::rejected_input, std::string("query parameter ") + key + " must be a non-negative integer");
  }
  return out;
}

}  // namespace

HttpApi::HttpApi(PredictService &service, Registry *registry)
    : service_(service), registry_(registry), server_(std::make_unique<httplib::Server>()) {
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void *>(&yes), sizeof yes);
  });
  routes();
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string &host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p <= 0) fail(Errc::environment, "cannot bind " + host);
    return p;
  }
  if (!server_->bind_to_port(host, port)) {
    fail(Errc::environment, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpApi::serve() { server_->listen_after_bind(); }

void HttpApi::start() {
  thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
}

void HttpApi::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpApi::routes() {
  auto &s = *server_;

  s.Options(R"(/v1/.*)", [](const httplib::Request &, httplib::Response &res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  s.Post("/v1/predict", guarded([this](const httplib::Request &req, httplib::Response &res) {
    const json j = body_of(req);
    const auto r = service_.predict(features_from(j));
    reply(res, 200,
          json{{"sample_id", r.record.sample_id},
               {"batch_id", r.record.batch_id},
               {"seq", r.record.seq},
               {"p_defect", r.record.p_defect},
               {"predicted_class", r.record.predicted_class},
               {"model_version", r.record.model_version},
               {"alarm_latched", r.alarm_latched}});
  }));

  s.Post("/v1/labels", guarded([this](const httplib::Request &req, httplib::Response &res) {
    const json j = body_of(req);
    const auto st = service_.submit_label(j.at("sample_id").get<std::string>(),
                                          j.at("label").get<int>(), j.value("submitted_by", ""));
    if (st.triggered) {
      reply(res, 202, json{{"status", "triggered"}, {"run_id", st.run_id}});
    } else {
      reply(res, 202, json{{"status", "queued"}, {"buffer_size", st.buffer_size}});
    }
  }));

  s.Get("/v1/alarms", guarded([this](const httplib::Request &, httplib::Response &res) {
    json out = json::array();
    for (const auto &a : service_.alarm_status()) out.push_back(to_json(a));
    reply(res, 200, out);
  }));

  s.Post(R"(/v1/alarms/([^/]+)/ack)",
         guarded([this](const httplib::Request &req, httplib::Response &res) {
           const json j = body_of(req);
           const auto st =
               service_.acknowledge_alarm(req.matches[1].str(), j.value("operator", "operator"));
           reply(res, 200, to_json(st));
         }));

  s.Post("/v1/optimize", guarded([this](const httplib::Request &req, httplib::Response &res) {
    const json j = body_of(req);
    FeatureVector fv;
    if (j.contains("features")) {
      fv = features_from(j);
    } else if (j.contains("sample_id")) {
      const std::string id = j.at("sample_id");
      const auto found = service_.features_of(id);
      if (!found) fail(Errc::not_found, "no prediction for sample " + id);
      fv = *found;
    } else {
      fail(Errc::rejected_input, "optimize needs sample_id or features");
    }
    reply(res, 200, to_json(service_.optimize(fv)));
  }));

  s.Get("/v1/runs", guarded([this](const httplib::Request &, httplib::Response &res) {
    json out = json::array();
    if (registry_) {
      for (const auto &r : registry_->runs()) out.push_back(to_json(r));
    }
    reply(res, 200, out);
  }));

  s.Get(R"(/v1/runs/(\d+))", guarded([this](const httplib::Request &req, httplib::Response &res) {
    const std::uint64_t id = std::stoull(req.matches[1].str());
    const auto run = registry_ ? registry_->run(id) : std::nullopt;
    if (!run) fail(Errc::not_found, "no run " + req.matches[1].str());
    json j = to_json(*run);
    j["metrics"] = json::array();
    for (const auto &m : registry_->metrics(id)) j["metrics"].push_back(to_json(m));
    j["artifacts"] = json::array();
    for (const auto &a : registry_->artifacts(id)) j["artifacts"].push_back(to_json(a));
    reply(res, 200, j);
  }));

  s.Get("/v1/stream", guarded([this](const httplib::Request &req, httplib::Response &res) {
    const std::uint64_t cursor = query_u64(req, "cursor", 0);
    const std::uint64_t max = std::clamp<std::uint64_t>(query_u64(req, "max", 500), 1, 10000);
    const std::uint64_t wait_ms = std::min<std::uint64_t>(query_u64(req, "wait_ms", 10000), 30000);
    const auto records = service_.stream(cursor, max, std::chrono::milliseconds(wait_ms));
    json out{{"cursor", records.empty() ? cursor : records.back().seq}, {"records", json::array()}};
    for (const auto &r : records) out["records"].push_back(to_json(r));
    reply(res, 200, out);
  }));

  s.Get("/v1/health", guarded([this](const httplib::Request &, httplib::Response &res) {
    const auto h = service_.handle();
    const double uptime = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        service_.started())
                              .count();
    json j{{"status", h ? "ok" : "no_model"},
           {"version", h ? json(h->version) : json(nullptr)},
           {"uptime", uptime},
           {"label_buffer", service_.label_buffer_size()}};
    if (h) j["activated_at"] = format_timestamp(h->activated_at);
    reply(res, h ? 200 : 503, j);
  }));
}

}  // namespace edgecl
