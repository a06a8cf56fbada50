#include "hmdgeom/service/http.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>

#include "httplib.h"

#include "hmdgeom/service/handlers.hpp"

namespace hmdgeom::service {

namespace {

using Handler = std::function<json(const json&)>;

void apply_cors(const ServeOptions& options, const httplib::Request& req, httplib::Response& res) {
  const auto& allowed = options.cors_origins;
  const bool any = std::find(allowed.begin(), allowed.end(), "*") != allowed.end();
  const std::string origin = req.get_header_value("Origin");
  if (any) {
    res.set_header("Access-Control-Allow-Origin", "*");
  } else if (!origin.empty() && std::find(allowed.begin(), allowed.end(), origin) != allowed.end()) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Vary", "Origin");
  } else {
    return;
  }
  res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  res.set_header("Access-Control-Allow-Headers", "Content-Type");
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

httplib::Server::Handler json_route(Handler handler) {
  return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    json request;
    try {
      request = json::parse(req.body);
    } catch (const json::exception& e) {
      reply(res, 400, error_body(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what()));
      return;
    }
    try {
      reply(res, 200, handler(request));
    } catch (const Error& e) {
      reply(res, http_status(e.code()), error_body(e.code(), e.what()));
    } catch (const json::exception& e) {
      reply(res, 400, error_body(ErrorCode::InvalidInput, e.what()));
    }
  };
}

}  // namespace

int default_port() {
  if (const char* env = std::getenv("HMDGEOM_PORT")) {
    char* end = nullptr;
    const long port = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && port > 0 && port < 65536) return static_cast<int>(port);
  }
  return 8080;
}

std::unique_ptr<httplib::Server> make_server(const ServeOptions& options) {
  auto server = std::make_unique<httplib::Server>();
  server->set_post_routing_handler(
      [options](const httplib::Request& req, httplib::Response& res) { apply_cors(options, req, res); });
  server->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server->Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}});
  });
  server->Post("/api/predict", json_route(handle_predict));
  server->Post("/api/field", json_route(handle_field));
  server->Post("/api/fit", json_route(handle_fit));
  server->Post("/api/simulate", json_route(handle_simulate));
  server->Post("/api/pipeline-check", json_route(handle_pipeline_check));
  server->Post("/api/reach-table", json_route(handle_reach_table));
  return server;
}

bool serve(const ServeOptions& options) {
  auto server = make_server(options);
  return server->listen(options.host, options.port);
}

}  // namespace hmdgeom::service
