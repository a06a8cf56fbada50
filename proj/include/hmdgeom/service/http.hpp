#pragma once

#include <memory>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace hmdgeom::service {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Origins answered with CORS headers; "*" allows any origin.
  std::vector<std::string> cors_origins = {"*"};
};

/// Port from HMDGEOM_PORT, else 8080.
int default_port();

/// Routes: POST /api/predict, /api/field, /api/fit, /api/simulate,
/// /api/pipeline-check, /api/reach-table and GET /api/health.
std::unique_ptr<httplib::Server> make_server(const ServeOptions& options);

/// Blocks serving requests. Returns false when the port cannot be bound.
bool serve(const ServeOptions& options);

}  // namespace hmdgeom::service
