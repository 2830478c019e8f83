#pragma once

#include <memory>
#include <string>

#include "narrative/session.hpp"

namespace httplib {
class Server;
}

namespace narrative {

struct ServiceOptions {
  std::string client_dir;     // static files mounted at "/" when it exists
  std::string cors_origin = "*";
};

/// HTTP routes under /api/v1 backed by `sessions`. The manager must outlive the server.
std::unique_ptr<httplib::Server> make_server(SessionManager& sessions, const ServiceOptions& opts = {});

}  // namespace narrative
