#include "narrative/service.hpp"

#include <filesystem>

#include "httplib.h"
#include "narrative/errors.hpp"

namespace narrative {

using nlohmann::json;

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send(res, status, {{"code", code}, {"message", message}});
}

template <typename F>
auto guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const UnknownSession& e) {
      send_error(res, 404, "unknown_session", e.what());
    } catch (const SessionFinished& e) {
      send_error(res, 409, "session_finished", e.what());
    } catch (const InvalidChoice& e) {
      send_error(res, 400, "invalid_choice", e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

std::unique_ptr<httplib::Server> make_server(SessionManager& sessions, const ServiceOptions& opts) {
  auto server = std::make_unique<httplib::Server>();
  auto& svr = *server;
  const std::string origin = opts.cors_origin;
  svr.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  });
  svr.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  svr.Post("/api/v1/sessions",
           guarded([&sessions](const httplib::Request&, httplib::Response& res) { send(res, 201, sessions.create()); }));

  svr.Get(R"(/api/v1/sessions/([0-9a-f]+))", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, sessions.get_state(req.matches[1]));
          }));

  svr.Post(R"(/api/v1/sessions/([0-9a-f]+)/actions)",
           guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const json body = parse_body(req);
             if (body.contains("choice")) {
               const auto& c = body["choice"];
               if (!c.is_number_integer() || c.get<long long>() < 0) throw InvalidChoice("choice must be an index");
               send(res, 200, sessions.post_action(id, c.get<std::size_t>()));
             } else if (body.contains("action")) {
               ActionInstance a;
               try {
                 a = action_from_json(sessions.world(), body["action"]);
               } catch (const std::invalid_argument& e) {
                 throw InvalidChoice(e.what());
               }
               send(res, 200, sessions.post_action(id, a));
             } else {
               throw InvalidChoice("body needs \"choice\" or \"action\"");
             }
           }));

  svr.Post(R"(/api/v1/sessions/([0-9a-f]+)/profile)",
           guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             const auto& a = body.at("answers");
             if (!a.is_array() || a.size() != 4) throw InvalidChoice("answers must hold four integers");
             std::array<int, 4> answers{};
             for (int i = 0; i < 4; ++i) {
               if (!a[i].is_number_integer()) throw InvalidChoice("answers must be integers");
               answers[i] = a[i].get<int>();
             }
             const auto p = sessions.post_profile(req.matches[1], answers);
             send(res, 200,
                  {{"profile",
                    {{"familiarity", p.familiarity},
                     {"gaming_experience", p.gaming_experience},
                     {"preference_explore", p.preference_explore},
                     {"persistence", p.persistence}}}});
           }));

  svr.Post(R"(/api/v1/sessions/([0-9a-f]+)/finish)",
           guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
             const auto trace = sessions.finish(req.matches[1]);
             send(res, 200, {{"trace_id", trace}, {"status", "finished"}});
           }));

  if (!opts.client_dir.empty() && std::filesystem::is_directory(opts.client_dir))
    svr.set_mount_point("/", opts.client_dir);
  return server;
}

}  // namespace narrative
