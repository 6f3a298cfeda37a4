#include "graphchain/http_service.hpp"

#include <httplib.h>

#include <json.hpp>

#include "graphchain/errors.hpp"

namespace graphchain {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, std::size_t line = 0) {
  json body{{"error", message}};
  if (line) body["line"] = line;
  send_json(res, status, body);
}

template <class F>
httplib::Server::Handler guarded(F handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ParseError& e) {
      send_error(res, 400, e.what(), e.line());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed request body: ") + e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const StateError& e) {
      send_error(res, 409, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const PlanningError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

std::uint64_t query_u64(const httplib::Request& req, const char* key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ValidationError(std::string("query parameter '") + key + "' must be a non-negative integer");
  }
}

bool terminal(SessionStatus s) { return s == SessionStatus::done || s == SessionStatus::failed; }

json events_body(const Session& s, std::uint64_t since) {
  json events = json::array();
  for (const auto& e : s.events)
    if (e.seq > since) events.push_back(event_view(e));
  return {{"id", s.id}, {"status", to_string(s.status)}, {"last_seq", s.last_seq()}, {"events", events},
          {"report", s.report}};
}

json api_view(const ApiSpec& a) {
  return {{"id", a.id}, {"description", a.description}, {"input", to_string(a.input)},
          {"output", to_string(a.output)}, {"executable", a.executable()}};
}

}  // namespace

HttpService::HttpService(Orchestrator& orchestrator)
    : orchestrator_(orchestrator), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpService::serve() { server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void HttpService::routes() {
  auto& srv = *server_;
  auto& orch = orchestrator_;

  srv.Post("/sessions", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
             const json body = body_of(req);
             std::optional<std::uint64_t> seed;
             if (body.contains("seed")) seed = body.at("seed").get<std::uint64_t>();
             const auto s = orch.submit_prompt(body.value("question", std::string{}),
                                               body.at("graph_document").get<std::string>(), seed);
             send_json(res, 201, session_view(s));
           }));

  srv.Get("/sessions", guarded([&orch](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& s : orch.list_sessions())
              out.push_back({{"id", s.id}, {"question", s.question}, {"status", to_string(s.status)}});
            send_json(res, 200, {{"sessions", out}});
          }));

  srv.Get(R"(/sessions/([0-9A-Za-z_-]+))", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, session_view(orch.get_session(req.matches[1])));
          }));

  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/sequences)",
          guarded([&orch](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, sequences_view(orch.get_session(req.matches[1]).sequences));
          }));

  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/confirm)",
           guarded([&orch](const httplib::Request& req, httplib::Response& res) {
             const json body = body_of(req);
             std::optional<ApiChain> edited;
             if (body.contains("chain") && !body.at("chain").is_null()) edited = chain_from_view(body.at("chain"));
             send_json(res, 200, session_view(orch.confirm_chain(req.matches[1], edited)));
           }));

  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/regenerate)",
           guarded([&orch](const httplib::Request& req, httplib::Response& res) {
             const json body = body_of(req);
             send_json(res, 200, session_view(orch.regenerate(req.matches[1], body.at("seed").get<std::uint64_t>())));
           }));

  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/execute)",
           guarded([&orch](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 202, session_view(orch.start_execution(req.matches[1])));
           }));

  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/log)", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
            res.set_content(orch.session_log(req.matches[1]), "application/x-ndjson");
          }));

  // Poll: ?since=<seq>[&wait=<ms>]. Stream: ?stream=1 pushes one event per
  // line until the session is terminal.
  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/events)",
          guarded([&orch](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const std::uint64_t since = query_u64(req, "since", 0);
            Session s = orch.get_session(id);
            if (query_u64(req, "stream", 0) == 0) {
              const auto wait = query_u64(req, "wait", 0);
              if (wait > 0) s = orch.wait_for_events(id, since, std::chrono::milliseconds(std::min<std::uint64_t>(wait, 60000)));
              send_json(res, 200, events_body(s, since));
              return;
            }
            res.set_chunked_content_provider(
                "application/x-ndjson", [&orch, id, cursor = since](std::size_t, httplib::DataSink& sink) mutable {
                  const Session s = orch.wait_for_events(id, cursor, std::chrono::milliseconds(500));
                  for (const auto& e : s.events) {
                    if (e.seq <= cursor) continue;
                    const std::string line = event_view(e).dump() + "\n";
                    if (!sink.write(line.data(), line.size())) return false;
                    cursor = e.seq;
                  }
                  if (terminal(s.status)) {
                    const std::string line =
                        json{{"status", to_string(s.status)}, {"report", s.report}}.dump() + "\n";
                    sink.write(line.data(), line.size());
                    sink.done();
                  }
                  return true;
                });
          }));

  srv.Get("/apis", guarded([&orch](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto* a : orch.registry().specs()) out.push_back(api_view(*a));
            send_json(res, 200, {{"apis", out}});
          }));

  srv.Post("/apis/retrieve", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
             const json body = body_of(req);
             const auto k = body.value("k", std::size_t{5});
             json out = json::array();
             for (const auto& hit : orch.registry().retrieve(body.value("question", std::string{}), k)) {
               json v = api_view(*hit.spec);
               v["score"] = hit.score;
               out.push_back(v);
             }
             send_json(res, 200, {{"results", out}});
           }));

  srv.Post("/suggestions", guarded([](const httplib::Request& req, httplib::Response& res) {
             const json body = body_of(req);
             const Graph g = parse_graph(body.at("graph_document").get<std::string>());
             send_json(res, 200, {{"type", classify_graph(g)}, {"questions", suggest_questions(g)}});
           }));
}

}  // namespace graphchain
