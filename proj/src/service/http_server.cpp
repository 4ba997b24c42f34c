#include "kgg/service/http_server.hpp"

#include <httplib.h>

#include "kgg/session/serialize.hpp"

namespace kgg::service {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
  send_json(res, {{"error", {{"code", code}, {"message", message}}}}, status_for(code));
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) throw InvalidRequest("request body must be a JSON object");
    return body;
  } catch (const json::exception& e) {
    throw InvalidRequest(std::string("malformed JSON body: ") + e.what());
  }
}

std::size_t size_param(const httplib::Request& req, const std::string& name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw InvalidRequest(name + " must be a non-negative integer");
  }
}

// Wraps a handler so domain errors become JSON error responses.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, "Internal", e.what());
    }
  };
}

json graph_view_json(const session::SessionState& st, std::optional<std::size_t> step) {
  json out;
  if (st.steps.empty()) {
    if (step) throw session::StepOutOfRange(*step, 0);
    out["view"] = session::StepView{};
  } else {
    out["view"] = session::view_at_step(st, step.value_or(st.current_step));
  }
  json nodes = json::array();
  for (const auto& [id, n] : st.graph.nodes) nodes.push_back(n);
  json edges = json::array();
  for (const auto& [id, e] : st.graph.edges) edges.push_back(e);
  out["nodes"] = nodes;
  out["edges"] = edges;
  out["steps"] = st.steps.size();
  return out;
}

}  // namespace

int status_for(const std::string& code) {
  if (code == "UnknownSession" || code == "UnknownRecommendation" || code == "UnknownEdge" ||
      code == "UnknownNode") {
    return 404;
  }
  if (code == "InvalidRequest" || code == "StepOutOfRange" || code == "InvalidEvent" || code == "EmptyText") return 400;
  if (code == "AlreadyExplored" || code == "SessionExists") return 409;
  if (code == "StoreUnavailable" || code == "ProviderUnavailable" || code == "GatewayError") return 503;
  if (code == "Timeout") return 504;
  return 500;
}

std::string format_sse(const StreamEvent& event) {
  return "event: " + event.type + "\ndata: " + event.data.dump() + "\n\n";
}

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }
int HttpServer::bind_to_any_port(const std::string& host) { return server_->bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }
void HttpServer::stop() { server_->stop(); }
void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

void HttpServer::routes() {
  auto& s = *server_;
  Service& svc = service_;

  s.Get("/healthz", guarded([&svc](const httplib::Request&, httplib::Response& res) {
          send_json(res, {{"status", "ok"},
                          {"nodes", svc.graph().node_count()},
                          {"edges", svc.graph().edge_count()}});
        }));

  s.Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           std::optional<std::string> id;
           if (body.contains("id")) {
             if (!body["id"].is_string()) throw InvalidRequest("id must be a string");
             id = body["id"].get<std::string>();
           }
           send_json(res, {{"id", svc.create_session(id)}}, 201);
         }));

  s.Get(R"(/sessions/([A-Za-z0-9_-]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          send_json(res, svc.state(req.matches[1]));
        }));

  s.Post(R"(/sessions/([A-Za-z0-9_-]+)/messages)",
         guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const std::string id = req.matches[1];
           const json body = parse_body(req);
           MessageRequest msg;
           if (body.contains("text")) {
             if (!body["text"].is_string()) throw InvalidRequest("text must be a string");
             msg.text = body["text"].get<std::string>();
           }
           if (body.contains("recommendation_id")) {
             if (!body["recommendation_id"].is_string()) throw InvalidRequest("recommendation_id must be a string");
             msg.recommendation_id = body["recommendation_id"].get<std::string>();
           }
           if (!msg.recommendation_id && ground::normalize_text(msg.text).empty()) {
             throw InvalidRequest("message needs text or a recommendation_id");
           }
           // Fail fast on an unknown session before the stream starts.
           svc.state(id);
           res.set_header("Cache-Control", "no-cache");
           res.set_chunked_content_provider(
               "text/event-stream", [&svc, id, msg](size_t, httplib::DataSink& sink) {
                 auto write = [&sink](const StreamEvent& e) {
                   const std::string frame = format_sse(e);
                   sink.write(frame.data(), frame.size());
                 };
                 try {
                   svc.handle_message(id, msg, write);
                 } catch (const Error& e) {
                   write({"error", {{"code", e.code()}, {"message", e.what()}}});
                   write({"done", {{"steps", nullptr}}});
                 }
                 sink.done();
                 return true;
               });
         }));

  s.Get(R"(/sessions/([A-Za-z0-9_-]+)/graph)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          std::optional<std::size_t> step;
          if (req.has_param("step")) step = size_param(req, "step", 0);
          send_json(res, graph_view_json(svc.state(req.matches[1]), step));
        }));

  s.Post(R"(/sessions/([A-Za-z0-9_-]+)/navigate)",
         guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           if (!body.contains("step") || !body["step"].is_number_unsigned()) {
             throw InvalidRequest("step must be a non-negative integer");
           }
           const auto st = svc.navigate(req.matches[1], body["step"].get<std::size_t>());
           send_json(res, graph_view_json(st, st.current_step));
         }));

  s.Get(R"(/sessions/([A-Za-z0-9_-]+)/recommendations)",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          const auto recs = svc.recommendations(id, size_param(req, "k", 3));
          json items = json::array();
          for (const auto& r : recs) items.push_back(r);
          send_json(res, {{"items", items}, {"progress", svc.progress(id)}});
        }));

  s.Post(R"(/sessions/([A-Za-z0-9_-]+)/recommendations/([0-9a-f]+)/dismiss)",
         guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const auto st = svc.dismiss(req.matches[1], req.matches[2]);
           send_json(res, {{"dismissed", std::string(req.matches[2])}, {"progress", recommend::progress(st.pool)}});
         }));

  s.Get(R"(/sessions/([A-Za-z0-9_-]+)/progress)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          const auto st = svc.state(req.matches[1]);
          send_json(res, {{"progress", recommend::progress(st.pool)},
                          {"explored", st.pool.explored.size()},
                          {"dismissed", st.pool.dismissed.size()},
                          {"goal", st.pool.goal.size()}});
        }));

  s.Get(R"(/edges/([^/]+)/evidence)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          const kg::KgEdge& e = svc.graph().edge(std::string(req.matches[1]));
          send_json(res, {{"edge", e}, {"evidence", e.evidence}});
        }));
}

}  // namespace kgg::service
