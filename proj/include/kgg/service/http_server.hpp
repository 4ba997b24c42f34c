#pragma once

#include <memory>
#include <string>

#include "kgg/service/service.hpp"

namespace httplib {
class Server;
}

namespace kgg::service {

// REST + SSE front end over a Service.
//
//   POST /sessions                                  {"id"?}           -> {"id"}
//   POST /sessions/{id}/messages                    {"text", "recommendation_id"?} -> text/event-stream
//   GET  /sessions/{id}                                               -> session state
//   GET  /sessions/{id}/graph?step=k                                  -> focus+context view
//   POST /sessions/{id}/navigate                    {"step"}
//   GET  /sessions/{id}/recommendations?k=3
//   POST /sessions/{id}/recommendations/{rid}/dismiss
//   GET  /sessions/{id}/progress
//   GET  /edges/{edge_id}/evidence
//   GET  /healthz
//
// Errors are `{"error": {"code", "message"}}` with a matching HTTP status.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Blocks until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; follow with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void routes();

  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

// HTTP status for an error code.
int status_for(const std::string& code);

// "event: <type>\ndata: <json>\n\n"
std::string format_sse(const StreamEvent& event);

}  // namespace kgg::service
