#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgg/ground/matcher.hpp"
#include "kgg/kg/graph.hpp"
#include "kgg/llm/gateway.hpp"
#include "kgg/recommend/pool.hpp"
#include "kgg/service/config.hpp"
#include "kgg/session/session.hpp"
#include "kgg/session/store.hpp"

namespace kgg::service {

class InvalidRequest : public Error {
 public:
  explicit InvalidRequest(const std::string& what) : Error("InvalidRequest", what) {}
};

// One server-sent event of a message turn: query, scope, text, entity,
// relation, triple, recommendations, progress, error, done.
struct StreamEvent {
  std::string type;
  nlohmann::json data;
};

using StreamSink = std::function<void(const StreamEvent&)>;
using Clock = std::function<std::int64_t()>;

// Milliseconds since the Unix epoch.
std::int64_t system_clock_ms();

struct ServiceParts {
  std::shared_ptr<const kg::KnowledgeGraph> graph;
  std::shared_ptr<ground::EmbeddingCache> cache;
  std::shared_ptr<llm::Gateway> gateway;
  std::shared_ptr<session::SessionStore> store;
  ground::MatcherConfig matcher;
  std::size_t recommendations_shown = 10;
  std::string kg_blurb;
  Clock clock = system_clock_ms;
  ground::ScanKernel kernel = ground::ScanKernel::kParallel;
};

struct MessageRequest {
  std::string text;  // may be empty when a recommendation id is given
  std::optional<std::string> recommendation_id;
};

// Orchestrates one exploration session per id: scope check, annotated
// answer, grounding, recommendation. Every state change is an event that is
// appended to the session log before the next one is produced.
class Service {
 public:
  explicit Service(ServiceParts parts);

  // Builds graph, embedding provider, gateway and store from a config.
  // `transport` overrides the HTTP chat transport for live and record modes.
  static std::unique_ptr<Service> from_config(const ServiceConfig& cfg,
                                              std::shared_ptr<llm::ChatTransport> transport = nullptr,
                                              Clock clock = system_clock_ms);

  // Throws InvalidRequest for a malformed id, Error("SessionExists").
  std::string create_session(std::optional<std::string> id = std::nullopt);

  // Runs one turn. Errors after the query was recorded are reported through
  // the sink (error + done) and recorded as a Failure event; errors before
  // that (unknown session, unknown recommendation) throw.
  void handle_message(const std::string& session_id, const MessageRequest& request, const StreamSink& sink);

  session::SessionState state(const std::string& session_id);
  std::vector<recommend::Recommendation> recommendations(const std::string& session_id, std::size_t k);
  session::SessionState dismiss(const std::string& session_id, const std::string& rec_id);
  session::SessionState navigate(const std::string& session_id, std::size_t step);
  double progress(const std::string& session_id);

  // One-off grounding of a triple given by surfaces, outside any session.
  ground::GroundedTriple verify(const std::string& subject, const std::string& relation, const std::string& object);

  const kg::KnowledgeGraph& graph() const { return *parts_.graph; }
  const ground::NodeIndex& index() const { return index_; }
  const llm::KgSummary& kg_summary() const { return summary_; }
  std::vector<std::string> warnings() const;

 private:
  struct Slot {
    std::mutex mutex;
    std::optional<session::SessionState> state;
  };

  std::shared_ptr<Slot> slot(const std::string& session_id);
  session::SessionState& loaded(Slot& s, const std::string& session_id);
  void record(session::SessionState& state, session::Payload payload);
  void run_turn(session::SessionState& state, const std::string& text, std::optional<recommend::Query> parsed,
                const StreamSink& sink);

  ServiceParts parts_;
  ground::NodeIndex index_;
  llm::KgSummary summary_;
  std::mutex slots_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  mutable std::mutex warnings_mutex_;
  std::vector<std::string> warnings_;
};

// Deterministic digest of earlier questions, fed to the annotation prompt.
std::string history_summary(const session::SessionState& state);

}  // namespace kgg::service
