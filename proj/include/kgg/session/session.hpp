#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kgg/annotate/parser.hpp"
#include "kgg/error.hpp"
#include "kgg/ground/matcher.hpp"
#include "kgg/kg/graph.hpp"
#include "kgg/recommend/pool.hpp"

namespace kgg::session {

// ---- events ---------------------------------------------------------------

struct UserQuery {
  std::string text;
  std::optional<recommend::Query> parsed;  // set when the question came from a recommendation
  bool operator==(const UserQuery&) const = default;
};

struct LlmScope {
  bool in_scope = false;
  bool operator==(const LlmScope&) const = default;
};

struct LlmResponse {
  std::string raw;
  bool operator==(const LlmResponse&) const = default;
};

struct GroundingResult {
  std::vector<ground::GroundedTriple> triples;
  bool operator==(const GroundingResult&) const = default;
};

struct RecommendationShown {
  std::vector<std::string> ids;
  bool operator==(const RecommendationShown&) const = default;
};

struct Dismissal {
  std::string id;
  bool operator==(const Dismissal&) const = default;
};

struct Navigation {
  std::size_t step = 0;
  bool operator==(const Navigation&) const = default;
};

// The pending question could not be answered; closes it as a failed step.
struct Failure {
  std::string code;
  std::string message;
  bool operator==(const Failure&) const = default;
};

using Payload = std::variant<UserQuery, LlmScope, LlmResponse, GroundingResult, RecommendationShown, Dismissal,
                             Navigation, Failure>;

struct SessionEvent {
  std::uint64_t sequence = 0;
  std::int64_t timestamp_ms = 0;
  Payload payload;
  bool operator==(const SessionEvent&) const = default;
};

// ---- state ----------------------------------------------------------------

struct GraphNode {
  std::string id;  // KG node id, or "llm:<normalized surface>" for unmatched entities
  std::string name;
  std::string node_type;  // empty for unmatched entities
  bool in_kg = false;
  std::size_t step = 0;  // step of first introduction
  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  std::string id;  // "<source>|<normalized relation>|<target>"
  std::string source;
  std::string target;
  std::string relation;
  ground::Label label = ground::Label::kUnsure;
  std::size_t evidence_count = 0;
  std::vector<std::string> kg_edges;  // supporting direct KG edges
  std::size_t step = 0;
  bool operator==(const GraphEdge&) const = default;
};

struct CumulativeGraph {
  std::map<std::string, GraphNode> nodes;
  std::map<std::string, GraphEdge> edges;
  bool operator==(const CumulativeGraph&) const = default;
};

struct Step {
  std::size_t index = 0;
  std::string query_text;
  bool in_scope = false;
  std::optional<std::string> failure;
  annotate::AnnotatedResponse response;
  std::vector<ground::GroundedTriple> grounded;
  std::optional<recommend::Query> query;  // what was appended to the context
  std::vector<std::string> added_nodes;
  std::vector<std::string> added_edges;
  bool operator==(const Step&) const = default;
};

struct PendingQuery {
  std::string text;
  std::optional<recommend::Query> parsed;
  std::optional<bool> in_scope;
  std::optional<std::string> raw_response;
  bool operator==(const PendingQuery&) const = default;
};

struct SessionState {
  std::string id;
  std::uint64_t last_sequence = 0;
  std::vector<Step> steps;
  CumulativeGraph graph;
  recommend::RecommendationPool pool;
  bool pool_initialized = false;
  recommend::Context context;
  std::size_t current_step = 0;
  std::optional<PendingQuery> pending;
  std::vector<std::string> last_shown;
  bool operator==(const SessionState&) const = default;
};

struct IdSets {
  std::vector<std::string> nodes;
  std::vector<std::string> edges;
  bool operator==(const IdSets&) const = default;
};

// Focus+context partition of the cumulative graph at step k.
struct StepView {
  std::size_t step = 0;
  IdSets highlighted;  // introduced at k
  IdSets faded;        // introduced before k
  IdSets hidden;       // introduced after k
  bool operator==(const StepView&) const = default;
};

class SequenceGap : public Error {
 public:
  SequenceGap(std::uint64_t expected, std::uint64_t got)
      : Error("SequenceGap",
              "expected event sequence " + std::to_string(expected) + ", got " + std::to_string(got)) {}
};

class InvalidEvent : public Error {
 public:
  explicit InvalidEvent(const std::string& what) : Error("InvalidEvent", what) {}
};

class StepOutOfRange : public Error {
 public:
  StepOutOfRange(std::size_t k, std::size_t n)
      : Error("StepOutOfRange", "step " + std::to_string(k) + " out of range [0, " + std::to_string(n) + ")") {}
};

SessionState new_session(std::string id);

// Pure transition. Throws SequenceGap, InvalidEvent, or the pool's errors
// (UnknownRecommendation, AlreadyExplored) for a bad Dismissal.
SessionState apply_event(SessionState state, const SessionEvent& event, const kg::KnowledgeGraph& graph);

// Folds events 1..n onto a fresh session.
SessionState replay(std::string id, const std::vector<SessionEvent>& events, const kg::KnowledgeGraph& graph);

StepView view_at_step(const SessionState& state, std::size_t k);

// Matched KG nodes of the grounded triples, distinct, in order of appearance.
std::vector<std::string> matched_nodes(const std::vector<ground::GroundedTriple>& triples);

// Matched nodes whose name, alias or surface occurs as a whole word in `question`.
std::vector<std::string> question_entities(const std::string& question,
                                           const std::vector<ground::GroundedTriple>& triples,
                                           const kg::KnowledgeGraph& graph);

// Structured form of a free-text question, inferred from what grounding found.
std::optional<recommend::Query> derive_query(const std::string& question,
                                             const std::vector<ground::GroundedTriple>& triples,
                                             const kg::KnowledgeGraph& graph);

// "s<k>." prefix applied to a step's marker ids.
std::string marker_namespace(std::size_t step);

}  // namespace kgg::session
