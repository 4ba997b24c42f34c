#pragma once

#include <string>

#include "json.hpp"
#include "kgg/session/session.hpp"

// JSON mappings for the domain types that cross process boundaries: session
// snapshots, event logs and HTTP payloads. Objects serialize with sorted keys,
// so equal values always produce identical bytes.

namespace kgg::kg {
void to_json(nlohmann::json& j, const Evidence& e);
void to_json(nlohmann::json& j, const KgNode& n);
void to_json(nlohmann::json& j, const KgEdge& e);
}  // namespace kgg::kg

namespace kgg::annotate {
void to_json(nlohmann::json& j, const TextRange& r);
void from_json(const nlohmann::json& j, TextRange& r);
void to_json(nlohmann::json& j, const EntitySpan& s);
void from_json(const nlohmann::json& j, EntitySpan& s);
void to_json(nlohmann::json& j, const RelationSpan& s);
void from_json(const nlohmann::json& j, RelationSpan& s);
void to_json(nlohmann::json& j, const Triple& t);
void from_json(const nlohmann::json& j, Triple& t);
void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);
void to_json(nlohmann::json& j, const AnnotatedResponse& r);
void from_json(const nlohmann::json& j, AnnotatedResponse& r);
}  // namespace kgg::annotate

namespace kgg::ground {
void to_json(nlohmann::json& j, const EntityMatch& m);
void from_json(const nlohmann::json& j, EntityMatch& m);
void to_json(nlohmann::json& j, const PathRef& p);
void from_json(const nlohmann::json& j, PathRef& p);
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const GroundedTriple& g);
void from_json(const nlohmann::json& j, GroundedTriple& g);
}  // namespace kgg::ground

namespace kgg::recommend {
void to_json(nlohmann::json& j, const Target& t);
void from_json(const nlohmann::json& j, Target& t);
void to_json(nlohmann::json& j, const Query& q);
void from_json(const nlohmann::json& j, Query& q);
void to_json(nlohmann::json& j, const GoalItem& g);
void from_json(const nlohmann::json& j, GoalItem& g);
void to_json(nlohmann::json& j, const RecommendationPool& p);
void from_json(const nlohmann::json& j, RecommendationPool& p);
void to_json(nlohmann::json& j, const Recommendation& r);
}  // namespace kgg::recommend

namespace kgg::session {

inline constexpr int kSchemaVersion = 1;

void to_json(nlohmann::json& j, const GraphNode& n);
void from_json(const nlohmann::json& j, GraphNode& n);
void to_json(nlohmann::json& j, const GraphEdge& e);
void from_json(const nlohmann::json& j, GraphEdge& e);
void to_json(nlohmann::json& j, const Step& s);
void from_json(const nlohmann::json& j, Step& s);
void to_json(nlohmann::json& j, const SessionEvent& e);
void from_json(const nlohmann::json& j, SessionEvent& e);
void to_json(nlohmann::json& j, const SessionState& s);
void from_json(const nlohmann::json& j, SessionState& s);
void to_json(nlohmann::json& j, const StepView& v);

// Versioned snapshot document.
std::string serialize_state(const SessionState& state);
// Throws Error("CorruptRecord") on malformed input or an unknown schema version.
SessionState deserialize_state(const std::string& text);

// One line of the JSON Lines event log (no trailing newline).
std::string serialize_event(const SessionEvent& event);
SessionEvent deserialize_event(const std::string& line);

}  // namespace kgg::session
