#include "kgg/session/serialize.hpp"

using nlohmann::json;

namespace {

template <class T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

namespace kgg::kg {

void to_json(json& j, const Evidence& e) {
  j = json{{"source_id", e.source_id}, {"title", e.title}, {"year", optional_to_json(e.year)}};
}

void to_json(json& j, const KgNode& n) {
  j = json{{"id", n.id}, {"name", n.name}, {"type", n.node_type}, {"aliases", n.aliases}};
}

void to_json(json& j, const KgEdge& e) {
  j = json{{"id", e.id},
           {"source", e.source},
           {"target", e.target},
           {"relation", e.relation},
           {"evidence", e.evidence}};
}

}  // namespace kgg::kg

namespace kgg::annotate {

namespace {

DiagnosticKind diagnostic_kind_from_string(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(DiagnosticKind::kUnresolvedEntityRef); ++k) {
    const auto kind = static_cast<DiagnosticKind>(k);
    if (to_string(kind) == s) return kind;
  }
  throw Error("CorruptRecord", "unknown diagnostic kind " + s);
}

}  // namespace

void to_json(json& j, const TextRange& r) { j = json{{"begin", r.begin}, {"end", r.end}}; }
void from_json(const json& j, TextRange& r) {
  j.at("begin").get_to(r.begin);
  j.at("end").get_to(r.end);
}

void to_json(json& j, const EntitySpan& s) {
  j = json{{"marker_id", s.marker_id}, {"surface", s.surface}, {"range", s.range}};
}
void from_json(const json& j, EntitySpan& s) {
  j.at("marker_id").get_to(s.marker_id);
  j.at("surface").get_to(s.surface);
  j.at("range").get_to(s.range);
}

void to_json(json& j, const RelationSpan& s) {
  j = json{{"marker_id", s.marker_id},   {"surface", s.surface}, {"subject_ref", s.subject_ref},
           {"object_ref", s.object_ref}, {"range", s.range}};
}
void from_json(const json& j, RelationSpan& s) {
  j.at("marker_id").get_to(s.marker_id);
  j.at("surface").get_to(s.surface);
  j.at("subject_ref").get_to(s.subject_ref);
  j.at("object_ref").get_to(s.object_ref);
  j.at("range").get_to(s.range);
}

void to_json(json& j, const Triple& t) {
  j = json{{"subject", t.subject_surface}, {"relation", t.relation_surface}, {"object", t.object_surface},
           {"subject_id", t.subject_id},   {"relation_id", t.relation_id},    {"object_id", t.object_id}};
}
void from_json(const json& j, Triple& t) {
  j.at("subject").get_to(t.subject_surface);
  j.at("relation").get_to(t.relation_surface);
  j.at("object").get_to(t.object_surface);
  j.at("subject_id").get_to(t.subject_id);
  j.at("relation_id").get_to(t.relation_id);
  j.at("object_id").get_to(t.object_id);
}

void to_json(json& j, const Diagnostic& d) {
  j = json{{"kind", to_string(d.kind)}, {"detail", d.detail}, {"raw_offset", d.raw_offset}};
}
void from_json(const json& j, Diagnostic& d) {
  d.kind = diagnostic_kind_from_string(j.at("kind").get<std::string>());
  j.at("detail").get_to(d.detail);
  j.at("raw_offset").get_to(d.raw_offset);
}

void to_json(json& j, const AnnotatedResponse& r) {
  j = json{{"plain_text", r.plain_text},
           {"entities", r.entities},
           {"relations", r.relations},
           {"triples", r.triples},
           {"diagnostics", r.diagnostics}};
}
void from_json(const json& j, AnnotatedResponse& r) {
  j.at("plain_text").get_to(r.plain_text);
  j.at("entities").get_to(r.entities);
  j.at("relations").get_to(r.relations);
  j.at("triples").get_to(r.triples);
  j.at("diagnostics").get_to(r.diagnostics);
}

}  // namespace kgg::annotate

namespace kgg::ground {

namespace {

kg::Orientation orientation_from_string(const std::string& s) {
  if (s == "forward") return kg::Orientation::kForward;
  if (s == "reverse") return kg::Orientation::kReverse;
  throw Error("CorruptRecord", "unknown orientation " + s);
}

}  // namespace

void to_json(json& j, const EntityMatch& m) {
  j = json{{"surface", m.surface}, {"node", optional_to_json(m.node)}, {"similarity", m.similarity}};
}
void from_json(const json& j, EntityMatch& m) {
  j.at("surface").get_to(m.surface);
  m.node = optional_from_json<std::string>(j, "node");
  j.at("similarity").get_to(m.similarity);
}

void to_json(json& j, const PathRef& p) {
  j = json{{"first_edge", p.first_edge},
           {"first_orientation", kg::to_string(p.first_orientation)},
           {"mid", p.mid},
           {"second_edge", p.second_edge},
           {"second_orientation", kg::to_string(p.second_orientation)}};
}
void from_json(const json& j, PathRef& p) {
  j.at("first_edge").get_to(p.first_edge);
  p.first_orientation = orientation_from_string(j.at("first_orientation").get<std::string>());
  j.at("mid").get_to(p.mid);
  j.at("second_edge").get_to(p.second_edge);
  p.second_orientation = orientation_from_string(j.at("second_orientation").get<std::string>());
}

void to_json(json& j, const Verdict& v) {
  j = json{{"label", to_string(v.label)},
           {"direct_edges", v.direct_edges},
           {"two_hop", v.two_hop},
           {"evidence_count", v.evidence_count},
           {"best_relation_similarity", optional_to_json(v.best_relation_similarity)}};
}
void from_json(const json& j, Verdict& v) {
  v.label = label_from_string(j.at("label").get<std::string>());
  j.at("direct_edges").get_to(v.direct_edges);
  j.at("two_hop").get_to(v.two_hop);
  j.at("evidence_count").get_to(v.evidence_count);
  v.best_relation_similarity = optional_from_json<double>(j, "best_relation_similarity");
}

void to_json(json& j, const GroundedTriple& g) {
  j = json{{"triple", g.triple},
           {"subject_match", g.subject_match},
           {"object_match", g.object_match},
           {"verdict", g.verdict}};
}
void from_json(const json& j, GroundedTriple& g) {
  j.at("triple").get_to(g.triple);
  j.at("subject_match").get_to(g.subject_match);
  j.at("object_match").get_to(g.object_match);
  j.at("verdict").get_to(g.verdict);
}

}  // namespace kgg::ground

namespace kgg::recommend {

void to_json(json& j, const Target& t) {
  j = json{{"kind", t.kind == Target::Kind::kNode ? "node" : "type"}, {"value", t.value}};
}
void from_json(const json& j, Target& t) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "node") {
    t.kind = Target::Kind::kNode;
  } else if (kind == "type") {
    t.kind = Target::Kind::kType;
  } else {
    throw Error("CorruptRecord", "unknown target kind " + kind);
  }
  j.at("value").get_to(t.value);
}

void to_json(json& j, const Query& q) { j = json{{"focus", q.focus}, {"target", q.target}}; }
void from_json(const json& j, Query& q) {
  j.at("focus").get_to(q.focus);
  j.at("target").get_to(q.target);
}

void to_json(json& j, const GoalItem& g) { j = json{{"source", g.source}, {"target", g.target}}; }
void from_json(const json& j, GoalItem& g) {
  j.at("source").get_to(g.source);
  j.at("target").get_to(g.target);
}

void to_json(json& j, const RecommendationPool& p) {
  j = json{{"goal", p.goal}, {"dismissed", p.dismissed}, {"explored", p.explored}, {"frontier", p.frontier}};
}
void from_json(const json& j, RecommendationPool& p) {
  j.at("goal").get_to(p.goal);
  j.at("dismissed").get_to(p.dismissed);
  j.at("explored").get_to(p.explored);
  j.at("frontier").get_to(p.frontier);
}

void to_json(json& j, const Recommendation& r) {
  j = json{{"id", r.id}, {"source", r.source}, {"target", r.target}, {"question", r.question}, {"score", r.score}};
}

}  // namespace kgg::recommend

namespace kgg::session {

namespace {

json payload_to_json(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UserQuery>) {
          return {{"kind", "UserQuery"}, {"text", p.text}, {"parsed", optional_to_json(p.parsed)}};
        } else if constexpr (std::is_same_v<T, LlmScope>) {
          return {{"kind", "LlmScope"}, {"in_scope", p.in_scope}};
        } else if constexpr (std::is_same_v<T, LlmResponse>) {
          return {{"kind", "LlmResponse"}, {"raw", p.raw}};
        } else if constexpr (std::is_same_v<T, GroundingResult>) {
          return {{"kind", "GroundingResult"}, {"triples", p.triples}};
        } else if constexpr (std::is_same_v<T, RecommendationShown>) {
          return {{"kind", "RecommendationShown"}, {"ids", p.ids}};
        } else if constexpr (std::is_same_v<T, Dismissal>) {
          return {{"kind", "Dismissal"}, {"id", p.id}};
        } else if constexpr (std::is_same_v<T, Navigation>) {
          return {{"kind", "Navigation"}, {"step", p.step}};
        } else {
          return {{"kind", "Failure"}, {"code", p.code}, {"message", p.message}};
        }
      },
      payload);
}

Payload payload_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "UserQuery") return UserQuery{j.at("text").get<std::string>(), optional_from_json<recommend::Query>(j, "parsed")};
  if (kind == "LlmScope") return LlmScope{j.at("in_scope").get<bool>()};
  if (kind == "LlmResponse") return LlmResponse{j.at("raw").get<std::string>()};
  if (kind == "GroundingResult") return GroundingResult{j.at("triples").get<std::vector<ground::GroundedTriple>>()};
  if (kind == "RecommendationShown") return RecommendationShown{j.at("ids").get<std::vector<std::string>>()};
  if (kind == "Dismissal") return Dismissal{j.at("id").get<std::string>()};
  if (kind == "Navigation") return Navigation{j.at("step").get<std::size_t>()};
  if (kind == "Failure") return Failure{j.at("code").get<std::string>(), j.at("message").get<std::string>()};
  throw Error("CorruptRecord", "unknown event kind " + kind);
}

}  // namespace

void to_json(json& j, const GraphNode& n) {
  j = json{{"id", n.id}, {"name", n.name}, {"type", n.node_type}, {"in_kg", n.in_kg}, {"step", n.step}};
}
void from_json(const json& j, GraphNode& n) {
  j.at("id").get_to(n.id);
  j.at("name").get_to(n.name);
  j.at("type").get_to(n.node_type);
  j.at("in_kg").get_to(n.in_kg);
  j.at("step").get_to(n.step);
}

void to_json(json& j, const GraphEdge& e) {
  j = json{{"id", e.id},
           {"source", e.source},
           {"target", e.target},
           {"relation", e.relation},
           {"label", ground::to_string(e.label)},
           {"evidence_count", e.evidence_count},
           {"kg_edges", e.kg_edges},
           {"step", e.step}};
}
void from_json(const json& j, GraphEdge& e) {
  j.at("id").get_to(e.id);
  j.at("source").get_to(e.source);
  j.at("target").get_to(e.target);
  j.at("relation").get_to(e.relation);
  e.label = ground::label_from_string(j.at("label").get<std::string>());
  j.at("evidence_count").get_to(e.evidence_count);
  j.at("kg_edges").get_to(e.kg_edges);
  j.at("step").get_to(e.step);
}

void to_json(json& j, const Step& s) {
  j = json{{"index", s.index},
           {"query_text", s.query_text},
           {"in_scope", s.in_scope},
           {"failure", optional_to_json(s.failure)},
           {"response", s.response},
           {"grounded", s.grounded},
           {"query", optional_to_json(s.query)},
           {"added_nodes", s.added_nodes},
           {"added_edges", s.added_edges}};
}
void from_json(const json& j, Step& s) {
  j.at("index").get_to(s.index);
  j.at("query_text").get_to(s.query_text);
  j.at("in_scope").get_to(s.in_scope);
  s.failure = optional_from_json<std::string>(j, "failure");
  j.at("response").get_to(s.response);
  j.at("grounded").get_to(s.grounded);
  s.query = optional_from_json<recommend::Query>(j, "query");
  j.at("added_nodes").get_to(s.added_nodes);
  j.at("added_edges").get_to(s.added_edges);
}

void to_json(json& j, const PendingQuery& p) {
  j = json{{"text", p.text},
           {"parsed", optional_to_json(p.parsed)},
           {"in_scope", optional_to_json(p.in_scope)},
           {"raw_response", optional_to_json(p.raw_response)}};
}
void from_json(const json& j, PendingQuery& p) {
  j.at("text").get_to(p.text);
  p.parsed = optional_from_json<recommend::Query>(j, "parsed");
  p.in_scope = optional_from_json<bool>(j, "in_scope");
  p.raw_response = optional_from_json<std::string>(j, "raw_response");
}

void to_json(json& j, const IdSets& s) { j = json{{"nodes", s.nodes}, {"edges", s.edges}}; }

void to_json(json& j, const SessionEvent& e) {
  j = json{{"sequence", e.sequence}, {"timestamp_ms", e.timestamp_ms}, {"payload", payload_to_json(e.payload)}};
}
void from_json(const json& j, SessionEvent& e) {
  j.at("sequence").get_to(e.sequence);
  j.at("timestamp_ms").get_to(e.timestamp_ms);
  e.payload = payload_from_json(j.at("payload"));
}

void to_json(json& j, const SessionState& s) {
  json nodes = json::array();
  for (const auto& [_, n] : s.graph.nodes) nodes.push_back(n);
  json edges = json::array();
  for (const auto& [_, e] : s.graph.edges) edges.push_back(e);
  j = json{{"id", s.id},
           {"last_sequence", s.last_sequence},
           {"steps", s.steps},
           {"graph", {{"nodes", nodes}, {"edges", edges}}},
           {"pool", s.pool},
           {"pool_initialized", s.pool_initialized},
           {"context", s.context.queries},
           {"current_step", s.current_step},
           {"pending", optional_to_json(s.pending)},
           {"last_shown", s.last_shown}};
}

void from_json(const json& j, SessionState& s) {
  j.at("id").get_to(s.id);
  j.at("last_sequence").get_to(s.last_sequence);
  j.at("steps").get_to(s.steps);
  s.graph = {};
  for (const auto& n : j.at("graph").at("nodes")) {
    auto node = n.get<GraphNode>();
    s.graph.nodes.emplace(node.id, std::move(node));
  }
  for (const auto& e : j.at("graph").at("edges")) {
    auto edge = e.get<GraphEdge>();
    s.graph.edges.emplace(edge.id, std::move(edge));
  }
  j.at("pool").get_to(s.pool);
  j.at("pool_initialized").get_to(s.pool_initialized);
  j.at("context").get_to(s.context.queries);
  j.at("current_step").get_to(s.current_step);
  s.pending = optional_from_json<PendingQuery>(j, "pending");
  j.at("last_shown").get_to(s.last_shown);
}

void to_json(json& j, const StepView& v) {
  j = json{{"step", v.step}, {"highlighted", v.highlighted}, {"faded", v.faded}, {"hidden", v.hidden}};
}

std::string serialize_state(const SessionState& state) {
  json doc{{"schema_version", kSchemaVersion}, {"session", state}};
  return doc.dump();
}

SessionState deserialize_state(const std::string& text) {
  try {
    const auto doc = json::parse(text);
    const int version = doc.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error("CorruptRecord", "unsupported schema_version " + std::to_string(version));
    }
    return doc.at("session").get<SessionState>();
  } catch (const json::exception& e) {
    throw Error("CorruptRecord", std::string("malformed session snapshot: ") + e.what());
  }
}

std::string serialize_event(const SessionEvent& event) { return json(event).dump(); }

SessionEvent deserialize_event(const std::string& line) {
  try {
    return json::parse(line).get<SessionEvent>();
  } catch (const json::exception& e) {
    throw Error("CorruptRecord", std::string("malformed event: ") + e.what());
  }
}

}  // namespace kgg::session
