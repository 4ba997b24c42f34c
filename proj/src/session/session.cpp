#include "kgg/session/session.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace kgg::session {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Whole-word, case-insensitive containment over normalized text.
bool mentions(const std::string& haystack_norm, const std::string& needle_raw) {
  const std::string needle = ground::normalize_text(needle_raw);
  if (needle.empty()) return false;
  std::size_t pos = haystack_norm.find(needle);
  while (pos != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(haystack_norm[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == haystack_norm.size() || !is_word_char(haystack_norm[end]);
    if (left_ok && right_ok) return true;
    pos = haystack_norm.find(needle, pos + 1);
  }
  return false;
}

std::string display_node_id(const ground::EntityMatch& m) {
  return m.node ? *m.node : "llm:" + ground::normalize_text(m.surface);
}

void namespace_response(annotate::AnnotatedResponse& r, const std::string& ns) {
  for (auto& e : r.entities) e.marker_id = ns + e.marker_id;
  for (auto& rel : r.relations) {
    rel.marker_id = ns + rel.marker_id;
    rel.subject_ref = ns + rel.subject_ref;
    rel.object_ref = ns + rel.object_ref;
  }
  for (auto& t : r.triples) {
    t.subject_id = ns + t.subject_id;
    t.relation_id = ns + t.relation_id;
    t.object_id = ns + t.object_id;
  }
}

void validate_query(const recommend::Query& q, const kg::KnowledgeGraph& graph) {
  if (q.focus.empty()) throw InvalidEvent("parsed query has an empty focus");
  for (const auto& f : q.focus) {
    if (!graph.has_node(f)) throw InvalidEvent("parsed query references unknown node " + f);
  }
  if (q.target.kind == recommend::Target::Kind::kNode && !graph.has_node(q.target.value)) {
    throw InvalidEvent("parsed query targets unknown node " + q.target.value);
  }
}

Step& append_step(SessionState& state, PendingQuery pending) {
  Step step;
  step.index = state.steps.size();
  step.query_text = std::move(pending.text);
  state.steps.push_back(std::move(step));
  state.current_step = state.steps.back().index;
  return state.steps.back();
}

void add_grounding_to_graph(SessionState& state, Step& step, const kg::KnowledgeGraph& graph) {
  auto add_node = [&](const ground::EntityMatch& m) {
    const std::string id = display_node_id(m);
    if (state.graph.nodes.contains(id)) return id;
    GraphNode node;
    node.id = id;
    node.step = step.index;
    if (const kg::KgNode* kg_node = m.node ? graph.find_node(*m.node) : nullptr) {
      node.name = kg_node->name;
      node.node_type = kg_node->node_type;
      node.in_kg = true;
    } else {
      node.name = m.surface;
    }
    state.graph.nodes.emplace(id, node);
    step.added_nodes.push_back(id);
    return id;
  };

  for (const auto& g : step.grounded) {
    const std::string s = add_node(g.subject_match);
    const std::string o = add_node(g.object_match);
    const std::string id = s + "|" + ground::normalize_text(g.triple.relation_surface) + "|" + o;
    if (state.graph.edges.contains(id)) continue;
    GraphEdge edge;
    edge.id = id;
    edge.source = s;
    edge.target = o;
    edge.relation = g.triple.relation_surface;
    edge.label = g.verdict.label;
    edge.evidence_count = g.verdict.evidence_count;
    edge.kg_edges = g.verdict.direct_edges;
    edge.step = step.index;
    state.graph.edges.emplace(id, std::move(edge));
    step.added_edges.push_back(id);
  }
}

void update_pool_and_context(SessionState& state, Step& step, const std::optional<recommend::Query>& parsed,
                             const kg::KnowledgeGraph& graph) {
  const auto matched = matched_nodes(step.grounded);
  std::optional<recommend::Query> query = parsed ? parsed : derive_query(step.query_text, step.grounded, graph);

  if (!state.pool_initialized) {
    std::vector<std::string> initial;
    if (parsed) initial = parsed->focus;
    for (const auto& m : matched) {
      if (std::find(initial.begin(), initial.end(), m) == initial.end()) initial.push_back(m);
    }
    if (!initial.empty()) {
      state.pool = recommend::init_pool(initial, graph);
      state.pool_initialized = true;
    }
  } else if (!parsed) {
    std::vector<std::string> fresh;
    for (const auto& e : question_entities(step.query_text, step.grounded, graph)) {
      if (!state.pool.frontier.contains(e)) fresh.push_back(e);
    }
    if (!fresh.empty()) state.pool = recommend::expand(std::move(state.pool), fresh, graph);
  }

  if (query) {
    state.pool = recommend::record_explored(std::move(state.pool), *query);
    state.context.append(*query);
    step.query = std::move(query);
  }
}

}  // namespace

std::string marker_namespace(std::size_t step) { return "s" + std::to_string(step) + "."; }

SessionState new_session(std::string id) {
  SessionState s;
  s.id = std::move(id);
  return s;
}

std::vector<std::string> matched_nodes(const std::vector<ground::GroundedTriple>& triples) {
  std::vector<std::string> out;
  auto add = [&](const ground::EntityMatch& m) {
    if (m.node && std::find(out.begin(), out.end(), *m.node) == out.end()) out.push_back(*m.node);
  };
  for (const auto& t : triples) {
    add(t.subject_match);
    add(t.object_match);
  }
  return out;
}

std::vector<std::string> question_entities(const std::string& question,
                                           const std::vector<ground::GroundedTriple>& triples,
                                           const kg::KnowledgeGraph& graph) {
  const std::string q = ground::normalize_text(question);
  std::vector<std::string> out;
  auto consider = [&](const ground::EntityMatch& m) {
    if (!m.node || std::find(out.begin(), out.end(), *m.node) != out.end()) return;
    const kg::KgNode* node = graph.find_node(*m.node);
    bool hit = mentions(q, m.surface);
    if (node) {
      hit = hit || mentions(q, node->name);
      for (const auto& a : node->aliases) hit = hit || mentions(q, a);
    }
    if (hit) out.push_back(*m.node);
  };
  for (const auto& t : triples) {
    consider(t.subject_match);
    consider(t.object_match);
  }
  return out;
}

std::optional<recommend::Query> derive_query(const std::string& question,
                                             const std::vector<ground::GroundedTriple>& triples,
                                             const kg::KnowledgeGraph& graph) {
  const auto matched = matched_nodes(triples);
  if (matched.empty()) return std::nullopt;
  const auto asked = question_entities(question, triples, graph);
  std::vector<std::string> others;
  for (const auto& m : matched) {
    if (std::find(asked.begin(), asked.end(), m) == asked.end()) others.push_back(m);
  }

  recommend::Query q;
  q.focus = asked;
  q.focus.insert(q.focus.end(), others.begin(), others.end());
  if (others.size() >= 2) {
    const std::string& type = graph.node(others.front()).node_type;
    const bool same_type = std::all_of(others.begin(), others.end(),
                                       [&](const std::string& id) { return graph.node(id).node_type == type; });
    q.target = same_type ? recommend::Target::type(type) : recommend::Target::node(others.front());
  } else if (others.size() == 1) {
    q.target = recommend::Target::node(others.front());
  } else if (matched.size() >= 2) {
    q.focus.pop_back();
    q.target = recommend::Target::node(matched.back());
  } else {
    q.target = recommend::Target::type(graph.node(matched.front()).node_type);
  }
  return q;
}

SessionState apply_event(SessionState state, const SessionEvent& event, const kg::KnowledgeGraph& graph) {
  if (event.sequence != state.last_sequence + 1) throw SequenceGap(state.last_sequence + 1, event.sequence);

  std::visit(
      Overloaded{
          [&](const UserQuery& e) {
            if (e.text.empty()) throw InvalidEvent("empty user query");
            if (e.parsed) validate_query(*e.parsed, graph);
            state.pending = PendingQuery{e.text, e.parsed, std::nullopt, std::nullopt};
          },
          [&](const LlmScope& e) {
            if (!state.pending) throw InvalidEvent("scope verdict without a pending query");
            state.pending->in_scope = e.in_scope;
          },
          [&](const LlmResponse& e) {
            if (!state.pending || !state.pending->in_scope) throw InvalidEvent("response before scope verdict");
            if (*state.pending->in_scope) {
              state.pending->raw_response = e.raw;
              return;
            }
            // Out of scope: plain chat, no grounding, no pool change.
            Step& step = append_step(state, std::move(*state.pending));
            step.in_scope = false;
            step.response.plain_text = e.raw;
            state.pending.reset();
          },
          [&](const GroundingResult& e) {
            if (!state.pending || !state.pending->raw_response) {
              throw InvalidEvent("grounding result without an annotated response");
            }
            const auto parsed_query = state.pending->parsed;
            const std::string raw = *state.pending->raw_response;
            Step& step = append_step(state, std::move(*state.pending));
            state.pending.reset();
            step.in_scope = true;
            const std::string ns = marker_namespace(step.index);
            step.response = annotate::parse(raw);
            namespace_response(step.response, ns);
            step.grounded = e.triples;
            for (auto& g : step.grounded) {
              g.triple.subject_id = ns + g.triple.subject_id;
              g.triple.relation_id = ns + g.triple.relation_id;
              g.triple.object_id = ns + g.triple.object_id;
            }
            add_grounding_to_graph(state, step, graph);
            update_pool_and_context(state, step, parsed_query, graph);
          },
          [&](const RecommendationShown& e) { state.last_shown = e.ids; },
          [&](const Dismissal& e) { state.pool = recommend::dismiss(std::move(state.pool), e.id); },
          [&](const Navigation& e) {
            if (e.step >= state.steps.size()) throw StepOutOfRange(e.step, state.steps.size());
            state.current_step = e.step;
          },
          [&](const Failure& e) {
            if (!state.pending) return;
            Step& step = append_step(state, std::move(*state.pending));
            state.pending.reset();
            step.failure = e.code + ": " + e.message;
          },
      },
      event.payload);

  state.last_sequence = event.sequence;
  return state;
}

SessionState replay(std::string id, const std::vector<SessionEvent>& events, const kg::KnowledgeGraph& graph) {
  SessionState state = new_session(std::move(id));
  for (const auto& e : events) state = apply_event(std::move(state), e, graph);
  return state;
}

StepView view_at_step(const SessionState& state, std::size_t k) {
  if (k >= state.steps.size()) throw StepOutOfRange(k, state.steps.size());
  StepView view;
  view.step = k;
  auto bucket = [&](std::size_t step) -> IdSets& {
    if (step == k) return view.highlighted;
    return step < k ? view.faded : view.hidden;
  };
  for (const auto& [id, node] : state.graph.nodes) bucket(node.step).nodes.push_back(id);
  for (const auto& [id, edge] : state.graph.edges) bucket(edge.step).edges.push_back(id);
  return view;
}

}  // namespace kgg::session
