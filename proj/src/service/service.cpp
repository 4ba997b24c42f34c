#include "kgg/service/service.hpp"

#include <chrono>
#include <cstdio>
#include <random>

#include "kgg/annotate/parser.hpp"
#include "kgg/session/serialize.hpp"

namespace kgg::service {

namespace {

nlohmann::json recommendations_json(const std::vector<recommend::Recommendation>& recs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : recs) out.push_back(r);
  return out;
}

std::string random_session_id() {
  std::random_device rd;
  std::mt19937_64 rng((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

const recommend::GoalItem& find_item(const recommend::RecommendationPool& pool, const std::string& rec_id) {
  for (const auto& item : pool.goal) {
    if (recommend::recommendation_id(item) == rec_id) {
      if (pool.explored.contains(item)) throw recommend::AlreadyExplored(rec_id);
      return item;
    }
  }
  throw recommend::UnknownRecommendation(rec_id);
}

}  // namespace

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string history_summary(const session::SessionState& state) {
  constexpr std::size_t kMaxTurns = 5;
  if (state.steps.empty()) return "none";
  std::string out;
  const std::size_t first = state.steps.size() > kMaxTurns ? state.steps.size() - kMaxTurns : 0;
  for (std::size_t i = first; i < state.steps.size(); ++i) {
    if (!out.empty()) out += " ";
    out += "Q" + std::to_string(i + 1) + ": " + state.steps[i].query_text;
  }
  return out;
}

Service::Service(ServiceParts parts) : parts_(std::move(parts)) {
  parts_.matcher.validate();
  if (!parts_.graph || !parts_.cache || !parts_.gateway || !parts_.store) {
    throw Error("ConfigError", "service is missing a component");
  }
  if (!parts_.clock) parts_.clock = system_clock_ms;
  index_ = ground::NodeIndex::build(*parts_.graph, *parts_.cache);
  summary_.types = parts_.graph->node_types();
  summary_.blurb = parts_.kg_blurb;
}

std::unique_ptr<Service> Service::from_config(const ServiceConfig& cfg, std::shared_ptr<llm::ChatTransport> transport,
                                              Clock clock) {
  cfg.validate();
  ServiceParts parts;
  parts.graph = std::make_shared<kg::KnowledgeGraph>(kg::load_graph(cfg.kg_path));

  std::shared_ptr<ground::EmbeddingProvider> provider;
  if (cfg.embeddings.provider == "fixture") {
    provider = ground::FixtureProvider::from_file(cfg.embeddings.fixture_path);
  } else {
    provider = std::make_shared<ground::RemoteProvider>(cfg.embeddings.remote);
  }
  parts.cache = std::make_shared<ground::EmbeddingCache>(provider);
  if (!cfg.embeddings.cache_path.empty()) parts.cache->load(cfg.embeddings.cache_path);

  parts.gateway = std::make_shared<llm::Gateway>(cfg.gateway, std::move(transport));
  parts.store = std::make_shared<session::SessionStore>(std::make_shared<session::FileStore>(cfg.store_dir));
  parts.matcher = cfg.matcher;
  parts.recommendations_shown = cfg.recommendations_shown;
  parts.kg_blurb = cfg.kg_blurb;
  parts.clock = std::move(clock);

  auto service = std::make_unique<Service>(std::move(parts));
  if (!cfg.embeddings.cache_path.empty()) service->parts_.cache->save(cfg.embeddings.cache_path);
  return service;
}

std::vector<std::string> Service::warnings() const {
  std::lock_guard lock(warnings_mutex_);
  return warnings_;
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& session_id) {
  if (!session::SessionStore::valid_id(session_id)) throw session::UnknownSession(session_id);
  std::lock_guard lock(slots_mutex_);
  auto& s = slots_[session_id];
  if (!s) s = std::make_shared<Slot>();
  return s;
}

session::SessionState& Service::loaded(Slot& s, const std::string& session_id) {
  if (!s.state) {
    if (!parts_.store->exists(session_id)) throw session::UnknownSession(session_id);
    auto result = parts_.store->load(session_id, *parts_.graph);
    if (!result.warnings.empty()) {
      std::lock_guard lock(warnings_mutex_);
      for (auto& w : result.warnings) warnings_.push_back(session_id + ": " + w);
    }
    s.state = std::move(result.state);
  }
  return *s.state;
}

void Service::record(session::SessionState& state, session::Payload payload) {
  session::SessionEvent event{state.last_sequence + 1, parts_.clock(), std::move(payload)};
  session::SessionState next = session::apply_event(state, event, *parts_.graph);
  parts_.store->append_event(state.id, event);
  state = std::move(next);
}

std::string Service::create_session(std::optional<std::string> id) {
  std::string sid = id ? *id : random_session_id();
  if (!session::SessionStore::valid_id(sid)) throw InvalidRequest("invalid session id " + sid);
  auto s = slot(sid);
  std::lock_guard lock(s->mutex);
  auto state = session::new_session(sid);
  parts_.store->create(state);
  s->state = std::move(state);
  return sid;
}

void Service::run_turn(session::SessionState& state, const std::string& text, std::optional<recommend::Query> parsed,
                       const StreamSink& sink) {
  const std::string history = history_summary(state);
  record(state, session::UserQuery{text, parsed});
  sink({"query", {{"text", text}, {"step", state.steps.size()}}});

  const llm::ScopeVerdict scope = parts_.gateway->check_scope(text, summary_);
  record(state, session::LlmScope{scope.in_scope});
  nlohmann::json scope_json{{"in_scope", scope.in_scope}};
  if (scope.diagnostic) scope_json["diagnostic"] = *scope.diagnostic;
  sink({"scope", scope_json});

  std::string raw;
  if (!scope.in_scope) {
    parts_.gateway->chat_answer(text, history, [&](std::string_view chunk) {
      raw.append(chunk);
      sink({"text", {{"delta", std::string(chunk)}}});
    });
    record(state, session::LlmResponse{raw});
    return;
  }

  const std::string ns = session::marker_namespace(state.steps.size());
  annotate::AnnotationStream stream;
  parts_.gateway->annotated_answer(text, history, summary_, [&](std::string_view chunk) {
    raw.append(chunk);
    const auto out = stream.feed(chunk);
    if (!out.plain_text.empty()) sink({"text", {{"delta", out.plain_text}}});
    for (auto e : out.entities) {
      e.marker_id = ns + e.marker_id;
      sink({"entity", e});
    }
    for (auto r : out.relations) {
      r.marker_id = ns + r.marker_id;
      r.subject_ref = ns + r.subject_ref;
      r.object_ref = ns + r.object_ref;
      sink({"relation", r});
    }
  });
  const annotate::AnnotatedResponse response = stream.finalize();
  record(state, session::LlmResponse{raw});

  auto grounded = ground::ground_triples(response.triples, *parts_.graph, index_, parts_.matcher, *parts_.cache);
  record(state, session::GroundingResult{grounded});
  for (const auto& g : state.steps.back().grounded) sink({"triple", g});

  const auto recs = recommend::generate(state.context, state.pool, *parts_.graph, parts_.recommendations_shown);
  std::vector<std::string> ids;
  for (const auto& r : recs) ids.push_back(r.id);
  record(state, session::RecommendationShown{ids});
  sink({"recommendations", {{"items", recommendations_json(recs)}}});
  sink({"progress", {{"value", recommend::progress(state.pool)}}});
}

void Service::handle_message(const std::string& session_id, const MessageRequest& request, const StreamSink& sink) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  session::SessionState& state = loaded(*s, session_id);

  std::string text = request.text;
  std::optional<recommend::Query> parsed;
  if (request.recommendation_id) {
    const recommend::GoalItem& item = find_item(state.pool, *request.recommendation_id);
    parsed = recommend::Query{{item.source}, item.target};
    if (text.empty()) text = recommend::to_question(item, *parts_.graph);
  }
  if (ground::normalize_text(text).empty()) throw InvalidRequest("empty message");

  try {
    run_turn(state, text, parsed, sink);
  } catch (const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    const std::string code = err ? err->code() : "Internal";
    try {
      record(state, session::Failure{code, e.what()});
    } catch (const std::exception&) {
      // The log is the source of truth; reload it on next access.
      s->state.reset();
    }
    sink({"error", {{"code", code}, {"message", e.what()}}});
  }
  if (s->state) {
    try {
      parts_.store->save(*s->state);
    } catch (const std::exception& e) {
      std::lock_guard wl(warnings_mutex_);
      warnings_.push_back(session_id + ": snapshot not saved: " + e.what());
    }
  }
  const std::size_t steps = s->state ? s->state->steps.size() : 0;
  sink({"done", {{"steps", steps}}});
}

session::SessionState Service::state(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return loaded(*s, session_id);
}

std::vector<recommend::Recommendation> Service::recommendations(const std::string& session_id, std::size_t k) {
  const auto st = state(session_id);
  return recommend::generate(st.context, st.pool, *parts_.graph, k);
}

session::SessionState Service::dismiss(const std::string& session_id, const std::string& rec_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  session::SessionState& st = loaded(*s, session_id);
  record(st, session::Dismissal{rec_id});
  parts_.store->save(st);
  return st;
}

session::SessionState Service::navigate(const std::string& session_id, std::size_t step) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  session::SessionState& st = loaded(*s, session_id);
  record(st, session::Navigation{step});
  parts_.store->save(st);
  return st;
}

double Service::progress(const std::string& session_id) { return recommend::progress(state(session_id).pool); }

ground::GroundedTriple Service::verify(const std::string& subject, const std::string& relation,
                                       const std::string& object) {
  if (ground::normalize_text(subject).empty() || ground::normalize_text(relation).empty() ||
      ground::normalize_text(object).empty()) {
    throw InvalidRequest("triple needs subject, relation and object");
  }
  annotate::Triple t{subject, relation, object, "$n1", "$r1", "$n2"};
  return ground::ground_triples({t}, *parts_.graph, index_, parts_.matcher, *parts_.cache).front();
}

}  // namespace kgg::service
