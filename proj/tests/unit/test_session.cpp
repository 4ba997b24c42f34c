#include <gtest/gtest.h>

#include "kgg/session/serialize.hpp"
#include "kgg/session/store.hpp"

using namespace kgg;
using namespace kgg::session;

namespace {

kg::KnowledgeGraph fixture() { return kg::load_graph(std::string(KGG_DATA_DIR) + "/kg/fixture_kg.jsonl"); }

std::vector<SessionEvent> case3() { return read_event_log(std::string(KGG_DATA_DIR) + "/sessions/case3.log"); }

SessionEvent ev(std::uint64_t seq, Payload p) { return {seq, 1000 + static_cast<std::int64_t>(seq), std::move(p)}; }

}  // namespace

TEST(Session, Case3ReplayShape) {
  const auto g = fixture();
  const auto state = replay("case3", case3(), g);
  ASSERT_EQ(state.steps.size(), 3u);
  EXPECT_TRUE(state.pool_initialized);
  EXPECT_EQ(state.pool.explored.size(), 3u);
  EXPECT_EQ(state.pool.dismissed.size(), 1u);
  EXPECT_EQ(state.context.queries.size(), 3u);
  EXPECT_FALSE(state.pending);
  EXPECT_EQ(state.steps[1].query->target, recommend::Target::type("Disorders"));
  for (const auto& e : state.steps[1].response.entities) EXPECT_EQ(e.marker_id.rfind("s1.", 0), 0u);
}

TEST(Session, FocusContextViews) {
  const auto g = fixture();
  const auto state = replay("case3", case3(), g);
  const auto v0 = view_at_step(state, 0);
  EXPECT_TRUE(v0.faded.nodes.empty());
  EXPECT_FALSE(v0.highlighted.nodes.empty());
  EXPECT_FALSE(v0.hidden.nodes.empty());
  for (const auto& id : v0.hidden.nodes) EXPECT_GE(state.graph.nodes.at(id).step, 1u);

  const auto v2 = view_at_step(state, 2);
  EXPECT_TRUE(v2.hidden.nodes.empty());
  EXPECT_TRUE(v2.hidden.edges.empty());
  EXPECT_EQ(v2.faded.nodes.size() + v2.highlighted.nodes.size(), state.graph.nodes.size());
  EXPECT_THROW(view_at_step(state, 3), StepOutOfRange);
}

TEST(Session, TransitionsRejectBadSequences) {
  const auto g = fixture();
  auto s = new_session("x");
  EXPECT_THROW(apply_event(s, ev(2, UserQuery{"q", {}}), g), SequenceGap);
  EXPECT_THROW(apply_event(s, ev(1, LlmScope{true}), g), InvalidEvent);
  EXPECT_THROW(apply_event(s, ev(1, UserQuery{"", {}}), g), InvalidEvent);
  EXPECT_THROW(apply_event(s, ev(1, UserQuery{"q", recommend::Query{{"NOPE"}, recommend::Target::type("T")}}), g),
               InvalidEvent);
  EXPECT_THROW(apply_event(s, ev(1, Navigation{0}), g), StepOutOfRange);
}

TEST(Session, OutOfScopeAndFailureCloseTheStep) {
  const auto g = fixture();
  auto s = new_session("x");
  s = apply_event(s, ev(1, UserQuery{"capital of France?", {}}), g);
  s = apply_event(s, ev(2, LlmScope{false}), g);
  s = apply_event(s, ev(3, LlmResponse{"Paris."}), g);
  ASSERT_EQ(s.steps.size(), 1u);
  EXPECT_FALSE(s.steps[0].in_scope);
  EXPECT_EQ(s.steps[0].response.plain_text, "Paris.");
  EXPECT_FALSE(s.pool_initialized);

  s = apply_event(s, ev(4, UserQuery{"again", {}}), g);
  s = apply_event(s, ev(5, Failure{"Timeout", "slow"}), g);
  ASSERT_EQ(s.steps.size(), 2u);
  EXPECT_EQ(s.steps[1].failure, "Timeout: slow");
  s = apply_event(s, ev(6, Navigation{0}), g);
  EXPECT_EQ(s.current_step, 0u);
}

TEST(Session, SerializationRoundTrips) {
  const auto g = fixture();
  const auto events = case3();
  for (const auto& e : events) EXPECT_EQ(deserialize_event(serialize_event(e)), e);
  const auto state = replay("case3", events, g);
  const auto text = serialize_state(state);
  EXPECT_EQ(deserialize_state(text), state);
  EXPECT_EQ(serialize_state(deserialize_state(text)), text);
  EXPECT_THROW(deserialize_state("{\"schema_version\":99,\"session\":{}}"), Error);
  EXPECT_THROW(deserialize_state("not json"), Error);
}

TEST(Session, DeriveQueryFromGrounding) {
  const auto g = fixture();
  const auto state = replay("case3", case3(), g);
  const auto q = state.steps[0].query;
  ASSERT_TRUE(q);
  EXPECT_EQ(q->target, recommend::Target::type("Dietary Supplement"));
  EXPECT_EQ(q->focus.front(), "AD");
  EXPECT_EQ(marker_namespace(4), "s4.");
}
