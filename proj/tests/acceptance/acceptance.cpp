// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// non-zero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include "kgg/annotate/parser.hpp"
#include "kgg/ground/matcher.hpp"
#include "kgg/kg/graph.hpp"
#include "kgg/recommend/pool.hpp"
#include "kgg/service/service.hpp"
#include "kgg/session/serialize.hpp"
#include "kgg/session/store.hpp"
#include "support/oracles.hpp"

using namespace kgg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = KGG_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Refuses every call; Replay mode must never reach it.
class NoNetworkTransport : public llm::ChatTransport {
 public:
  void complete(const llm::ChatRequest&, const llm::ChunkSink&) override {
    ++calls;
    throw llm::GatewayError("network access attempted");
  }
  int calls = 0;
};

struct ReplayRig {
  fs::path store;
  std::shared_ptr<NoNetworkTransport> transport = std::make_shared<NoNetworkTransport>();
  std::unique_ptr<service::Service> svc;

  ReplayRig() {
    store = fs::temp_directory_path() / ("kgg-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(store);
    service::ServiceConfig cfg;
    cfg.kg_path = kData / "kg/fixture_kg.jsonl";
    cfg.embeddings.fixture_path = kData / "kg/fixture_embeddings.json";
    cfg.gateway.mode = llm::GatewayMode::kReplay;
    cfg.gateway.fixture_dir = kData / "fixtures";
    cfg.store_dir = store;
    cfg.matcher.theta_n = 0.85;
    cfg.matcher.theta_r = 0.94;
    std::int64_t t = 0;
    svc = service::Service::from_config(cfg, transport, [t]() mutable { return 1700000000000 + 250 * t++; });
  }
  ~ReplayRig() { fs::remove_all(store); }

  // Runs one free-text turn in a fresh session; returns the grounded triples.
  std::vector<ground::GroundedTriple> ask(const std::string& session, const std::string& text, std::string& error) {
    svc->create_session(session);
    svc->handle_message(session, {text, std::nullopt}, [&](const service::StreamEvent& e) {
      if (e.type == "error") error = e.data.dump();
    });
    const auto st = svc->state(session);
    return st.steps.empty() ? std::vector<ground::GroundedTriple>{} : st.steps.back().grounded;
  }
};

const ground::GroundedTriple* find_triple(const std::vector<ground::GroundedTriple>& ts, const std::string& subject_node,
                                          const std::string& object_node) {
  for (const auto& t : ts) {
    if (t.subject_match.node == subject_node && t.object_match.node == object_node) return &t;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

Outcome use_case_labels() {
  Outcome o;
  const auto t0 = Clock::now();
  ReplayRig rig;
  std::string err;

  auto check = [&](const char* tag, const std::string& question, const char* s, const char* ob,
                   ground::Label want) -> const ground::GroundedTriple* {
    err.clear();
    const auto ts = rig.ask(std::string("uc_") + tag, question, err);
    if (!err.empty()) {
      o.fail(std::string(tag) + ": " + err);
      return nullptr;
    }
    const auto* t = find_triple(ts, s, ob);
    if (!t) {
      o.fail(std::string(tag) + ": triple not grounded");
      return nullptr;
    }
    if (t->verdict.label != want) {
      o.fail(std::string(tag) + ": label " + std::string(ground::to_string(t->verdict.label)));
      return nullptr;
    }
    return t;
  };

  if (const auto* a = check("a", "Can Procaine slow the progression of Alzheimer's disease?", "PROC", "AD",
                            ground::Label::kSupport)) {
    if (a->verdict.evidence_count < 1) o.fail("a: evidence_count 0");
  }
  if (const auto* b = check("b", "Can rivastigmine treat AD?", "RIVA", "PDD", ground::Label::kRelevant)) {
    if (b->verdict.two_hop.size() != 1 || b->verdict.two_hop[0].mid != "AD") o.fail("b: expected one path via AD");
    if (b->verdict.evidence_count != 0) o.fail("b: direct evidence_count != 0");
    if (!b->verdict.direct_edges.empty()) o.fail("b: unexpected direct edge");
  }
  check("c", "Is fish oil a good source of omega-3?", "FISH", "OMEGA", ground::Label::kRelevant);
  check("d", "Does Ginkgo biloba help with Alzheimer's disease?", "GB", "AD", ground::Label::kUnsure);

  const double secs = seconds_since(t0);
  if (secs >= 1.0) o.fail("took " + std::to_string(secs) + " s");
  if (rig.transport->calls != 0) o.fail("transport was called");
  if (o.pass) o.detail = "a=Support b=Relevant(1 path via AD, evidence 0) c=Relevant d=Unsure in " +
                         std::to_string(secs) + " s";
  return o;
}

Outcome matcher_oracle() {
  Outcome o;
  testing::Rng rng(20240611);
  testing::RawGraph g;
  // Enough rows to take the parallel scan path.
  for (int i = 0; i < 300; ++i) {
    kg::KgNode n{"m" + std::to_string(1000 + i), "entity " + std::to_string(i), "Disorders", {}};
    if (i % 7 == 0) n.aliases.push_back("shared alias " + std::to_string(i % 21));  // duplicate texts tie
    if (i % 11 == 0) n.aliases.push_back("alt " + std::to_string(i));
    g.nodes.push_back(std::move(n));
  }
  constexpr std::size_t kDim = 24;
  std::map<std::string, ground::EmbeddingVector> table;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_vec = [&] {
    ground::EmbeddingVector v;
    for (std::size_t d = 0; d < kDim; ++d) v.values.push_back(unit(rng));
    return v;
  };
  for (const auto& n : g.nodes) {
    table[ground::normalize_text(n.name)] = random_vec();
    for (const auto& a : n.aliases) table[ground::normalize_text(a)] = random_vec();
  }
  // Near-duplicates of node vectors: plausible matches above and below theta.
  std::vector<std::string> surfaces;
  for (int i = 0; i < 200; ++i) {
    const auto& n = g.nodes[rng() % g.nodes.size()];
    switch (i % 5) {
      case 0: surfaces.push_back(n.name); break;
      case 1: surfaces.push_back(n.aliases.empty() ? "  " + n.name + " " : n.aliases.front()); break;
      case 2:
      case 3: {
        auto v = table[ground::normalize_text(n.name)];
        const double eps = i % 5 == 2 ? 0.05 : 0.6;
        for (auto& x : v.values) x += eps * unit(rng);
        const std::string s = "perturbed " + std::to_string(i);
        table[s] = v;
        surfaces.push_back(s);
        break;
      }
      default: surfaces.push_back("unseen term " + std::to_string(i)); break;
    }
  }
  auto cache = std::make_shared<ground::EmbeddingCache>(std::make_shared<ground::FixtureProvider>(kDim, table));
  const auto graph = kg::KnowledgeGraph::build(g.nodes, g.edges);
  const auto index = ground::NodeIndex::build(graph, *cache);
  ground::MatcherConfig cfg;

  std::size_t agree = 0, matched = 0;
  for (const auto& s : surfaces) {
    const auto want = testing::bf_match(g, s, *cache, cfg.theta_n);
    const auto serial = ground::match_entity(s, index, cfg, *cache, ground::ScanKernel::kSerial);
    const auto parallel = ground::match_entity(s, index, cfg, *cache, ground::ScanKernel::kParallel);
    const bool ok = serial.node == want.node && parallel.node == want.node && serial.similarity == want.similarity &&
                    parallel.similarity == want.similarity;
    if (ok) {
      ++agree;
    } else {
      o.fail("disagreement on '" + s + "'");
    }
    if (want.node) ++matched;
  }
  // Tie-break: a surface equal to a shared alias picks the smallest node id.
  const auto tie = ground::match_entity("shared alias 0", index, cfg, *cache);
  if (tie.node != std::optional<std::string>("m1000")) o.fail("tie not broken to smallest id");
  o.detail = std::to_string(agree) + "/200 agree (" + std::to_string(matched) + " matched), ties to lowest id" +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome path_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  testing::Rng rng(77);
  std::size_t checks = 0;
  for (int gi = 0; gi < 50 && o.pass; ++gi) {
    const auto raw = testing::random_graph(rng, 500, 2000);
    const auto graph = kg::KnowledgeGraph::build(raw.nodes, raw.edges);
    auto random_node = [&] { return raw.nodes[rng() % raw.nodes.size()].id; };

    for (int q = 0; q < 20; ++q) {
      const std::string n = random_node();
      for (auto dir : {kg::Direction::kOut, kg::Direction::kIn, kg::Direction::kBoth}) {
        const auto got = graph.neighbors(n, dir);
        const std::set<kg::NeighborEntry> got_set(got.begin(), got.end());
        if (got_set != testing::bf_neighbors(raw, n, dir) || got_set.size() != got.size()) {
          o.fail("neighbors mismatch at " + n);
        }
        ++checks;
      }
    }
    for (int q = 0; q < 20; ++q) {
      std::string a = random_node(), b = random_node();
      if (q % 2 == 0 && !raw.edges.empty()) {
        const auto& e = raw.edges[rng() % raw.edges.size()];
        a = e.source;
        b = e.target;
      }
      std::set<testing::OrientedId> got;
      for (const auto& d : graph.direct_edges(a, b)) got.insert({d.edge->id, d.orientation});
      if (got != testing::bf_direct_edges(raw, a, b)) o.fail("direct_edges mismatch " + a + "," + b);
      ++checks;
    }
    for (int q = 0; q < 20; ++q) {
      std::string a = random_node(), b = random_node();
      if (q % 2 == 0 && !raw.edges.empty()) {
        // Walk two random edges to land on a reachable pair.
        const auto& e = raw.edges[rng() % raw.edges.size()];
        a = e.source;
        const auto nbs = testing::bf_neighbors(raw, e.target, kg::Direction::kBoth);
        if (!nbs.empty()) {
          auto it = nbs.begin();
          std::advance(it, static_cast<long>(rng() % nbs.size()));
          b = it->neighbor_id;
        }
      }
      const auto want = testing::bf_two_hop(raw, a, b);
      const auto all = graph.two_hop_paths(a, b, std::numeric_limits<std::size_t>::max());
      std::set<testing::PathKey> got;
      for (const auto& p : all) {
        got.insert({p.first->id, p.first_orientation, p.mid->id, p.second->id, p.second_orientation});
      }
      if (got != want || got.size() != all.size()) o.fail("two_hop mismatch " + a + "," + b);
      // Ranking and truncation against the oracle's own ordering.
      std::vector<testing::PathKey> ranked(want.begin(), want.end());
      std::map<testing::PathKey, std::size_t> evidence;
      for (const auto& p : ranked) evidence[p] = testing::bf_path_evidence(raw, p);
      std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
        const auto ex = evidence.at(x), ey = evidence.at(y);
        if (ex != ey) return ex > ey;
        return std::tie(std::get<0>(x), std::get<3>(x)) < std::tie(std::get<0>(y), std::get<3>(y));
      });
      const auto top = graph.two_hop_paths(a, b, 3);
      if (top.size() != std::min<std::size_t>(3, ranked.size())) o.fail("two_hop limit not applied");
      for (std::size_t i = 0; i < top.size() && o.pass; ++i) {
        if (top[i].first->id != std::get<0>(ranked[i]) || top[i].second->id != std::get<3>(ranked[i])) {
          o.fail("two_hop ranking differs " + a + "," + b);
        }
      }
      checks += 2;
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 10.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) o.detail = "50 graphs, " + std::to_string(checks) + " queries equal brute force in " + std::to_string(secs) + " s";
  return o;
}

Outcome recommendation_oracle() {
  Outcome o;
  testing::Rng rng(4242);
  std::size_t nonempty = 0;
  for (int i = 0; i < 100 && o.pass; ++i) {
    const auto inst = testing::random_rec_instance(rng);
    const auto graph = kg::KnowledgeGraph::build(inst.graph.nodes, inst.graph.edges);

    std::vector<std::string> frontier(inst.pool.frontier.begin(), inst.pool.frontier.end());
    if (recommend::init_pool(frontier, graph).goal != inst.pool.goal) o.fail("init_pool goal differs from union");

    const auto all = recommend::generate(inst.context, inst.pool, graph, std::numeric_limits<std::size_t>::max());
    std::set<recommend::GoalItem> got;
    for (const auto& r : all) {
      got.insert(r.item());
      if (inst.pool.dismissed.contains(r.item()) || inst.pool.explored.contains(r.item())) {
        o.fail("dismissed/explored item emitted");
      }
      if (r.id != recommend::recommendation_id(r.item())) o.fail("id mismatch");
      if (r.score != static_cast<double>(testing::bf_connecting_evidence(inst.graph, r.item()))) o.fail("score");
    }
    if (got != testing::bf_candidates(inst.context, inst.pool) || got.size() != all.size()) {
      o.fail("instance " + std::to_string(i) + ": set differs from set-builder");
    }
    for (std::size_t j = 1; j < all.size(); ++j) {
      const bool ordered = all[j - 1].score > all[j].score ||
                           (all[j - 1].score == all[j].score && all[j - 1].id < all[j].id);
      if (!ordered) o.fail("ranking order");
    }
    const auto top3 = recommend::generate(inst.context, inst.pool, graph, 3);
    for (std::size_t j = 0; j < top3.size(); ++j) {
      if (!(top3[j] == all[j])) o.fail("top-k is not a prefix");
    }
    if (!all.empty()) ++nonempty;
  }
  if (o.pass) o.detail = "100 instances equal the set-builder (" + std::to_string(nonempty) + " non-empty), exclusions hold";
  return o;
}

Outcome parser_round_trip() {
  Outcome o;
  testing::Rng rng(9001);
  std::size_t triples = 0;
  for (int i = 0; i < 1000 && o.pass; ++i) {
    const auto gen = testing::random_annotation(rng);
    const std::multiset<testing::SurfaceTriple> want(gen.triples.begin(), gen.triples.end());
    for (int c = 0; c < 3; ++c) {
      annotate::AnnotationStream stream;
      std::string streamed;
      for (const auto& chunk : testing::random_chunks(rng, gen.raw, 12)) streamed += stream.feed(chunk).plain_text;
      const auto r = stream.finalize();
      if (r.plain_text != gen.plain || streamed != gen.plain) o.fail("plain text differs for: " + gen.raw);
      if (testing::surface_triples(r) != want) o.fail("triples differ for: " + gen.raw);
      if (!r.diagnostics.empty()) o.fail("unexpected diagnostic for: " + gen.raw);
    }
    triples += gen.triples.size();
  }
  const auto fish = annotate::parse(
      "[fish oil]($n1) is known for [containing]($r1, $n1, $n2) a rich content of [Omega-3 fatty acids]($n2)");
  if (fish.triples.size() != 1 || fish.triples[0].subject_surface != "fish oil" ||
      fish.triples[0].relation_surface != "containing" || fish.triples[0].object_surface != "Omega-3 fatty acids" ||
      fish.plain_text != "fish oil is known for containing a rich content of Omega-3 fatty acids") {
    o.fail("fish-oil sentence");
  }
  if (o.pass) o.detail = "1000 strings x 3 chunkings, " + std::to_string(triples) + " triples; fish-oil sentence -> 1 triple";
  return o;
}

Outcome replay_determinism() {
  Outcome o;
  const fs::path log = kData / "sessions/case3.log";
  auto cold = [&] {
    const auto graph = kg::load_graph(kData / "kg/fixture_kg.jsonl");
    return session::serialize_state(session::replay("case3", session::read_event_log(log), graph));
  };
  const std::string first = cold();
  const std::string second = cold();
  if (first != second) o.fail("serialized sessions differ");

  // Independent progress recomputation after every event.
  std::ifstream kg_in(kData / "kg/fixture_kg.jsonl");
  testing::RawGraph raw;
  {
    std::string line;
    while (std::getline(kg_in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (j["kind"] == "node") {
        raw.nodes.push_back({j["id"], j["name"], j["type"], j["aliases"].get<std::vector<std::string>>()});
      } else {
        kg::KgEdge e{j["id"], j["source"], j["target"], j["relation"], {}};
        for (const auto& ev : j["evidence"]) e.evidence.push_back({ev["source_id"], "", std::nullopt});
        raw.edges.push_back(std::move(e));
      }
    }
  }
  const auto graph = kg::load_graph(kData / "kg/fixture_kg.jsonl");
  const auto events = session::read_event_log(log);
  auto state = session::new_session("case3");
  std::set<recommend::GoalItem> goal;
  std::set<std::string> frontier;
  std::set<std::string> dismissed_ids;
  std::vector<recommend::Query> queries;
  double last = 0.0;
  std::size_t checked = 0;
  for (const auto& ev : events) {
    state = session::apply_event(std::move(state), ev, graph);
    if (const auto* d = std::get_if<session::Dismissal>(&ev.payload)) dismissed_ids.insert(d->id);
    if (std::holds_alternative<session::GroundingResult>(ev.payload)) {
      const auto& step = state.steps.back();
      if (goal.empty() && frontier.empty()) {
        std::vector<std::string> init;
        const auto* uq = [&]() -> const session::UserQuery* {
          for (auto it = events.rbegin(); it != events.rend(); ++it) {
            if (it->sequence < ev.sequence) {
              if (const auto* q = std::get_if<session::UserQuery>(&it->payload)) return q;
            }
          }
          return nullptr;
        }();
        if (uq && uq->parsed) init = uq->parsed->focus;
        for (const auto& m : session::matched_nodes(step.grounded)) {
          if (std::find(init.begin(), init.end(), m) == init.end()) init.push_back(m);
        }
        goal = testing::bf_goal(raw, init);
        frontier.insert(init.begin(), init.end());
      }
      if (step.query) queries.push_back(*step.query);
    }
    if (state.pool.frontier != frontier) o.fail("frontier changed (expand present)");
    std::set<recommend::GoalItem> explored, dismissed;
    for (const auto& q : queries) {
      for (const auto& f : q.focus) {
        if (goal.contains({f, q.target})) explored.insert({f, q.target});
      }
    }
    for (const auto& item : goal) {
      if (dismissed_ids.contains(recommend::recommendation_id(item)) && !explored.contains(item)) dismissed.insert(item);
    }
    const std::size_t denom = goal.size() - dismissed.size();
    const double want = denom == 0 ? 1.0 : static_cast<double>(explored.size()) / static_cast<double>(denom);
    const double got = recommend::progress(state.pool);
    if (got != want) o.fail("progress differs at event " + std::to_string(ev.sequence));
    if (got < 0.0 || got > 1.0) o.fail("progress out of range");
    // An empty pool reads 1.0; the series starts at the first grounded step.
    if (state.pool_initialized) {
      if (got < last) o.fail("progress decreased at event " + std::to_string(ev.sequence));
      last = got;
    }
    ++checked;
  }
  if (state.steps.size() != 3) o.fail("expected 3 steps");
  if (session::serialize_state(state) != first) o.fail("incremental state differs from replay");
  if (o.pass) {
    std::ostringstream d;
    d << "2 cold replays byte-identical (" << first.size() << " bytes), " << checked
      << " events checked, final progress " << last;
    o.detail = d.str();
  }
  return o;
}

Outcome offline_guarantee() {
  Outcome o;
  ReplayRig rig;
  // Case 3 end to end through the service, recommendation clicks included.
  rig.svc->create_session("offline_case3");
  std::string err;
  auto sink = [&](const service::StreamEvent& e) {
    if (e.type == "error") err = e.data.dump();
  };
  rig.svc->handle_message("offline_case3", {"Which supplement may slow the progression of Alzheimer's disease?", {}},
                          sink);
  rig.svc->dismiss("offline_case3", recommend::recommendation_id({"AD", recommend::Target::node("PDD")}));
  rig.svc->handle_message("offline_case3",
                          {"", recommend::recommendation_id({"OMEGA", recommend::Target::type("Disorders")})}, sink);
  rig.svc->handle_message("offline_case3", {"", recommend::recommendation_id({"VITE", recommend::Target::node("AD")})},
                          sink);
  std::string tmp;
  rig.ask("offline_chat", "What is the capital of France?", tmp);
  if (!tmp.empty()) err = tmp;
  if (!err.empty()) o.fail(err);
  if (rig.transport->calls != 0) o.fail("transport called " + std::to_string(rig.transport->calls) + " times");

  // The live service reproduces the recorded log byte for byte.
  const auto recorded = session::replay("offline_case3", session::read_event_log(kData / "sessions/case3.log"),
                                        rig.svc->graph());
  if (session::serialize_state(recorded) != session::serialize_state(rig.svc->state("offline_case3"))) {
    o.fail("replayed service session differs from the recorded log");
  }
  if (o.pass) o.detail = "Replay mode, 5 turns, 0 transport calls; service session equals recorded Case-3 log";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"use-case labels", use_case_labels},
      {"matcher oracle", matcher_oracle},
      {"path oracle", path_oracle},
      {"recommendation oracle", recommendation_oracle},
      {"parser round-trip", parser_round_trip},
      {"replay determinism", replay_determinism},
      {"offline guarantee", offline_guarantee},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failures += o.pass ? 0 : 1;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
