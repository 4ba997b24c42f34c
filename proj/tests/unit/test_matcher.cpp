#include <gtest/gtest.h>

#include "kgg/ground/matcher.hpp"
#include "support/oracles.hpp"

using namespace kgg;
using namespace kgg::ground;

namespace {

struct Fixture {
  kg::KnowledgeGraph graph = kg::load_graph(std::string(KGG_DATA_DIR) + "/kg/fixture_kg.jsonl");
  EmbeddingCache cache{FixtureProvider::from_file(std::string(KGG_DATA_DIR) + "/kg/fixture_embeddings.json")};
  NodeIndex index = NodeIndex::build(graph, cache);
  MatcherConfig cfg;

  GroundedTriple ground(const std::string& s, const std::string& r, const std::string& o) {
    return ground_triples({{s, r, o, "$n1", "$r1", "$n2"}}, graph, index, cfg, cache).front();
  }
};

// Axis vectors: every text listed gets its own direction unless mapped.
std::shared_ptr<FixtureProvider> axis_provider(const std::vector<std::vector<std::string>>& groups) {
  std::map<std::string, EmbeddingVector> table;
  const std::size_t dim = groups.size();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (const auto& t : groups[i]) {
      EmbeddingVector v;
      v.values.assign(dim, 0.0);
      v.values[i] = 1.0;
      table[normalize_text(t)] = v;
    }
  }
  return std::make_shared<FixtureProvider>(dim, table);
}

}  // namespace

TEST(MatcherConfig, Validation) {
  MatcherConfig c;
  EXPECT_NO_THROW(c.validate());
  c.theta_n = 1.2;
  EXPECT_THROW(c.validate(), kgg::Error);
  c.theta_n = 0.0;
  EXPECT_NO_THROW(c.validate());
  c.theta_r = -0.1;
  EXPECT_THROW(c.validate(), kgg::Error);
}

TEST(Matcher, ExactNameWinsOverNearDuplicate) {
  Fixture f;
  EXPECT_EQ(match_entity("Ginkgo biloba", f.index, f.cfg, f.cache).node, "GB");
  EXPECT_EQ(match_entity("Ginkgo biloba extract", f.index, f.cfg, f.cache).node, "GBE");
  const auto via_alias = match_entity("AD", f.index, f.cfg, f.cache);
  EXPECT_EQ(via_alias.node, "AD");
  EXPECT_DOUBLE_EQ(via_alias.similarity, 1.0);
}

TEST(Matcher, UnrelatedSurfaceIsUnmatched) {
  Fixture f;
  const auto m = match_entity("the weather in Paris", f.index, f.cfg, f.cache);
  EXPECT_FALSE(m.node);
  EXPECT_LT(m.similarity, f.cfg.theta_n);
  f.cfg.theta_n = 0.0;
  EXPECT_TRUE(match_entity("the weather in Paris", f.index, f.cfg, f.cache).node);
}

TEST(Matcher, KernelsAgree) {
  Fixture f;
  for (const char* s : {"vitamin E", "fish oil", "unknown thing", "neurons"}) {
    EXPECT_EQ(match_entity(s, f.index, f.cfg, f.cache, ScanKernel::kSerial),
              match_entity(s, f.index, f.cfg, f.cache, ScanKernel::kParallel));
  }
}

TEST(Verdict, UseCases) {
  Fixture f;
  const auto a = f.ground("Procaine", "slowing the progression of", "Alzheimer's disease");
  EXPECT_EQ(a.verdict.label, Label::kSupport);
  EXPECT_EQ(a.verdict.evidence_count, 2u);
  EXPECT_EQ(a.verdict.direct_edges, std::vector<std::string>{"e01"});

  const auto b = f.ground("Rivastigmine", "treat", "Parkinson's disease dementia");
  EXPECT_EQ(b.verdict.label, Label::kRelevant);
  EXPECT_EQ(b.verdict.evidence_count, 0u);
  ASSERT_EQ(b.verdict.two_hop.size(), 1u);
  EXPECT_EQ(b.verdict.two_hop[0].mid, "AD");

  EXPECT_EQ(f.ground("fish oil", "containing", "Omega-3 fatty acids").verdict.label, Label::kRelevant);
  EXPECT_EQ(f.ground("Ginkgo biloba", "benefit", "Alzheimer's disease").verdict.label, Label::kUnsure);
  EXPECT_EQ(f.ground("Ginkgo biloba extract", "benefit", "Alzheimer's disease").verdict.label, Label::kSupport);
}

TEST(Verdict, EachRule) {
  auto graph = kg::KnowledgeGraph::build(
      {{"A", "alpha", "T", {}}, {"B", "beta", "T", {}}, {"C", "gamma", "T", {}}, {"D", "delta", "T", {}}},
      {{"e1", "A", "B", "TREATS", {{"p1", "", {}}, {"p2", "", {}}}},
       {"e2", "B", "A", "CAUSES", {{"p3", "", {}}}},
       {"e3", "B", "C", "TREATS", {{"p4", "", {}}}}});
  EmbeddingCache cache(axis_provider({{"alpha"}, {"beta"}, {"gamma"}, {"delta"}, {"treats", "cures"}, {"causes"},
                                      {"unrelated"}, {"nothing"}}));
  const auto index = NodeIndex::build(graph, cache);
  MatcherConfig cfg;
  auto verdict = [&](const char* s, const char* r, const char* o) {
    return ground_triples({{s, r, o, "$n1", "$r1", "$n2"}}, graph, index, cfg, cache).front().verdict;
  };

  EXPECT_EQ(verdict("nothing", "treats", "beta").label, Label::kUnsure);  // rule 1

  const auto support = verdict("alpha", "cures", "beta");  // rule 2, evidence over passing edges only
  EXPECT_EQ(support.label, Label::kSupport);
  EXPECT_EQ(support.evidence_count, 2u);
  EXPECT_EQ(support.direct_edges, std::vector<std::string>{"e1"});

  const auto weak = verdict("alpha", "unrelated", "beta");  // rule 3, evidence over all direct edges
  EXPECT_EQ(weak.label, Label::kRelevant);
  EXPECT_EQ(weak.evidence_count, 3u);

  const auto hop = verdict("alpha", "treats", "gamma");  // rule 4
  EXPECT_EQ(hop.label, Label::kRelevant);
  EXPECT_EQ(hop.evidence_count, 0u);
  EXPECT_EQ(hop.two_hop.size(), 2u);

  EXPECT_EQ(verdict("alpha", "treats", "delta").label, Label::kUnsure);  // rule 5
}

TEST(Verdict, LabelStrings) {
  for (auto l : {Label::kSupport, Label::kRelevant, Label::kUnsure}) EXPECT_EQ(label_from_string(to_string(l)), l);
  EXPECT_THROW(label_from_string("maybe"), kgg::Error);
}

TEST(MatcherOracle, RandomFixtures) {
  kgg::testing::Rng rng(8);
  for (int round = 0; round < 5; ++round) {
    const auto raw = kgg::testing::random_graph(rng, 80, 10);
    std::map<std::string, EmbeddingVector> table;
    std::uniform_real_distribution<double> u(-1, 1);
    for (const auto& n : raw.nodes) {
      EmbeddingVector v;
      for (int d = 0; d < 8; ++d) v.values.push_back(u(rng));
      table[normalize_text(n.name)] = v;
    }
    EmbeddingCache cache(std::make_shared<FixtureProvider>(8, table));
    const auto graph = kg::KnowledgeGraph::build(raw.nodes, raw.edges);
    const auto index = NodeIndex::build(graph, cache);
    MatcherConfig cfg;
    cfg.theta_n = 0.5;
    for (int i = 0; i < 40; ++i) {
      const std::string s = i % 2 ? raw.nodes[rng() % raw.nodes.size()].name : "probe " + std::to_string(i);
      const auto want = kgg::testing::bf_match(raw, s, cache, cfg.theta_n);
      const auto got = match_entity(s, index, cfg, cache);
      EXPECT_EQ(got.node, want.node) << s;
      EXPECT_EQ(got.similarity, want.similarity) << s;
    }
  }
}
