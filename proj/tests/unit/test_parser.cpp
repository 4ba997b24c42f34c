#include <gtest/gtest.h>

#include "kgg/annotate/parser.hpp"
#include "support/oracles.hpp"

using namespace kgg::annotate;
using kgg::testing::Rng;

namespace {

const char* kFishOil =
    "[fish oil]($n1) is known for [containing]($r1, $n1, $n2) a rich content of [Omega-3 fatty acids]($n2)";

bool has(const AnnotatedResponse& r, DiagnosticKind k) {
  for (const auto& d : r.diagnostics) {
    if (d.kind == k) return true;
  }
  return false;
}

}  // namespace

TEST(Parser, FishOilSentence) {
  const auto r = parse(kFishOil);
  EXPECT_EQ(r.plain_text, "fish oil is known for containing a rich content of Omega-3 fatty acids");
  ASSERT_EQ(r.entities.size(), 2u);
  ASSERT_EQ(r.relations.size(), 1u);
  ASSERT_EQ(r.triples.size(), 1u);
  EXPECT_EQ(r.triples[0].subject_surface, "fish oil");
  EXPECT_EQ(r.triples[0].relation_surface, "containing");
  EXPECT_EQ(r.triples[0].object_surface, "Omega-3 fatty acids");
  EXPECT_EQ(r.entities[1].range.begin, r.plain_text.find("Omega-3"));
  EXPECT_TRUE(r.diagnostics.empty());
}

TEST(Parser, SplitInsideMarker) {
  AnnotationStream s;
  EXPECT_EQ(s.feed("[fish o").plain_text, "");
  const auto c = s.feed("il]($n1) is known");
  EXPECT_EQ(c.plain_text, "fish oil is known");
  ASSERT_EQ(c.entities.size(), 1u);
  EXPECT_EQ(c.entities[0].surface, "fish oil");
  EXPECT_EQ(c.entities[0].marker_id, "$n1");
}

TEST(Parser, RelationWaitsForForwardReference) {
  AnnotationStream s;
  const auto a = s.feed("[A]($n1) [rel]($r1, $n1, $n2) ");
  EXPECT_TRUE(a.relations.empty());
  const auto b = s.feed("[B]($n2)");
  ASSERT_EQ(b.relations.size(), 1u);
  EXPECT_EQ(s.finalize().triples.size(), 1u);
}

TEST(Parser, MarkdownLinksAndStrayDollarsStayLiteral) {
  const auto r = parse("see [docs](https://x.org) and pay $5 (maybe)");
  EXPECT_EQ(r.plain_text, "see [docs](https://x.org) and pay $5 (maybe)");
  EXPECT_TRUE(r.entities.empty());
}

TEST(Parser, Diagnostics) {
  EXPECT_TRUE(has(parse("[x]($q1)"), DiagnosticKind::kUnknownMarker));
  EXPECT_EQ(parse("[x]($q1)").plain_text, "[x]($q1)");
  EXPECT_TRUE(has(parse("[]($n1)"), DiagnosticKind::kEmptySurface));
  EXPECT_TRUE(has(parse("[a [b]($n1)"), DiagnosticKind::kNestedMarker));
  const auto orphan = parse("text]($n1) more");
  EXPECT_TRUE(has(orphan, DiagnosticKind::kOrphanMarker));
  EXPECT_EQ(orphan.plain_text, "text] more");
  const auto open = parse("[fish oil]($n1");
  EXPECT_TRUE(has(open, DiagnosticKind::kUnterminatedMarker));
  EXPECT_EQ(open.plain_text, "[fish oil]($n1");
  EXPECT_TRUE(has(parse("[a]($n1) [b]($n1)"), DiagnosticKind::kDuplicateMarker));
  EXPECT_TRUE(has(parse("[a]($n1) [r]($r1, $n1, $n1)"), DiagnosticKind::kSelfRelation));
  const auto unresolved = parse("[a]($n1) [r]($r1, $n1, $n9)");
  EXPECT_TRUE(has(unresolved, DiagnosticKind::kUnresolvedEntityRef));
  EXPECT_TRUE(unresolved.triples.empty());
  EXPECT_TRUE(has(parse("[x]($n0)"), DiagnosticKind::kUnknownMarker));
}

TEST(Parser, LeadingZerosCanonicalize) {
  const auto r = parse("[a]($n01) [r]($r1,$n1 , $n2) [b]($n002)");
  ASSERT_EQ(r.triples.size(), 1u);
  EXPECT_EQ(r.entities[0].marker_id, "$n1");
  EXPECT_EQ(r.triples[0].object_surface, "b");
}

TEST(Parser, SurfaceLengthCap) {
  const std::string long_surface(AnnotationStream::kMaxSurfaceBytes + 10, 'x');
  const auto r = parse("[" + long_surface + "]($n1)");
  EXPECT_TRUE(r.entities.empty());
  EXPECT_TRUE(has(r, DiagnosticKind::kUnterminatedMarker));
  EXPECT_TRUE(has(r, DiagnosticKind::kOrphanMarker));
  EXPECT_EQ(r.plain_text, "[" + long_surface + "]");
}

TEST(Parser, FinalizeIsIdempotentAcrossChunkings) {
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto gen = kgg::testing::random_annotation(rng);
    const auto whole = parse(gen.raw);
    EXPECT_EQ(whole.plain_text, gen.plain) << gen.raw;
    EXPECT_EQ(kgg::testing::surface_triples(whole),
              std::multiset<kgg::testing::SurfaceTriple>(gen.triples.begin(), gen.triples.end()))
        << gen.raw;
    AnnotationStream s;
    for (const auto& c : kgg::testing::random_chunks(rng, gen.raw, 20)) s.feed(c);
    EXPECT_EQ(s.finalize(), whole) << gen.raw;
  }
}

TEST(Parser, ByteAtATimeMatchesWhole) {
  AnnotationStream s;
  const std::string raw(kFishOil);
  for (char c : raw) s.feed(std::string_view(&c, 1));
  EXPECT_EQ(s.finalize(), parse(raw));
}
