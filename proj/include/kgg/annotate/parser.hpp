#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kgg::annotate {

// Half-open byte interval into the plain (marker-free) text.
struct TextRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const TextRange&) const = default;
};

struct EntitySpan {
  std::string marker_id;  // "$nK"
  std::string surface;
  TextRange range;

  bool operator==(const EntitySpan&) const = default;
};

struct RelationSpan {
  std::string marker_id;  // "$rK"
  std::string surface;
  std::string subject_ref;  // "$nI"
  std::string object_ref;   // "$nJ"
  TextRange range;

  bool operator==(const RelationSpan&) const = default;
};

struct Triple {
  std::string subject_surface;
  std::string relation_surface;
  std::string object_surface;
  std::string subject_id;
  std::string relation_id;
  std::string object_id;

  bool operator==(const Triple&) const = default;
};

enum class DiagnosticKind {
  kUnknownMarker,         // `[x](...)` with a `$`-marker that is not $nK / $rK,$nI,$nJ
  kEmptySurface,          // `[]($n1)`
  kNestedMarker,          // `[` opened inside an open bracket; outer bracket kept literal
  kOrphanMarker,          // `]($n1)` with no matching `[`; marker group dropped
  kUnterminatedMarker,    // stream ended, or the length cap hit, inside a marker
  kDuplicateMarker,       // marker id already used in this response
  kSelfRelation,          // `$rK, $nI, $nI`
  kUnresolvedEntityRef,   // relation refers to an entity id never defined
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  std::string detail;      // offending marker text or id
  std::size_t raw_offset;  // byte offset into the raw stream

  bool operator==(const Diagnostic&) const = default;
};

struct AnnotatedResponse {
  std::string plain_text;
  std::vector<EntitySpan> entities;
  std::vector<RelationSpan> relations;
  std::vector<Triple> triples;
  std::vector<Diagnostic> diagnostics;

  bool operator==(const AnnotatedResponse&) const = default;
};

// What one `feed` call made available for live display.
struct ChunkResult {
  std::string plain_text;               // text appended to the display
  std::vector<EntitySpan> entities;     // entity spans closed in this chunk
  std::vector<RelationSpan> relations;  // relations whose both refs are now resolved
};

// Incremental parser for `[surface]($nK)` and `[surface]($rK, $nI, $nJ)`
// markers. Input may be split anywhere, including inside markers; the final
// response depends only on the concatenated input.
class AnnotationStream {
 public:
  static constexpr std::size_t kMaxSurfaceBytes = 512;
  static constexpr std::size_t kMaxMarkerBytes = 64;

  ChunkResult feed(std::string_view chunk);
  AnnotatedResponse finalize();

 private:
  enum class Mode { kText, kSurface, kAfterClose, kMarkerOpen, kMarker };

  void step(char c, ChunkResult& out);
  void emit_text(std::string_view text, ChunkResult& out);
  void flush_pending_literal(ChunkResult& out);
  void close_marker(ChunkResult& out);
  void resolve_pending(ChunkResult& out);
  void diagnose(DiagnosticKind kind, std::string detail, std::size_t offset);

  Mode mode_ = Mode::kText;
  bool orphan_ = false;           // current pending group started at `]` without `[`
  std::size_t pending_start_ = 0; // raw offset of the pending `[` or `]`
  std::string surface_;
  std::string marker_;
  std::size_t raw_pos_ = 0;
  bool finalized_ = false;

  AnnotatedResponse response_;
  std::map<std::string, std::size_t> entity_by_id_;  // marker id -> index in response_.entities
  std::map<std::string, std::size_t> relation_offset_;  // relation id -> raw offset of its `[`
  std::vector<RelationSpan> waiting_;                // relations with unresolved refs
  std::vector<RelationSpan> accepted_relations_;
};

// Parses a complete response; identical to a single `feed` + `finalize`.
AnnotatedResponse parse(std::string_view raw);

}  // namespace kgg::annotate
