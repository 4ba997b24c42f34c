#include "kgg/annotate/parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace kgg::annotate {

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::kUnknownMarker: return "UnknownMarker";
    case DiagnosticKind::kEmptySurface: return "EmptySurface";
    case DiagnosticKind::kNestedMarker: return "NestedMarker";
    case DiagnosticKind::kOrphanMarker: return "OrphanMarker";
    case DiagnosticKind::kUnterminatedMarker: return "UnterminatedMarker";
    case DiagnosticKind::kDuplicateMarker: return "DuplicateMarker";
    case DiagnosticKind::kSelfRelation: return "SelfRelation";
    case DiagnosticKind::kUnresolvedEntityRef: return "UnresolvedEntityRef";
  }
  return "Unknown";
}

namespace {

struct MarkerRef {
  char kind;  // 'n' or 'r'
  std::string id;
};

bool is_space(char c) { return c == ' ' || c == '\t'; }

// Parses `$nK` / `$rK` at `pos`, canonicalizing K (no leading zeros).
std::optional<MarkerRef> read_ref(std::string_view s, std::size_t& pos) {
  if (pos + 2 > s.size() || s[pos] != '$') return std::nullopt;
  const char kind = s[pos + 1];
  if (kind != 'n' && kind != 'r') return std::nullopt;
  std::size_t i = pos + 2;
  unsigned long value = 0;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    if (++digits > 9) return std::nullopt;
    value = value * 10 + static_cast<unsigned long>(s[i] - '0');
    ++i;
  }
  if (digits == 0 || value == 0) return std::nullopt;
  pos = i;
  return MarkerRef{kind, std::string("$") + kind + std::to_string(value)};
}

struct ParsedMarker {
  bool relation = false;
  std::string id;
  std::string subject;
  std::string object;
};

// `content` is the text between `(` and `)`.
std::optional<ParsedMarker> parse_marker(std::string_view content) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < content.size() && is_space(content[pos])) ++pos;
  };
  skip();
  auto head = read_ref(content, pos);
  if (!head) return std::nullopt;
  skip();
  if (head->kind == 'n') {
    if (pos != content.size()) return std::nullopt;
    return ParsedMarker{false, head->id, {}, {}};
  }
  std::string refs[2];
  for (auto& ref : refs) {
    if (pos >= content.size() || content[pos] != ',') return std::nullopt;
    ++pos;
    skip();
    auto r = read_ref(content, pos);
    if (!r || r->kind != 'n') return std::nullopt;
    ref = r->id;
    skip();
  }
  if (pos != content.size()) return std::nullopt;
  return ParsedMarker{true, head->id, refs[0], refs[1]};
}

}  // namespace

void AnnotationStream::diagnose(DiagnosticKind kind, std::string detail, std::size_t offset) {
  response_.diagnostics.push_back({kind, std::move(detail), offset});
}

void AnnotationStream::emit_text(std::string_view text, ChunkResult& out) {
  response_.plain_text.append(text);
  out.plain_text.append(text);
}

// Writes out whatever the current pending group holds as ordinary text.
void AnnotationStream::flush_pending_literal(ChunkResult& out) {
  std::string literal;
  if (orphan_) {
    literal = "]";
  } else {
    literal = "[" + surface_;
    if (mode_ != Mode::kSurface) literal += "]";
  }
  if (mode_ == Mode::kMarkerOpen || mode_ == Mode::kMarker) literal += "(";
  if (mode_ == Mode::kMarker) literal += marker_;
  emit_text(literal, out);
  surface_.clear();
  marker_.clear();
  orphan_ = false;
  mode_ = Mode::kText;
}

ChunkResult AnnotationStream::feed(std::string_view chunk) {
  ChunkResult out;
  for (char c : chunk) {
    step(c, out);
    ++raw_pos_;
  }
  return out;
}

void AnnotationStream::step(char c, ChunkResult& out) {
  for (;;) {
    switch (mode_) {
      case Mode::kText:
        if (c == '[') {
          mode_ = Mode::kSurface;
          orphan_ = false;
          pending_start_ = raw_pos_;
        } else if (c == ']') {
          mode_ = Mode::kAfterClose;
          orphan_ = true;
          pending_start_ = raw_pos_;
        } else {
          response_.plain_text.push_back(c);
          out.plain_text.push_back(c);
        }
        return;

      case Mode::kSurface:
        if (c == '[') {
          // Innermost bracket wins: the outer `[` and its text become literal.
          diagnose(DiagnosticKind::kNestedMarker, "[" + surface_, pending_start_);
          flush_pending_literal(out);
          continue;
        }
        if (c == ']') {
          mode_ = Mode::kAfterClose;
          return;
        }
        if (surface_.size() >= kMaxSurfaceBytes) {
          diagnose(DiagnosticKind::kUnterminatedMarker, "[" + surface_.substr(0, 16), pending_start_);
          flush_pending_literal(out);
          continue;
        }
        surface_.push_back(c);
        return;

      case Mode::kAfterClose:
        if (c == '(') {
          mode_ = Mode::kMarkerOpen;
          return;
        }
        flush_pending_literal(out);
        continue;

      case Mode::kMarkerOpen:
        if (c == '$') {
          mode_ = Mode::kMarker;
          marker_ = "$";
          return;
        }
        // `[text](http://...)` and similar: ordinary text.
        flush_pending_literal(out);
        continue;

      case Mode::kMarker:
        if (c == ')') {
          close_marker(out);
          return;
        }
        if (c == '\n' || c == '[' || c == ']' || c == '(' || marker_.size() >= kMaxMarkerBytes) {
          diagnose(DiagnosticKind::kUnterminatedMarker, "(" + marker_, pending_start_);
          flush_pending_literal(out);
          continue;
        }
        marker_.push_back(c);
        return;
    }
  }
}

void AnnotationStream::close_marker(ChunkResult& out) {
  auto parsed = parse_marker(marker_);
  if (!parsed) {
    diagnose(DiagnosticKind::kUnknownMarker, "(" + marker_ + ")", pending_start_);
    marker_ += ")";
    flush_pending_literal(out);
    return;
  }
  if (orphan_) {
    // The `]` stays as text; the dangling marker group is dropped.
    diagnose(DiagnosticKind::kOrphanMarker, "(" + marker_ + ")", pending_start_);
    emit_text("]", out);
    marker_.clear();
    orphan_ = false;
    mode_ = Mode::kText;
    return;
  }
  if (surface_.empty()) {
    diagnose(DiagnosticKind::kEmptySurface, "(" + marker_ + ")", pending_start_);
    marker_ += ")";
    flush_pending_literal(out);
    return;
  }

  const TextRange range{response_.plain_text.size(), response_.plain_text.size() + surface_.size()};
  emit_text(surface_, out);
  std::string surface = std::move(surface_);
  surface_.clear();
  marker_.clear();
  mode_ = Mode::kText;

  if (!parsed->relation) {
    if (entity_by_id_.contains(parsed->id)) {
      diagnose(DiagnosticKind::kDuplicateMarker, parsed->id, pending_start_);
      return;
    }
    entity_by_id_.emplace(parsed->id, response_.entities.size());
    response_.entities.push_back({parsed->id, surface, range});
    out.entities.push_back(response_.entities.back());
    resolve_pending(out);
    return;
  }

  if (relation_offset_.contains(parsed->id)) {
    diagnose(DiagnosticKind::kDuplicateMarker, parsed->id, pending_start_);
    return;
  }
  relation_offset_.emplace(parsed->id, pending_start_);
  if (parsed->subject == parsed->object) {
    diagnose(DiagnosticKind::kSelfRelation, parsed->id, pending_start_);
    return;
  }
  waiting_.push_back({parsed->id, surface, parsed->subject, parsed->object, range});
  resolve_pending(out);
}

void AnnotationStream::resolve_pending(ChunkResult& out) {
  auto it = waiting_.begin();
  while (it != waiting_.end()) {
    if (entity_by_id_.contains(it->subject_ref) && entity_by_id_.contains(it->object_ref)) {
      out.relations.push_back(*it);
      accepted_relations_.push_back(std::move(*it));
      it = waiting_.erase(it);
    } else {
      ++it;
    }
  }
}

AnnotatedResponse AnnotationStream::finalize() {
  if (finalized_) return response_;
  finalized_ = true;

  if (mode_ != Mode::kText) {
    ChunkResult ignored;
    if (!orphan_) diagnose(DiagnosticKind::kUnterminatedMarker, "[" + surface_.substr(0, 16), pending_start_);
    flush_pending_literal(ignored);
  }

  for (const auto& rel : waiting_) {
    for (const auto* ref : {&rel.subject_ref, &rel.object_ref}) {
      if (!entity_by_id_.contains(*ref)) {
        diagnose(DiagnosticKind::kUnresolvedEntityRef, *ref, relation_offset_.at(rel.marker_id));
      }
    }
  }
  waiting_.clear();

  std::stable_sort(accepted_relations_.begin(), accepted_relations_.end(),
                   [](const RelationSpan& a, const RelationSpan& b) { return a.range.begin < b.range.begin; });
  response_.relations = accepted_relations_;
  for (const auto& rel : response_.relations) {
    const auto& subject = response_.entities[entity_by_id_.at(rel.subject_ref)];
    const auto& object = response_.entities[entity_by_id_.at(rel.object_ref)];
    response_.triples.push_back(
        {subject.surface, rel.surface, object.surface, subject.marker_id, rel.marker_id, object.marker_id});
  }
  return response_;
}

AnnotatedResponse parse(std::string_view raw) {
  AnnotationStream stream;
  stream.feed(raw);
  return stream.finalize();
}

}  // namespace kgg::annotate
