#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgg/annotate/parser.hpp"
#include "kgg/ground/embedding.hpp"
#include "kgg/ground/similarity_kernels.hpp"
#include "kgg/kg/graph.hpp"

namespace kgg::ground {

struct MatcherConfig {
  double theta_n = 0.85;  // entity match threshold
  double theta_r = 0.94;  // relation equivalence threshold
  std::size_t two_hop_limit = 10;

  // Throws Error("ConfigError") if a threshold is outside [0, 1] or the
  // limit is zero.
  void validate() const;
};

enum class ScanKernel { kSerial, kParallel };

// Embeddings of every node name and alias, one row each. Rows are grouped by
// node in id order, so "lowest row" doubles as "lexicographically smallest
// node id" for tie-breaking.
class NodeIndex {
 public:
  static NodeIndex build(const kg::KnowledgeGraph& graph, EmbeddingCache& cache);

  const EmbeddingMatrix& matrix() const { return matrix_; }
  const std::string& owner(std::size_t row) const { return owners_[row]; }
  const std::string& text(std::size_t row) const { return texts_[row]; }
  std::size_t rows() const { return owners_.size(); }

 private:
  EmbeddingMatrix matrix_;
  std::vector<std::string> owners_;  // node id per row
  std::vector<std::string> texts_;   // normalized name/alias per row
};

struct EntityMatch {
  std::string surface;
  std::optional<std::string> node;  // set iff similarity >= theta_n
  double similarity = 0.0;

  bool operator==(const EntityMatch&) const = default;
};

enum class Label { kSupport, kRelevant, kUnsure };

std::string_view to_string(Label label);
Label label_from_string(std::string_view s);

// A two-hop path by id, detached from graph lifetime.
struct PathRef {
  std::string first_edge;
  kg::Orientation first_orientation;
  std::string mid;
  std::string second_edge;
  kg::Orientation second_orientation;

  bool operator==(const PathRef&) const = default;
};

struct Verdict {
  Label label = Label::kUnsure;
  std::vector<std::string> direct_edges;
  std::vector<PathRef> two_hop;
  std::size_t evidence_count = 0;
  std::optional<double> best_relation_similarity;

  bool operator==(const Verdict&) const = default;
};

struct GroundedTriple {
  annotate::Triple triple;
  EntityMatch subject_match;
  EntityMatch object_match;
  Verdict verdict;

  bool operator==(const GroundedTriple&) const = default;
};

EntityMatch match_entity(std::string_view surface, const NodeIndex& index, const MatcherConfig& cfg,
                         EmbeddingCache& cache, ScanKernel kernel = ScanKernel::kParallel);

// Label rules, first match wins:
//   1. an entity is unmatched                          -> Unsure
//   2. a direct edge's relation has cosine >= theta_r  -> Support (evidence over passing edges)
//   3. direct edges exist, none pass                   -> Relevant (evidence over all direct edges)
//   4. no direct edge, some two-hop path               -> Relevant (evidence 0)
//   5. otherwise                                       -> Unsure
Verdict classify(const annotate::Triple& triple, const EntityMatch& subject, const EntityMatch& object,
                 const kg::KnowledgeGraph& graph, const MatcherConfig& cfg, EmbeddingCache& cache);

// Matches and classifies every triple of a parsed response, in order.
std::vector<GroundedTriple> ground_triples(const std::vector<annotate::Triple>& triples,
                                           const kg::KnowledgeGraph& graph, const NodeIndex& index,
                                           const MatcherConfig& cfg, EmbeddingCache& cache);

}  // namespace kgg::ground
