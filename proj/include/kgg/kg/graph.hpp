#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgg/error.hpp"

namespace kgg::kg {

struct Evidence {
  std::string source_id;  // e.g. a PubMed id
  std::string title;
  std::optional<int> year;

  bool operator==(const Evidence&) const = default;
};

struct KgNode {
  std::string id;
  std::string name;
  std::string node_type;
  std::vector<std::string> aliases;

  bool operator==(const KgNode&) const = default;
};

struct KgEdge {
  std::string id;
  std::string source;
  std::string target;
  std::string relation;
  std::vector<Evidence> evidence;

  bool operator==(const KgEdge&) const = default;
};

enum class Direction { kOut, kIn, kBoth };

// How an edge is traversed relative to the query: kForward when walking
// source -> target.
enum class Orientation { kForward, kReverse };

std::string_view to_string(Orientation o);

struct NeighborEntry {
  std::string edge_id;
  std::string neighbor_id;

  bool operator==(const NeighborEntry&) const = default;
  auto operator<=>(const NeighborEntry&) const = default;
};

struct OrientedEdge {
  const KgEdge* edge;
  Orientation orientation;
};

struct TwoHopPath {
  const KgEdge* first;
  Orientation first_orientation;
  const KgNode* mid;
  const KgEdge* second;
  Orientation second_orientation;

  std::size_t evidence_count() const { return first->evidence.size() + second->evidence.size(); }
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("ParseError", "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DanglingEndpoint : public Error {
 public:
  DanglingEndpoint(std::string edge_id, const std::string& missing)
      : Error("DanglingEndpoint", "edge " + edge_id + " references unknown node " + missing),
        edge_id_(std::move(edge_id)) {}
  const std::string& edge_id() const noexcept { return edge_id_; }

 private:
  std::string edge_id_;
};

class DuplicateNodeId : public Error {
 public:
  explicit DuplicateNodeId(const std::string& id) : Error("DuplicateNodeId", "duplicate node id " + id) {}
};

class DuplicateEdgeId : public Error {
 public:
  explicit DuplicateEdgeId(const std::string& id) : Error("DuplicateEdgeId", "duplicate edge id " + id) {}
};

class InvalidGraph : public Error {
 public:
  explicit InvalidGraph(const std::string& what) : Error("InvalidGraph", what) {}
};

class UnknownNode : public Error {
 public:
  explicit UnknownNode(const std::string& id) : Error("UnknownNode", "unknown node " + id) {}
};

class UnknownEdge : public Error {
 public:
  explicit UnknownEdge(const std::string& id) : Error("UnknownEdge", "unknown edge " + id) {}
};

// Per-node adjacency: edge indices, each list sorted by edge id.
struct AdjacencyEntry {
  std::vector<std::size_t> out;
  std::vector<std::size_t> in;

  bool operator==(const AdjacencyEntry&) const = default;
};

// Immutable, fully indexed entity/relation store. Construct through
// `KnowledgeGraph::build` or `load_graph`; all query methods are const and
// safe to call from any number of threads.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Validates and indexes. Throws DuplicateNodeId, DuplicateEdgeId,
  // DanglingEndpoint or InvalidGraph.
  static KnowledgeGraph build(std::vector<KgNode> nodes, std::vector<KgEdge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Nodes sorted by id; edges sorted by id.
  const std::vector<KgNode>& nodes() const { return nodes_; }
  const std::vector<KgEdge>& edges() const { return edges_; }

  bool has_node(std::string_view id) const;
  const KgNode& node(std::string_view id) const;
  const KgNode* find_node(std::string_view id) const;
  const KgEdge& edge(std::string_view id) const;
  const KgEdge* find_edge(std::string_view id) const;

  // Node ids of a given type, sorted.
  std::vector<std::string> nodes_of_type(std::string_view node_type) const;
  // Sorted, distinct type vocabulary.
  std::vector<std::string> node_types() const;

  // One entry per incident edge in the requested direction, sorted by edge
  // id. A self-loop appears once even for kBoth.
  std::vector<NeighborEntry> neighbors(std::string_view node, Direction direction) const;

  // Every edge whose endpoint set is {a, b}, sorted by edge id.
  std::vector<OrientedEdge> direct_edges(std::string_view a, std::string_view b) const;

  // Paths a - mid - b with edges traversed in either direction, mid not in
  // {a, b}. Ranked by summed evidence descending, then by (first, second)
  // edge id. At most `limit` paths.
  std::vector<TwoHopPath> two_hop_paths(std::string_view a, std::string_view b, std::size_t limit) const;

  const AdjacencyEntry& adjacency(std::string_view node) const;

  // Rebuilds adjacency from the edge list and compares with the live index.
  bool adjacency_consistent() const;

 private:
  std::size_t index_of(std::string_view id) const;
  static std::vector<AdjacencyEntry> build_adjacency(const std::vector<KgNode>& nodes,
                                                     const std::vector<KgEdge>& edges,
                                                     const std::unordered_map<std::string, std::size_t>& index);

  std::vector<KgNode> nodes_;
  std::vector<KgEdge> edges_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> edge_index_;
  std::vector<AdjacencyEntry> adjacency_;
  std::unordered_map<std::string, std::vector<std::size_t>> type_index_;
};

// JSON Lines loader. Node and edge lines may be interleaved in any order;
// endpoint validation runs after the last line.
KnowledgeGraph load_graph(const std::filesystem::path& path);
KnowledgeGraph parse_graph(std::istream& in);

}  // namespace kgg::kg
