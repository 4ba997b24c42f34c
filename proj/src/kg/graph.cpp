#include "kgg/kg/graph.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace kgg::kg {

std::string_view to_string(Orientation o) { return o == Orientation::kForward ? "forward" : "reverse"; }

KnowledgeGraph KnowledgeGraph::build(std::vector<KgNode> nodes, std::vector<KgEdge> edges) {
  KnowledgeGraph g;
  std::sort(nodes.begin(), nodes.end(), [](const KgNode& a, const KgNode& b) { return a.id < b.id; });
  std::sort(edges.begin(), edges.end(), [](const KgEdge& a, const KgEdge& b) { return a.id < b.id; });

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.id.empty()) throw InvalidGraph("node with empty id");
    if (n.name.empty()) throw InvalidGraph("node " + n.id + " has an empty name");
    if (n.node_type.empty()) throw InvalidGraph("node " + n.id + " has an empty type");
    if (!g.node_index_.emplace(n.id, i).second) throw DuplicateNodeId(n.id);
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.id.empty()) throw InvalidGraph("edge with empty id");
    if (!g.edge_index_.emplace(e.id, i).second) throw DuplicateEdgeId(e.id);
    if (e.relation.empty()) throw InvalidGraph("edge " + e.id + " has an empty relation");
    if (!g.node_index_.contains(e.source)) throw DanglingEndpoint(e.id, e.source);
    if (!g.node_index_.contains(e.target)) throw DanglingEndpoint(e.id, e.target);
    std::set<std::string_view> seen;
    for (const auto& ev : e.evidence) {
      if (ev.source_id.empty()) throw InvalidGraph("edge " + e.id + " has evidence without source_id");
      if (!seen.insert(ev.source_id).second)
        throw InvalidGraph("edge " + e.id + " lists evidence " + ev.source_id + " twice");
    }
  }

  g.adjacency_ = build_adjacency(nodes, edges, g.node_index_);
  for (std::size_t i = 0; i < nodes.size(); ++i) g.type_index_[nodes[i].node_type].push_back(i);
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  return g;
}

std::vector<AdjacencyEntry> KnowledgeGraph::build_adjacency(
    const std::vector<KgNode>& nodes, const std::vector<KgEdge>& edges,
    const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<AdjacencyEntry> adj(nodes.size());
  // Edges are sorted by id, so appending in order keeps every list sorted.
  for (std::size_t i = 0; i < edges.size(); ++i) {
    adj[index.at(edges[i].source)].out.push_back(i);
    adj[index.at(edges[i].target)].in.push_back(i);
  }
  return adj;
}

bool KnowledgeGraph::adjacency_consistent() const {
  return build_adjacency(nodes_, edges_, node_index_) == adjacency_;
}

std::size_t KnowledgeGraph::index_of(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  if (it == node_index_.end()) throw UnknownNode(std::string(id));
  return it->second;
}

bool KnowledgeGraph::has_node(std::string_view id) const { return node_index_.contains(std::string(id)); }

const KgNode& KnowledgeGraph::node(std::string_view id) const { return nodes_[index_of(id)]; }

const KgNode* KnowledgeGraph::find_node(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

const KgEdge& KnowledgeGraph::edge(std::string_view id) const {
  const KgEdge* e = find_edge(id);
  if (!e) throw UnknownEdge(std::string(id));
  return *e;
}

const KgEdge* KnowledgeGraph::find_edge(std::string_view id) const {
  auto it = edge_index_.find(std::string(id));
  return it == edge_index_.end() ? nullptr : &edges_[it->second];
}

std::vector<std::string> KnowledgeGraph::nodes_of_type(std::string_view node_type) const {
  std::vector<std::string> out;
  auto it = type_index_.find(std::string(node_type));
  if (it == type_index_.end()) return out;
  for (std::size_t i : it->second) out.push_back(nodes_[i].id);
  return out;
}

std::vector<std::string> KnowledgeGraph::node_types() const {
  std::vector<std::string> out;
  out.reserve(type_index_.size());
  for (const auto& [t, _] : type_index_) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

const AdjacencyEntry& KnowledgeGraph::adjacency(std::string_view node) const { return adjacency_[index_of(node)]; }

std::vector<NeighborEntry> KnowledgeGraph::neighbors(std::string_view node, Direction direction) const {
  const auto& adj = adjacency_[index_of(node)];
  std::vector<std::size_t> idx;
  if (direction == Direction::kOut) {
    idx = adj.out;
  } else if (direction == Direction::kIn) {
    idx = adj.in;
  } else {
    idx.reserve(adj.out.size() + adj.in.size());
    std::set_union(adj.out.begin(), adj.out.end(), adj.in.begin(), adj.in.end(), std::back_inserter(idx));
  }
  std::vector<NeighborEntry> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const auto& e = edges_[i];
    const bool outgoing = e.source == node;
    // kIn on a self-loop still reports the node itself.
    out.push_back({e.id, (direction == Direction::kIn || !outgoing) ? e.source : e.target});
  }
  return out;
}

std::vector<OrientedEdge> KnowledgeGraph::direct_edges(std::string_view a, std::string_view b) const {
  const auto& adj_a = adjacency_[index_of(a)];
  index_of(b);
  std::vector<OrientedEdge> out;
  std::vector<std::size_t> idx;
  std::set_union(adj_a.out.begin(), adj_a.out.end(), adj_a.in.begin(), adj_a.in.end(), std::back_inserter(idx));
  for (std::size_t i : idx) {
    const auto& e = edges_[i];
    if (e.source == a && e.target == b) {
      out.push_back({&e, Orientation::kForward});
    } else if (e.source == b && e.target == a) {
      out.push_back({&e, Orientation::kReverse});
    }
  }
  return out;
}

std::vector<TwoHopPath> KnowledgeGraph::two_hop_paths(std::string_view a, std::string_view b,
                                                       std::size_t limit) const {
  const std::size_t ia = index_of(a);
  const std::size_t ib = index_of(b);
  std::vector<TwoHopPath> paths;
  if (limit == 0) return paths;

  auto incident = [&](std::size_t n) {
    std::vector<std::size_t> idx;
    const auto& adj = adjacency_[n];
    std::set_union(adj.out.begin(), adj.out.end(), adj.in.begin(), adj.in.end(), std::back_inserter(idx));
    return idx;
  };

  for (std::size_t i1 : incident(ia)) {
    const auto& e1 = edges_[i1];
    const bool fwd1 = e1.source == a;
    const std::string& mid_id = fwd1 ? e1.target : e1.source;
    if (mid_id == a || mid_id == b) continue;
    const std::size_t im = node_index_.at(mid_id);
    for (std::size_t i2 : incident(im)) {
      if (i2 == i1) continue;
      const auto& e2 = edges_[i2];
      Orientation o2;
      if (e2.source == mid_id && e2.target == b) {
        o2 = Orientation::kForward;
      } else if (e2.target == mid_id && e2.source == b) {
        o2 = Orientation::kReverse;
      } else {
        continue;
      }
      paths.push_back({&e1, fwd1 ? Orientation::kForward : Orientation::kReverse, &nodes_[im], &e2, o2});
    }
  }
  (void)ib;

  std::sort(paths.begin(), paths.end(), [](const TwoHopPath& x, const TwoHopPath& y) {
    const auto ex = x.evidence_count();
    const auto ey = y.evidence_count();
    if (ex != ey) return ex > ey;
    return std::tie(x.first->id, x.second->id) < std::tie(y.first->id, y.second->id);
  });
  if (paths.size() > limit) paths.resize(limit);
  return paths;
}

}  // namespace kgg::kg
