#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "kgg/error.hpp"
#include "kgg/kg/graph.hpp"

namespace kgg::recommend {

// The second half of a query: a concrete node or a whole node type.
struct Target {
  enum class Kind { kNode, kType };
  Kind kind = Kind::kNode;
  std::string value;  // node id or type name

  static Target node(std::string id) { return {Kind::kNode, std::move(id)}; }
  static Target type(std::string name) { return {Kind::kType, std::move(name)}; }

  auto operator<=>(const Target&) const = default;
  bool operator==(const Target&) const = default;
};

// (N, {T | N'}): focus nodes asked about, paired with a type or a node.
struct Query {
  std::vector<std::string> focus;
  Target target;

  bool operator==(const Query&) const = default;
};

// Ordered query history q_0 .. q_t. Append-only.
struct Context {
  std::vector<Query> queries;

  void append(Query q) { queries.push_back(std::move(q)); }
  // Every node that appears in some query's focus.
  std::set<std::string> focus_nodes() const;
  bool operator==(const Context&) const = default;
};

struct GoalItem {
  std::string source;
  Target target;

  auto operator<=>(const GoalItem&) const = default;
  bool operator==(const GoalItem&) const = default;
};

// Exploration goal: the one-hop neighbourhood (as node and node-type items)
// of the frontier entities. dismissed and explored are disjoint subsets of
// goal.
struct RecommendationPool {
  std::set<GoalItem> goal;
  std::set<GoalItem> dismissed;
  std::set<GoalItem> explored;
  std::set<std::string> frontier;

  bool operator==(const RecommendationPool&) const = default;
};

struct Recommendation {
  std::string id;
  std::string source;
  Target target;
  std::string question;
  double score = 0.0;

  GoalItem item() const { return {source, target}; }
  bool operator==(const Recommendation&) const = default;
};

class UnknownRecommendation : public Error {
 public:
  explicit UnknownRecommendation(const std::string& id)
      : Error("UnknownRecommendation", "no goal item with recommendation id " + id) {}
};

class AlreadyExplored : public Error {
 public:
  explicit AlreadyExplored(const std::string& id)
      : Error("AlreadyExplored", "recommendation " + id + " was already explored") {}
};

// Content hash of (source, target); stable across runs and serialization.
std::string recommendation_id(const GoalItem& item);

// Node and node-type items for every neighbour of `entity` (self-loops skipped).
std::set<GoalItem> neighborhood_items(const std::string& entity, const kg::KnowledgeGraph& g);

RecommendationPool init_pool(const std::vector<std::string>& initial_entities, const kg::KnowledgeGraph& g);

// Goal items whose source appears in the context, minus dismissed and
// explored, ranked by evidence on the connecting edges (desc) then id (asc).
std::vector<Recommendation> generate(const Context& ctx, const RecommendationPool& pool,
                                     const kg::KnowledgeGraph& g, std::size_t k);

RecommendationPool dismiss(RecommendationPool pool, const std::string& rec_id);
RecommendationPool expand(RecommendationPool pool, const std::vector<std::string>& new_entities,
                          const kg::KnowledgeGraph& g);
RecommendationPool record_explored(RecommendationPool pool, const Query& q);

// |explored| / |goal \ dismissed|, or 1.0 when nothing is left to explore.
double progress(const RecommendationPool& pool);

// Evidence items on the edges that connect item.source to the target.
std::size_t connecting_evidence(const GoalItem& item, const kg::KnowledgeGraph& g);

std::string to_question(const Recommendation& rec, const kg::KnowledgeGraph& g);
std::string to_question(const GoalItem& item, const kg::KnowledgeGraph& g);

}  // namespace kgg::recommend
