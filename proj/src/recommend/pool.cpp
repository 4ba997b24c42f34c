#include "kgg/recommend/pool.hpp"

#include <algorithm>

#include "kgg/hash.hpp"

namespace kgg::recommend {

std::set<std::string> Context::focus_nodes() const {
  std::set<std::string> out;
  for (const auto& q : queries) out.insert(q.focus.begin(), q.focus.end());
  return out;
}

std::string recommendation_id(const GoalItem& item) {
  const char kind = item.target.kind == Target::Kind::kNode ? 'N' : 'T';
  return sha256_hex(item.source + '\x1f' + kind + '\x1f' + item.target.value).substr(0, 16);
}

std::set<GoalItem> neighborhood_items(const std::string& entity, const kg::KnowledgeGraph& g) {
  std::set<GoalItem> items;
  for (const auto& nb : g.neighbors(entity, kg::Direction::kBoth)) {
    if (nb.neighbor_id == entity) continue;
    items.insert({entity, Target::node(nb.neighbor_id)});
    items.insert({entity, Target::type(g.node(nb.neighbor_id).node_type)});
  }
  return items;
}

RecommendationPool init_pool(const std::vector<std::string>& initial_entities, const kg::KnowledgeGraph& g) {
  return expand(RecommendationPool{}, initial_entities, g);
}

RecommendationPool expand(RecommendationPool pool, const std::vector<std::string>& new_entities,
                          const kg::KnowledgeGraph& g) {
  for (const auto& e : new_entities) {
    if (!g.has_node(e)) throw kg::UnknownNode(e);
  }
  for (const auto& e : new_entities) {
    if (!pool.frontier.insert(e).second) continue;
    auto items = neighborhood_items(e, g);
    pool.goal.insert(items.begin(), items.end());
  }
  return pool;
}

std::size_t connecting_evidence(const GoalItem& item, const kg::KnowledgeGraph& g) {
  std::size_t total = 0;
  if (item.target.kind == Target::Kind::kNode) {
    for (const auto& d : g.direct_edges(item.source, item.target.value)) total += d.edge->evidence.size();
    return total;
  }
  for (const auto& nb : g.neighbors(item.source, kg::Direction::kBoth)) {
    if (nb.neighbor_id == item.source) continue;
    if (g.node(nb.neighbor_id).node_type == item.target.value) total += g.edge(nb.edge_id).evidence.size();
  }
  return total;
}

std::vector<Recommendation> generate(const Context& ctx, const RecommendationPool& pool,
                                     const kg::KnowledgeGraph& g, std::size_t k) {
  std::vector<Recommendation> out;
  if (k == 0 || ctx.queries.empty()) return out;
  const auto sources = ctx.focus_nodes();
  for (const auto& item : pool.goal) {
    if (!sources.contains(item.source)) continue;
    if (pool.dismissed.contains(item) || pool.explored.contains(item)) continue;
    Recommendation rec;
    rec.id = recommendation_id(item);
    rec.source = item.source;
    rec.target = item.target;
    rec.question = to_question(item, g);
    rec.score = static_cast<double>(connecting_evidence(item, g));
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

RecommendationPool dismiss(RecommendationPool pool, const std::string& rec_id) {
  for (const auto& item : pool.goal) {
    if (recommendation_id(item) != rec_id) continue;
    if (pool.explored.contains(item)) throw AlreadyExplored(rec_id);
    pool.dismissed.insert(item);
    return pool;
  }
  throw UnknownRecommendation(rec_id);
}

RecommendationPool record_explored(RecommendationPool pool, const Query& q) {
  for (const auto& source : q.focus) {
    const GoalItem item{source, q.target};
    if (!pool.goal.contains(item)) continue;
    // Asking explicitly overrides an earlier dismissal.
    pool.dismissed.erase(item);
    pool.explored.insert(item);
  }
  return pool;
}

double progress(const RecommendationPool& pool) {
  const std::size_t denominator = pool.goal.size() - pool.dismissed.size();
  if (denominator == 0) return 1.0;
  return static_cast<double>(pool.explored.size()) / static_cast<double>(denominator);
}

std::string to_question(const GoalItem& item, const kg::KnowledgeGraph& g) {
  const std::string& source = g.node(item.source).name;
  const std::string& target =
      item.target.kind == Target::Kind::kNode ? g.node(item.target.value).name : item.target.value;
  return "Can you tell me more about " + source + " and " + target + "?";
}

std::string to_question(const Recommendation& rec, const kg::KnowledgeGraph& g) {
  return to_question(rec.item(), g);
}

}  // namespace kgg::recommend
