#include "kgg/ground/matcher.hpp"

#include <set>

namespace kgg::ground {

void MatcherConfig::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(theta_n)) throw Error("ConfigError", "theta_n must lie in [0, 1]");
  if (!in_unit(theta_r)) throw Error("ConfigError", "theta_r must lie in [0, 1]");
  if (two_hop_limit == 0) throw Error("ConfigError", "two_hop_limit must be positive");
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kSupport: return "Support";
    case Label::kRelevant: return "Relevant";
    case Label::kUnsure: return "Unsure";
  }
  return "Unsure";
}

Label label_from_string(std::string_view s) {
  if (s == "Support") return Label::kSupport;
  if (s == "Relevant") return Label::kRelevant;
  if (s == "Unsure") return Label::kUnsure;
  throw Error("ParseError", "unknown verdict label " + std::string(s));
}

NodeIndex NodeIndex::build(const kg::KnowledgeGraph& graph, EmbeddingCache& cache) {
  NodeIndex index;
  for (const auto& node : graph.nodes()) {
    std::set<std::string> seen;
    auto add = [&](const std::string& text) {
      std::string key = normalize_text(text);
      if (key.empty() || !seen.insert(key).second) return;
      index.owners_.push_back(node.id);
      index.texts_.push_back(std::move(key));
    };
    add(node.name);
    for (const auto& alias : node.aliases) add(alias);
  }
  const auto vectors = cache.embed_many(index.texts_);
  index.matrix_.dimension = cache.provider().dimension();
  for (const auto& v : vectors) index.matrix_.append(v.values);
  return index;
}

EntityMatch match_entity(std::string_view surface, const NodeIndex& index, const MatcherConfig& cfg,
                         EmbeddingCache& cache, ScanKernel kernel) {
  EntityMatch match;
  match.surface = std::string(surface);
  const auto query = cache.embed(surface);
  const BestRow best = kernel == ScanKernel::kParallel ? best_row_parallel(index.matrix(), query.values)
                                                       : best_row_serial(index.matrix(), query.values);
  if (!best.found()) {
    match.similarity = -1.0;
    return match;
  }
  match.similarity = best.similarity;
  if (best.similarity >= cfg.theta_n) match.node = index.owner(best.row);
  return match;
}

Verdict classify(const annotate::Triple& triple, const EntityMatch& subject, const EntityMatch& object,
                 const kg::KnowledgeGraph& graph, const MatcherConfig& cfg, EmbeddingCache& cache) {
  Verdict verdict;
  if (!subject.node || !object.node) return verdict;

  const auto direct = graph.direct_edges(*subject.node, *object.node);
  const auto paths = graph.two_hop_paths(*subject.node, *object.node, cfg.two_hop_limit);
  for (const auto& p : paths) {
    verdict.two_hop.push_back(
        {p.first->id, p.first_orientation, p.mid->id, p.second->id, p.second_orientation});
  }

  std::vector<const kg::KgEdge*> passing;
  if (!direct.empty()) {
    const auto claimed = cache.embed(triple.relation_surface);
    for (const auto& d : direct) {
      const double sim = cosine(claimed, cache.embed(d.edge->relation));
      if (!verdict.best_relation_similarity || sim > *verdict.best_relation_similarity) {
        verdict.best_relation_similarity = sim;
      }
      if (sim >= cfg.theta_r) passing.push_back(d.edge);
    }
  }

  auto take = [&](const auto& edges) {
    for (const kg::KgEdge* e : edges) {
      verdict.direct_edges.push_back(e->id);
      verdict.evidence_count += e->evidence.size();
    }
  };

  if (!passing.empty()) {
    verdict.label = Label::kSupport;
    take(passing);
  } else if (!direct.empty()) {
    verdict.label = Label::kRelevant;
    std::vector<const kg::KgEdge*> all;
    for (const auto& d : direct) all.push_back(d.edge);
    take(all);
  } else if (!verdict.two_hop.empty()) {
    verdict.label = Label::kRelevant;
  }
  return verdict;
}

std::vector<GroundedTriple> ground_triples(const std::vector<annotate::Triple>& triples,
                                           const kg::KnowledgeGraph& graph, const NodeIndex& index,
                                           const MatcherConfig& cfg, EmbeddingCache& cache) {
  std::vector<GroundedTriple> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    GroundedTriple g;
    g.triple = t;
    g.subject_match = match_entity(t.subject_surface, index, cfg, cache);
    g.object_match = match_entity(t.object_surface, index, cfg, cache);
    g.verdict = classify(t, g.subject_match, g.object_match, graph, cfg, cache);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace kgg::ground
