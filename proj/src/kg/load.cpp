#include <fstream>

#include "json.hpp"
#include "kgg/kg/graph.hpp"

namespace kgg::kg {

namespace {

using nlohmann::json;

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw ParseError(line, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

KgNode parse_node(const json& obj, std::size_t line) {
  KgNode n;
  n.id = required_string(obj, "id", line);
  n.name = required_string(obj, "name", line);
  n.node_type = required_string(obj, "type", line);
  if (auto it = obj.find("aliases"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line, "'aliases' must be an array");
    for (const auto& a : *it) {
      if (!a.is_string()) throw ParseError(line, "alias must be a string");
      n.aliases.push_back(a.get<std::string>());
    }
  }
  return n;
}

KgEdge parse_edge(const json& obj, std::size_t line) {
  KgEdge e;
  e.id = required_string(obj, "id", line);
  e.source = required_string(obj, "source", line);
  e.target = required_string(obj, "target", line);
  e.relation = required_string(obj, "relation", line);
  if (auto it = obj.find("evidence"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line, "'evidence' must be an array");
    for (const auto& ev : *it) {
      if (!ev.is_object()) throw ParseError(line, "evidence item must be an object");
      Evidence item;
      item.source_id = required_string(ev, "source_id", line);
      if (auto t = ev.find("title"); t != ev.end() && t->is_string()) item.title = t->get<std::string>();
      if (auto y = ev.find("year"); y != ev.end() && !y->is_null()) {
        if (!y->is_number_integer()) throw ParseError(line, "evidence year must be an integer");
        item.year = y->get<int>();
      }
      e.evidence.push_back(std::move(item));
    }
  }
  return e;
}

}  // namespace

KnowledgeGraph parse_graph(std::istream& in) {
  std::vector<KgNode> nodes;
  std::vector<KgEdge> edges;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
    const std::string kind = required_string(obj, "kind", line);
    if (kind == "node") {
      nodes.push_back(parse_node(obj, line));
    } else if (kind == "edge") {
      edges.push_back(parse_edge(obj, line));
    } else {
      throw ParseError(line, "unknown kind '" + kind + "'");
    }
  }
  return KnowledgeGraph::build(std::move(nodes), std::move(edges));
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open knowledge graph file " + path.string());
  return parse_graph(in);
}

}  // namespace kgg::kg
