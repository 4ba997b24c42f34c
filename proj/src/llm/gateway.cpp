#include "kgg/llm/gateway.hpp"

#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "kgg/hash.hpp"

namespace kgg::llm {

namespace {

std::string substitute(const std::string& text, const std::map<std::string, std::string>& vars,
                       const std::string& template_name) {
  static const std::regex placeholder(R"(\{([a-z_]+)\})");
  std::string out;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), placeholder); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto value = vars.find(m[1].str());
    if (value == vars.end()) {
      throw Error("TemplateError", "template " + template_name + " needs a value for {" + m[1].str() + "}");
    }
    out.append(text, last, static_cast<std::size_t>(m.position(0)) - last);
    out.append(value->second);
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(text, last);
  return out;
}

std::string trim_lower(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  const auto b = out.find_first_not_of(" \t\r\n\"'`*");
  if (b == std::string::npos) return "";
  const auto e = out.find_last_not_of(" \t\r\n\"'`*.!");
  return out.substr(b, e - b + 1);
}

std::optional<bool> parse_yes_no(const std::string& reply) {
  const std::string r = trim_lower(reply);
  auto starts_word = [&](std::string_view w) {
    return r.compare(0, w.size(), w) == 0 && (r.size() == w.size() || !std::isalpha(static_cast<unsigned char>(r[w.size()])));
  };
  if (starts_word("yes")) return true;
  if (starts_word("no")) return false;
  return std::nullopt;
}

}  // namespace

RenderedPrompt PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
  return {substitute(system, vars, name), substitute(user_pattern, vars, name)};
}

// Reconstructed wording; only the marker grammar is load-bearing.
const PromptTemplate& scope_check_template() {
  static const PromptTemplate t{
      "scope_check",
      "You decide whether a question can be answered with the help of a biomedical knowledge graph.\n"
      "Reply with exactly one word: yes or no.",
      "Knowledge graph: {kg_blurb}\n"
      "Entity types: {kg_types}\n"
      "\n"
      "Question: {question}",
  };
  return t;
}

const PromptTemplate& annotate_template() {
  static const PromptTemplate t{
      "annotate",
      "You are a careful biomedical research assistant. Answer in plain prose.\n"
      "While you write, annotate the single most important relation in each sentence:\n"
      "- mark each entity as [entity text]($nK), numbering entities $n1, $n2, ... and using each number once;\n"
      "- mark the words expressing the relation as [relation text]($rK, $nI, $nJ), where $nI is the subject\n"
      "  entity and $nJ the object entity, numbering relations $r1, $r2, ...\n"
      "Example: [fish oil]($n1) is known for [containing]($r1, $n1, $n2) a rich content of "
      "[Omega-3 fatty acids]($n2).\n"
      "Prefer entities of these types: {kg_types}.\n"
      "Do not use square brackets for anything else.",
      "Conversation so far: {history_summary}\n"
      "\n"
      "Question: {question}",
  };
  return t;
}

const PromptTemplate& chat_template() {
  static const PromptTemplate t{
      "chat",
      "You are a helpful assistant.",
      "Conversation so far: {history_summary}\n"
      "\n"
      "Question: {question}",
  };
  return t;
}

std::string normalize_prompt(const RenderedPrompt& prompt) {
  std::string joined = prompt.system + "\n\n" + prompt.user;
  std::string out;
  std::istringstream in(joined);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto e = line.find_last_not_of(" \t");
    out += (e == std::string::npos ? "" : line.substr(0, e + 1));
    out += '\n';
  }
  const auto b = out.find_first_not_of('\n');
  if (b == std::string::npos) return "";
  const auto e = out.find_last_not_of('\n');
  return out.substr(b, e - b + 1);
}

std::string fixture_key(const std::string& template_name, const RenderedPrompt& prompt) {
  return sha256_hex(template_name + "\n" + normalize_prompt(prompt)).substr(0, 32);
}

std::filesystem::path fixture_path(const std::filesystem::path& dir, const std::string& template_name,
                                   const std::string& key) {
  return dir / template_name / (key + ".json");
}

std::optional<TranscriptFixture> load_fixture(const std::filesystem::path& dir, const std::string& template_name,
                                              const std::string& key) {
  std::ifstream in(fixture_path(dir, template_name, key));
  if (!in) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(in);
    TranscriptFixture f;
    f.key = doc.at("key").get<std::string>();
    f.template_name = doc.at("template").get<std::string>();
    f.prompt = doc.value("prompt", "");
    f.chunks = doc.at("chunks").get<std::vector<std::string>>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError("malformed fixture " + fixture_path(dir, template_name, key).string() + ": " + e.what());
  }
}

void save_fixture(const std::filesystem::path& dir, const TranscriptFixture& fixture) {
  const auto path = fixture_path(dir, fixture.template_name, fixture.key);
  std::filesystem::create_directories(path.parent_path());
  nlohmann::json doc{{"key", fixture.key},
                     {"template", fixture.template_name},
                     {"prompt", fixture.prompt},
                     {"chunks", fixture.chunks}};
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw GatewayError("cannot write fixture " + tmp);
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::string_view to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::kLive: return "live";
    case GatewayMode::kReplay: return "replay";
    case GatewayMode::kRecord: return "record";
  }
  return "replay";
}

GatewayMode gateway_mode_from_string(std::string_view s) {
  if (s == "live") return GatewayMode::kLive;
  if (s == "replay") return GatewayMode::kReplay;
  if (s == "record") return GatewayMode::kRecord;
  throw Error("ConfigError", "unknown gateway mode " + std::string(s));
}

std::string KgSummary::types_line() const {
  std::string out;
  for (const auto& t : types) {
    if (!out.empty()) out += ", ";
    out += t;
  }
  return out;
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<ChatTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.mode == GatewayMode::kReplay || config_.mode == GatewayMode::kRecord) {
    if (config_.fixture_dir.empty()) throw Error("ConfigError", "replay/record mode needs a fixture directory");
  }
  if (config_.mode != GatewayMode::kReplay && !transport_) {
    if (config_.endpoint.api_key.empty()) throw Error("ConfigError", "live/record mode needs an API key");
    transport_ = std::make_shared<HttpChatTransport>(config_.endpoint);
  }
}

void Gateway::live(const ChatRequest& request, const ChunkSink& sink) {
  bool delivered = false;
  auto tracking = [&](std::string_view chunk) {
    delivered = true;
    sink(chunk);
  };
  try {
    transport_->complete(request, tracking);
  } catch (const GatewayError&) {
    // One retry, and only if nothing reached the consumer yet.
    if (delivered) throw;
    transport_->complete(request, tracking);
  }
}

void Gateway::run(const PromptTemplate& tmpl, const std::map<std::string, std::string>& vars, const ChunkSink& sink) {
  const RenderedPrompt prompt = tmpl.render(vars);
  const std::string key = fixture_key(tmpl.name, prompt);

  switch (config_.mode) {
    case GatewayMode::kReplay: {
      auto fixture = load_fixture(config_.fixture_dir, tmpl.name, key);
      if (!fixture) throw MissingFixture(tmpl.name, key);
      for (const auto& chunk : fixture->chunks) sink(chunk);
      return;
    }
    case GatewayMode::kLive:
      live({prompt, true}, sink);
      return;
    case GatewayMode::kRecord: {
      TranscriptFixture fixture{key, tmpl.name, normalize_prompt(prompt), {}};
      live({prompt, true}, [&](std::string_view chunk) {
        fixture.chunks.emplace_back(chunk);
        sink(chunk);
      });
      save_fixture(config_.fixture_dir, fixture);
      return;
    }
  }
}

ScopeVerdict Gateway::check_scope(const std::string& question, const KgSummary& kg) {
  if (question.empty()) throw Error("EmptyText", "empty question");
  const std::map<std::string, std::string> vars{
      {"question", question}, {"kg_types", kg.types_line()}, {"kg_blurb", kg.blurb}};
  std::string reply;
  for (int attempt = 0; attempt < 2; ++attempt) {
    reply.clear();
    run(scope_check_template(), vars, [&](std::string_view c) { reply.append(c); });
    if (auto verdict = parse_yes_no(reply)) return {*verdict, std::nullopt};
  }
  return {false, "UnparseableVerdict: '" + reply + "'"};
}

void Gateway::annotated_answer(const std::string& question, const std::string& history_summary,
                               const KgSummary& kg, const ChunkSink& sink) {
  run(annotate_template(),
      {{"question", question}, {"history_summary", history_summary}, {"kg_types", kg.types_line()}}, sink);
}

void Gateway::chat_answer(const std::string& question, const std::string& history_summary, const ChunkSink& sink) {
  run(chat_template(), {{"question", question}, {"history_summary", history_summary}}, sink);
}

}  // namespace kgg::llm
