#include "kgg/service/config.hpp"

#include <cstdlib>
#include <fstream>

namespace kgg::service {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

double parse_double(const std::string& name, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw Error("ConfigError", name + " is not a number: " + value);
  }
}

int parse_int(const std::string& name, const std::string& value) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return i;
  } catch (const std::exception&) {
    throw Error("ConfigError", name + " is not an integer: " + value);
  }
}

}  // namespace

void ServiceConfig::validate() const {
  matcher.validate();
  if (kg_path.empty()) throw Error("ConfigError", "no knowledge graph path configured");
  if (embeddings.provider == "fixture") {
    if (embeddings.fixture_path.empty()) throw Error("ConfigError", "fixture embeddings need a path");
  } else if (embeddings.provider == "remote") {
    if (embeddings.remote.base_url.empty()) throw Error("ConfigError", "remote embeddings need a base_url");
  } else {
    throw Error("ConfigError", "unknown embedding provider " + embeddings.provider);
  }
  if (gateway.mode != llm::GatewayMode::kLive && gateway.fixture_dir.empty()) {
    throw Error("ConfigError", "replay/record mode needs a fixture directory");
  }
  if (port < 0 || port > 65535) throw Error("ConfigError", "port out of range");
  if (recommendations_shown == 0) throw Error("ConfigError", "recommendations_shown must be positive");
}

ServiceConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  ServiceConfig cfg;
  try {
    cfg.kg_path = resolve(base_dir, doc.value("kg", ""));
    cfg.store_dir = resolve(base_dir, doc.value("store", cfg.store_dir.string()));
    cfg.host = doc.value("host", cfg.host);
    cfg.port = doc.value("port", cfg.port);
    cfg.recommendations_shown = doc.value("recommendations_shown", cfg.recommendations_shown);
    cfg.kg_blurb = doc.value("kg_blurb", cfg.kg_blurb);

    if (doc.contains("matcher")) {
      const auto& m = doc["matcher"];
      cfg.matcher.theta_n = m.value("theta_n", cfg.matcher.theta_n);
      cfg.matcher.theta_r = m.value("theta_r", cfg.matcher.theta_r);
      cfg.matcher.two_hop_limit = m.value("two_hop_limit", cfg.matcher.two_hop_limit);
    }
    if (doc.contains("embeddings")) {
      const auto& e = doc["embeddings"];
      cfg.embeddings.provider = e.value("provider", cfg.embeddings.provider);
      cfg.embeddings.fixture_path = resolve(base_dir, e.value("path", ""));
      cfg.embeddings.cache_path = resolve(base_dir, e.value("cache", ""));
      cfg.embeddings.remote.base_url = e.value("base_url", "");
      cfg.embeddings.remote.model = e.value("model", cfg.embeddings.remote.model);
      cfg.embeddings.remote.dimension = e.value("dimension", cfg.embeddings.remote.dimension);
    }
    if (doc.contains("llm")) {
      const auto& l = doc["llm"];
      cfg.gateway.mode = llm::gateway_mode_from_string(l.value("mode", "replay"));
      cfg.gateway.fixture_dir = resolve(base_dir, l.value("fixtures", ""));
      cfg.gateway.endpoint.base_url = l.value("base_url", "");
      cfg.gateway.endpoint.model = l.value("model", cfg.gateway.endpoint.model);
      cfg.gateway.endpoint.timeout_seconds = l.value("timeout_seconds", cfg.gateway.endpoint.timeout_seconds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("ConfigError", std::string("malformed config: ") + e.what());
  }
  return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("ConfigError", "cannot read config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("ConfigError", "malformed config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

std::optional<std::string> getenv_lookup(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

void apply_env(ServiceConfig& cfg, const EnvLookup& env) {
  if (auto v = env("KGG_KG")) cfg.kg_path = *v;
  if (auto v = env("KGG_EMBEDDINGS")) {
    cfg.embeddings.provider = "fixture";
    cfg.embeddings.fixture_path = *v;
  }
  if (auto v = env("KGG_FIXTURES")) cfg.gateway.fixture_dir = *v;
  if (auto v = env("KGG_STORE")) cfg.store_dir = *v;
  if (auto v = env("KGG_MODE")) cfg.gateway.mode = llm::gateway_mode_from_string(*v);
  if (auto v = env("KGG_THETA_N")) cfg.matcher.theta_n = parse_double("KGG_THETA_N", *v);
  if (auto v = env("KGG_THETA_R")) cfg.matcher.theta_r = parse_double("KGG_THETA_R", *v);
  if (auto v = env("KGG_HOST")) cfg.host = *v;
  if (auto v = env("KGG_PORT")) cfg.port = parse_int("KGG_PORT", *v);
  if (auto v = env("KGG_LLM_BASE_URL")) cfg.gateway.endpoint.base_url = *v;
  if (auto v = env("KGG_LLM_MODEL")) cfg.gateway.endpoint.model = *v;
  if (auto v = env("KGG_LLM_API_KEY")) cfg.gateway.endpoint.api_key = *v;
  if (auto v = env("KGG_EMBEDDING_BASE_URL")) {
    cfg.embeddings.provider = "remote";
    cfg.embeddings.remote.base_url = *v;
  }
  if (auto v = env("KGG_EMBEDDING_API_KEY")) cfg.embeddings.remote.api_key = *v;
}

}  // namespace kgg::service
