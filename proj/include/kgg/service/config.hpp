#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"
#include "kgg/ground/embedding.hpp"
#include "kgg/ground/matcher.hpp"
#include "kgg/llm/gateway.hpp"

namespace kgg::service {

struct EmbeddingConfig {
  std::string provider = "fixture";  // "fixture" or "remote"
  std::filesystem::path fixture_path;
  ground::RemoteProviderConfig remote;
  std::filesystem::path cache_path;  // optional sidecar for node embeddings
};

struct ServiceConfig {
  std::filesystem::path kg_path;
  EmbeddingConfig embeddings;
  llm::GatewayConfig gateway;
  ground::MatcherConfig matcher;
  std::filesystem::path store_dir = "sessions";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t recommendations_shown = 10;
  std::string kg_blurb = "biomedical entities such as dietary supplements, drugs and disorders, with literature evidence";

  // Throws Error("ConfigError").
  void validate() const;
};

// Relative paths in the document are resolved against `base_dir`.
ServiceConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Process environment.
std::optional<std::string> getenv_lookup(const std::string& name);

// KGG_KG, KGG_EMBEDDINGS, KGG_FIXTURES, KGG_STORE, KGG_MODE, KGG_THETA_N,
// KGG_THETA_R, KGG_HOST, KGG_PORT, KGG_LLM_BASE_URL, KGG_LLM_MODEL,
// KGG_LLM_API_KEY, KGG_EMBEDDING_BASE_URL, KGG_EMBEDDING_API_KEY.
void apply_env(ServiceConfig& cfg, const EnvLookup& env);

}  // namespace kgg::service
