#include <fstream>
#include <random>

#include "httplib.h"
#include "json.hpp"
#include "kgg/ground/embedding.hpp"
#include "kgg/hash.hpp"
#include "kgg/http_util.hpp"

namespace kgg::ground {

FixtureProvider::FixtureProvider(std::size_t dimension, std::map<std::string, EmbeddingVector> table)
    : dimension_(dimension) {
  if (dimension_ == 0) throw Error("ConfigError", "fixture embedding dimension must be positive");
  std::string fingerprint = std::to_string(dimension_);
  for (auto& [term, vec] : table) {
    if (vec.dimension() != dimension_) throw DimensionMismatch(vec.dimension(), dimension_);
    std::string key = normalize_text(term);
    fingerprint += "\n" + key;
    for (double v : vec.values) fingerprint += " " + std::to_string(v);
    table_.insert_or_assign(std::move(key), std::move(vec));
  }
  id_ = "fixture:" + sha256_hex(fingerprint).substr(0, 16);
}

std::unique_ptr<FixtureProvider> FixtureProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProviderUnavailable("cannot open embedding table " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderUnavailable("malformed embedding table " + path.string() + ": " + e.what());
  }
  const auto dimension = doc.at("dimension").get<std::size_t>();
  std::map<std::string, EmbeddingVector> table;
  for (const auto& [term, values] : doc.at("vectors").items()) {
    table.emplace(term, EmbeddingVector{values.get<std::vector<double>>()});
  }
  return std::make_unique<FixtureProvider>(dimension, std::move(table));
}

std::string FixtureProvider::id() const { return id_; }

EmbeddingVector FixtureProvider::fallback(std::string_view normalized) const {
  std::mt19937_64 rng(sha256_u64("fixture-fallback\n" + std::string(normalized)));
  EmbeddingVector v;
  v.values.resize(dimension_);
  // Top 53 bits -> [0,1); avoids std distributions, whose output is
  // implementation-defined.
  for (auto& x : v.values) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  bool all_zero = true;
  for (double x : v.values) all_zero = all_zero && x == 0.0;
  if (all_zero) v.values[0] = 1.0;
  return v;
}

std::vector<EmbeddingVector> FixtureProvider::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (auto it = table_.find(t); it != table_.end()) {
      out.push_back(it->second);
    } else {
      out.push_back(fallback(t));
    }
  }
  return out;
}

std::vector<EmbeddingVector> RemoteProvider::embed_batch(std::span<const std::string> texts) {
  if (config_.base_url.empty()) throw ProviderUnavailable("remote embedding provider has no base URL");
  const auto url = split_url(config_.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

  nlohmann::json request{{"model", config_.model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  auto response = client.Post(url.path_prefix + "/embeddings", request.dump(), "application/json");
  if (!response) throw ProviderUnavailable("embedding request failed: " + httplib::to_string(response.error()));
  if (response->status != 200) {
    throw ProviderUnavailable("embedding endpoint returned HTTP " + std::to_string(response->status));
  }
  std::vector<EmbeddingVector> out;
  try {
    const auto doc = nlohmann::json::parse(response->body);
    for (const auto& item : doc.at("data")) {
      out.push_back({item.at("embedding").get<std::vector<double>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderUnavailable(std::string("malformed embedding response: ") + e.what());
  }
  if (out.size() != texts.size()) throw ProviderUnavailable("embedding response has the wrong number of items");
  for (const auto& v : out) {
    if (v.dimension() != config_.dimension) throw DimensionMismatch(v.dimension(), config_.dimension);
  }
  return out;
}

}  // namespace kgg::ground
