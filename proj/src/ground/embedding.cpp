#include "kgg/ground/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "json.hpp"

namespace kgg::ground {

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch(a.dimension(), b.dimension());
  const double na = norm(a.values);
  const double nb = norm(b.values);
  if (na == 0.0 || nb == 0.0) throw ZeroVector();
  return cosine_from_parts(dot(a.values, b.values), na, nb);
}

EmbeddingVector EmbeddingCache::embed(std::string_view text) {
  const std::string key = normalize_text(text);
  if (key.empty()) throw EmptyText();
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  // The provider is called outside the lock; concurrent misses on the same
  // key compute the same deterministic value.
  const std::string texts[] = {key};
  auto vectors = provider_->embed_batch(texts);
  if (vectors.size() != 1) throw ProviderUnavailable("provider returned " + std::to_string(vectors.size()) + " vectors");
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(vectors.front())).first->second;
}

std::vector<EmbeddingVector> EmbeddingCache::embed_many(std::span<const std::string> texts) {
  std::vector<std::string> keys;
  keys.reserve(texts.size());
  for (const auto& t : texts) {
    keys.push_back(normalize_text(t));
    if (keys.back().empty()) throw EmptyText();
  }
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mutex_);
    for (const auto& k : keys)
      if (!entries_.contains(k)) missing.push_back(k);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (!missing.empty()) {
    auto vectors = provider_->embed_batch(missing);
    if (vectors.size() != missing.size()) throw ProviderUnavailable("provider returned a short batch");
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i) entries_.emplace(missing[i], std::move(vectors[i]));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(keys.size());
  std::lock_guard lock(mutex_);
  for (const auto& k : keys) out.push_back(entries_.at(k));
  return out;
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
  nlohmann::json doc;
  doc["provider"] = provider_->id();
  doc["dimension"] = provider_->dimension();
  auto& entries = doc["entries"] = nlohmann::json::object();
  {
    std::lock_guard lock(mutex_);
    for (const auto& [k, v] : entries_) entries[k] = v.values;
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("IoError", "cannot write embedding cache " + tmp);
    out << doc.dump();
  }
  std::filesystem::rename(tmp, path);
}

bool EmbeddingCache::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return false;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  if (doc.value("provider", "") != provider_->id()) return false;
  if (doc.value("dimension", std::size_t{0}) != provider_->dimension()) return false;
  std::map<std::string, EmbeddingVector> loaded;
  for (const auto& [k, v] : doc.at("entries").items()) {
    EmbeddingVector vec{v.get<std::vector<double>>()};
    if (vec.dimension() != provider_->dimension()) return false;
    loaded.emplace(k, std::move(vec));
  }
  std::lock_guard lock(mutex_);
  for (auto& [k, v] : loaded) entries_.insert_or_assign(k, std::move(v));
  return true;
}

}  // namespace kgg::ground
