#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgg/error.hpp"

namespace kgg::ground {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t a, std::size_t b)
      : Error("DimensionMismatch", "dimension " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class ZeroVector : public Error {
 public:
  ZeroVector() : Error("ZeroVector", "cosine of an all-zero vector is undefined") {}
};

class EmptyText : public Error {
 public:
  EmptyText() : Error("EmptyText", "cannot embed empty text") {}
};

class ProviderUnavailable : public Error {
 public:
  explicit ProviderUnavailable(const std::string& what) : Error("ProviderUnavailable", what) {}
};

// Trim, collapse internal whitespace runs to one space, ASCII-lowercase.
std::string normalize_text(std::string_view text);

// Plain left-to-right sums so every caller (kernels, oracles) gets
// bit-identical results for the same inputs.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double cosine_from_parts(double dot_ab, double norm_a, double norm_b) {
  const double c = dot_ab / (norm_a * norm_b);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

// Throws DimensionMismatch or ZeroVector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Source of embedding vectors. Implementations receive already-normalized,
// non-empty texts.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;
};

// Table-backed provider: `{"dimension": D, "vectors": {"term": [..]}}`.
// Terms are normalized on load. Unknown terms get a vector in [0,1)^D drawn
// from a generator seeded by a hash of the normalized text.
class FixtureProvider : public EmbeddingProvider {
 public:
  FixtureProvider(std::size_t dimension, std::map<std::string, EmbeddingVector> table);
  static std::unique_ptr<FixtureProvider> from_file(const std::filesystem::path& path);

  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

  bool contains(std::string_view normalized) const { return table_.contains(std::string(normalized)); }
  EmbeddingVector fallback(std::string_view normalized) const;

 private:
  std::size_t dimension_;
  std::map<std::string, EmbeddingVector> table_;
  std::string id_;
};

struct RemoteProviderConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model = "text-embedding-ada-002";
  std::string api_key;
  std::size_t dimension = 1536;
  int timeout_seconds = 60;
};

// HTTP provider for the `{"model":..,"input":[..]}` -> `{"data":[{"embedding":[..]}]}`
// contract.
class RemoteProvider : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteProviderConfig config) : config_(std::move(config)) {}

  std::string id() const override { return "remote:" + config_.model; }
  std::size_t dimension() const override { return config_.dimension; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

 private:
  RemoteProviderConfig config_;
};

// Thread-safe memo over a provider, keyed by (provider id, normalized text).
// Can be persisted to a sidecar JSON file so node embeddings survive restarts.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::shared_ptr<EmbeddingProvider> provider) : provider_(std::move(provider)) {}

  // Throws EmptyText when `text` normalizes to "".
  EmbeddingVector embed(std::string_view text);
  std::vector<EmbeddingVector> embed_many(std::span<const std::string> texts);

  const EmbeddingProvider& provider() const { return *provider_; }
  std::size_t size() const;

  void save(const std::filesystem::path& path) const;
  // Returns false (and loads nothing) if the file is missing or was written
  // for another provider or dimension.
  bool load(const std::filesystem::path& path);

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
  mutable std::mutex mutex_;
  std::map<std::string, EmbeddingVector> entries_;
};

}  // namespace kgg::ground
