#include "kgg/ground/similarity_kernels.hpp"

#include <omp.h>

#include "kgg/ground/embedding.hpp"

namespace kgg::ground {

namespace {

inline bool better(double sim, std::size_t row, const BestRow& current) {
  return sim > current.similarity || (sim == current.similarity && row < current.row);
}

inline double row_cosine(const EmbeddingMatrix& m, std::size_t r, std::span<const double> query, double query_norm) {
  if (m.norms[r] == 0.0) return -2.0;
  return cosine_from_parts(dot(query, m.row(r)), query_norm, m.norms[r]);
}

// Small scans are not worth a parallel region.
constexpr std::size_t kParallelThreshold = 256;

}  // namespace

void EmbeddingMatrix::append(std::span<const double> v) {
  if (dimension == 0 && norms.empty()) dimension = v.size();
  if (v.size() != dimension) throw DimensionMismatch(v.size(), dimension);
  values.insert(values.end(), v.begin(), v.end());
  norms.push_back(norm(v));
}

BestRow best_row_serial(const EmbeddingMatrix& m, std::span<const double> query) {
  if (query.size() != m.dimension && m.rows() > 0) throw DimensionMismatch(query.size(), m.dimension);
  const double qn = norm(query);
  if (qn == 0.0) throw ZeroVector();
  BestRow best;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double s = row_cosine(m, r, query, qn);
    if (s >= -1.0 && better(s, r, best)) best = {r, s};
  }
  return best;
}

BestRow best_row_parallel(const EmbeddingMatrix& m, std::span<const double> query) {
  if (m.rows() < kParallelThreshold) return best_row_serial(m, query);
  if (query.size() != m.dimension) throw DimensionMismatch(query.size(), m.dimension);
  const double qn = norm(query);
  if (qn == 0.0) throw ZeroVector();

  const auto rows = static_cast<std::ptrdiff_t>(m.rows());
  BestRow best;
#pragma omp parallel
  {
    BestRow local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
      const auto row = static_cast<std::size_t>(r);
      const double s = row_cosine(m, row, query, qn);
      if (s >= -1.0 && better(s, row, local)) local = {row, s};
    }
#pragma omp critical(kgg_best_row)
    {
      if (local.found() && better(local.similarity, local.row, best)) best = local;
    }
  }
  return best;
}

std::vector<double> all_similarities_serial(const EmbeddingMatrix& m, std::span<const double> query) {
  if (query.size() != m.dimension && m.rows() > 0) throw DimensionMismatch(query.size(), m.dimension);
  const double qn = norm(query);
  if (qn == 0.0) throw ZeroVector();
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = row_cosine(m, r, query, qn);
  return out;
}

std::vector<double> all_similarities_parallel(const EmbeddingMatrix& m, std::span<const double> query) {
  if (m.rows() < kParallelThreshold) return all_similarities_serial(m, query);
  if (query.size() != m.dimension) throw DimensionMismatch(query.size(), m.dimension);
  const double qn = norm(query);
  if (qn == 0.0) throw ZeroVector();
  std::vector<double> out(m.rows());
  const auto rows = static_cast<std::ptrdiff_t>(m.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    out[static_cast<std::size_t>(r)] = row_cosine(m, static_cast<std::size_t>(r), query, qn);
  }
  return out;
}

}  // namespace kgg::ground
