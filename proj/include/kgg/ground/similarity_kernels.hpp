#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kgg::ground {

// Row-major matrix of embeddings with cached row norms.
struct EmbeddingMatrix {
  std::size_t dimension = 0;
  std::vector<double> values;  // rows * dimension
  std::vector<double> norms;   // per row

  std::size_t rows() const { return norms.size(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * dimension, dimension}; }
  void append(std::span<const double> v);
};

struct BestRow {
  std::size_t row = 0;
  double similarity = -2.0;  // below any cosine; means "no rows"
  bool found() const { return similarity >= -1.0; }
};

// Argmax of cosine(query, row) over all rows; ties go to the lowest row index.
// Both variants return bit-identical results: each row's cosine is computed
// by the same expression and the (similarity desc, row asc) order is total.
BestRow best_row_serial(const EmbeddingMatrix& m, std::span<const double> query);
BestRow best_row_parallel(const EmbeddingMatrix& m, std::span<const double> query);

// cosine(query, row) for every row.
std::vector<double> all_similarities_serial(const EmbeddingMatrix& m, std::span<const double> query);
std::vector<double> all_similarities_parallel(const EmbeddingMatrix& m, std::span<const double> query);

}  // namespace kgg::ground
