#pragma once

#include <cstdint>
#include <vector>

#include "ipalm/types.hpp"

namespace ipalm {

// Compressed sparse row matrix. Immutable after construction and safe to
// share across threads. Within each row the column indices are strictly
// increasing, which fixes the summation order of every kernel.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<Real> values);

  struct Triplet {
    Index row;
    Index col;
    Real value;
  };
  static SparseMatrix from_triplets(Index n_rows, Index n_cols,
                                    std::vector<Triplet> entries);
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense,
                                 Real drop_tol = 0.0);
  static SparseMatrix identity(Index n);

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<Real>& values() const { return values_; }

  Real row_dot(Index r, const Vector& x) const {
    Real acc = 0.0;
    for (Index p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
      acc += values_[p] * x[col_indices_[p]];
    return acc;
  }

  Real row_squared_norm(Index r) const {
    Real acc = 0.0;
    for (Index p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
      acc += values_[p] * values_[p];
    return acc;
  }

  // out += coef * row_r
  void add_scaled_row(Index r, Real coef, Vector& out) const {
    for (Index p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
      out[col_indices_[p]] += coef * values_[p];
  }

  SparseMatrix transposed() const;
  Eigen::MatrixXd to_dense() const;

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<Real> values_;

  void validate() const;
};

// y = A x (or A^T x). Summation runs left to right within each row so the
// result is bit-identical across runs.
Vector apply(const SparseMatrix& A, const Vector& x, bool transposed = false);

// Largest singular value via power iteration on A^T A from a seeded random
// start. The returned value is inflated by (1 + 10 * rel_tol) so that it is
// an upper bound on ||A|| with high probability; a zero matrix gives 0.
Real estimate_spectral_norm(const SparseMatrix& A, Real rel_tol = 1e-6,
                            Index max_iter = 200, std::uint64_t seed = 0);

// Entry i is the squared Euclidean norm of column i.
Vector column_squared_norms(const SparseMatrix& A);

}  // namespace ipalm
