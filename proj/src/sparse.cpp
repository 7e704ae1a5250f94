#include "ipalm/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace ipalm {

SparseMatrix::SparseMatrix(Index n_rows, Index n_cols,
                           std::vector<Index> row_offsets,
                           std::vector<Index> col_indices,
                           std::vector<Real> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  require(n_rows_ >= 0 && n_cols_ >= 0, "SparseMatrix: negative dimension");
  require(static_cast<Index>(row_offsets_.size()) == n_rows_ + 1,
          "SparseMatrix: row_offsets length must be n_rows+1");
  require(row_offsets_.front() == 0, "SparseMatrix: row_offsets[0] != 0");
  require(row_offsets_.back() == static_cast<Index>(values_.size()) &&
              values_.size() == col_indices_.size(),
          "SparseMatrix: offsets/arrays inconsistent");
  for (Index r = 0; r < n_rows_; ++r) {
    require(row_offsets_[r] <= row_offsets_[r + 1],
            "SparseMatrix: row_offsets not non-decreasing");
    for (Index p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      require(col_indices_[p] >= 0 && col_indices_[p] < n_cols_,
              "SparseMatrix: column index out of range");
      if (p > row_offsets_[r])
        require(col_indices_[p] > col_indices_[p - 1],
                "SparseMatrix: column indices not strictly increasing");
      require(std::isfinite(values_[p]), "SparseMatrix: non-finite value");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index n_rows, Index n_cols,
                                         std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(n_rows + 1, 0);
  std::vector<Index> cols;
  std::vector<Real> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Triplet& t = entries[k];
    require(t.row >= 0 && t.row < n_rows && t.col >= 0 && t.col < n_cols,
            "from_triplets: entry out of range");
    if (!cols.empty() && k > 0 && entries[k - 1].row == t.row &&
        entries[k - 1].col == t.col) {
      vals.back() += t.value;  // merge duplicates
    } else {
      cols.push_back(t.col);
      vals.push_back(t.value);
    }
    offsets[t.row + 1] = static_cast<Index>(cols.size());
  }
  for (Index r = 0; r < n_rows; ++r)
    offsets[r + 1] = std::max(offsets[r + 1], offsets[r]);
  return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense, Real drop_tol) {
  std::vector<Triplet> entries;
  for (Index r = 0; r < dense.rows(); ++r)
    for (Index c = 0; c < dense.cols(); ++c)
      if (std::abs(dense(r, c)) > drop_tol)
        entries.push_back({r, c, dense(r, c)});
  return from_triplets(dense.rows(), dense.cols(), std::move(entries));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Index> offsets(n + 1), cols(n);
  std::vector<Real> vals(n, 1.0);
  for (Index i = 0; i <= n; ++i) offsets[i] = i;
  for (Index i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Index> offsets(n_cols_ + 1, 0);
  for (Index p = 0; p < nnz(); ++p) offsets[col_indices_[p] + 1]++;
  for (Index c = 0; c < n_cols_; ++c) offsets[c + 1] += offsets[c];
  std::vector<Index> cols(nnz());
  std::vector<Real> vals(nnz());
  std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
  for (Index r = 0; r < n_rows_; ++r) {
    for (Index p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      Index dst = cursor[col_indices_[p]]++;
      cols[dst] = r;
      vals[dst] = values_[p];
    }
  }
  return SparseMatrix(n_cols_, n_rows_, std::move(offsets), std::move(cols),
                      std::move(vals));
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_rows_, n_cols_);
  for (Index r = 0; r < n_rows_; ++r)
    for (Index p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
      out(r, col_indices_[p]) = values_[p];
  return out;
}

Vector apply(const SparseMatrix& A, const Vector& x, bool transposed) {
  if (!transposed) {
    require(x.size() == A.cols(), "apply: dimension mismatch");
    Vector y = Vector::Zero(A.rows());
    for (Index r = 0; r < A.rows(); ++r) y[r] = A.row_dot(r, x);
    return y;
  }
  require(x.size() == A.rows(), "apply: dimension mismatch (transposed)");
  Vector y = Vector::Zero(A.cols());
  for (Index r = 0; r < A.rows(); ++r) A.add_scaled_row(r, x[r], y);
  return y;
}

Real estimate_spectral_norm(const SparseMatrix& A, Real rel_tol, Index max_iter,
                            std::uint64_t seed) {
  require(rel_tol > 0, "estimate_spectral_norm: rel_tol must be positive");
  if (A.nnz() == 0 || A.rows() == 0 || A.cols() == 0) return 0.0;
  Rng rng(seed);
  Vector v(A.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  Real nv = v.norm();
  if (nv == 0) v.setOnes(); else v /= nv;

  Real sigma = 0.0;
  for (Index it = 0; it < max_iter; ++it) {
    Vector av = apply(A, v);
    // Rayleigh quotient of A^T A at unit v equals ||Av||^2
    Real sigma_new = av.norm();
    if (sigma_new == 0) return 0.0;
    Vector w = apply(A, av, /*transposed=*/true);
    Real wn = w.norm();
    if (wn == 0) return sigma_new * (1.0 + 10.0 * rel_tol);
    v = w / wn;
    if (it > 0 && std::abs(sigma_new - sigma) <= rel_tol * sigma_new) {
      sigma = sigma_new;
      break;
    }
    sigma = sigma_new;
  }
  return sigma * (1.0 + 10.0 * rel_tol);
}

Vector column_squared_norms(const SparseMatrix& A) {
  Vector out = Vector::Zero(A.cols());
  const auto& offs = A.row_offsets();
  const auto& cols = A.col_indices();
  const auto& vals = A.values();
  for (Index r = 0; r < A.rows(); ++r)
    for (Index p = offs[r]; p < offs[r + 1]; ++p)
      out[cols[p]] += vals[p] * vals[p];
  return out;
}

}  // namespace ipalm
