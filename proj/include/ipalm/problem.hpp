#pragma once

#include <memory>
#include <vector>

#include "ipalm/smoothing.hpp"
#include "ipalm/sparse.hpp"

namespace ipalm {

enum class BlockRole { SmoothHalfSquared, NonsmoothPiece, Constraint };

// One row block B (d_block x n) with its role:
//   SmoothHalfSquared: 0.5 * ||B x - target||^2
//   NonsmoothPiece:    psi(B x - shift), psi Lipschitz
//   Constraint:        B x in set
struct RowBlock {
  SparseMatrix B;
  BlockRole role;
  Vector target;       // SmoothHalfSquared
  SimpleFunction psi;  // NonsmoothPiece
  Vector shift;        // NonsmoothPiece affine offset (size 0 = none)
  SimpleSet set = SimpleSet::nonnegative_orthant();  // Constraint

  static RowBlock smooth_half_squared(SparseMatrix B, Vector target);
  static RowBlock nonsmooth(SparseMatrix B, SimpleFunction psi, Vector shift = {});
  static RowBlock constraint(SparseMatrix B, SimpleSet set);
};

// The affine-composition problem
//   min_x  f(x) + g(x) + h1(A1 x) + indicator_K(A2 x)
// with f the sum of the smooth half-squared blocks, A1 the stack of the
// nonsmooth blocks and A2 the stack of the constraint blocks. Immutable
// after construction; assembly computes the smoothing spec, the operator
// norms and the column/row data every solver consumes.
class CompositeProblem {
 public:
  CompositeProblem(Index n, std::vector<RowBlock> blocks, SimpleFunction g,
                   Real mu_g);

  Index n() const { return n_; }
  const std::vector<RowBlock>& blocks() const { return blocks_; }
  const SimpleFunction& g() const { return g_; }
  Real mu_g() const { return mu_g_; }
  const HSpec& h_spec() const { return h_spec_; }

  Real L_f() const { return L_f_; }          // smoothness of f
  Real op_norm_A() const { return op_norm_A_; }  // ||stack(A1, A2)||

  Index d1() const { return h_spec_.d1(); }
  Index d2() const { return h_spec_.d2(); }
  Index total_rows() const { return total_rows_; }

  // per-column ESO data: sum of squared column entries over smooth rows and
  // over smoothed (nonsmooth + constraint) rows
  const Vector& col_sq_smooth() const { return col_sq_smooth_; }
  const Vector& col_sq_smoothed() const { return col_sq_smoothed_; }

  struct ColEntry {
    int block;
    Index local_row;
    Real value;
  };
  const std::vector<ColEntry>& column(Index i) const { return columns_[i]; }

  struct RowRef {
    int block;
    Index local_row;
  };
  RowRef row_ref(Index stacked_row) const { return rows_[stacked_row]; }
  Real row_sq_norm(Index stacked_row) const { return row_sq_norms_[stacked_row]; }
  Real total_nnz() const { return total_nnz_; }

  const SparseMatrix& block_transposed(int b) const { return block_t_[b]; }

  // residuals B_j x for every block
  std::vector<Vector> block_residuals(const Vector& x) const;
  // stacked smoothing input (A1 x; A2 x)
  Vector stack_h_input(const std::vector<Vector>& residuals) const;

  // F(x) = f(x) + g(x) + h1(A1 x): the indicator is excluded, infeasibility
  // is reported separately
  Real objective(const Vector& x) const;
  Real infeasibility(const Vector& x) const;
  Real f_value(const std::vector<Vector>& residuals) const;

  // slice a stacked dual point into per-block vectors (empty for smooth)
  std::vector<Vector> split_dual(const DualPoint& lam) const;
  DualPoint join_dual(const std::vector<Vector>& per_block) const;

 private:
  Index n_;
  std::vector<RowBlock> blocks_;
  SimpleFunction g_;
  Real mu_g_;
  HSpec h_spec_;
  Real L_f_ = 0.0;
  Real op_norm_A_ = 0.0;
  Index total_rows_ = 0;
  Real total_nnz_ = 0.0;
  Vector col_sq_smooth_, col_sq_smoothed_;
  std::vector<std::vector<ColEntry>> columns_;
  std::vector<RowRef> rows_;
  std::vector<Real> row_sq_norms_;
  std::vector<SparseMatrix> block_t_;
};

}  // namespace ipalm
