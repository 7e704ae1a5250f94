#include "ipalm/problem.hpp"

#include <cmath>

namespace ipalm {

RowBlock RowBlock::smooth_half_squared(SparseMatrix B, Vector target) {
  require(target.size() == B.rows(), "smooth block: target dimension mismatch");
  require_finite(target, "smooth block target");
  RowBlock blk;
  blk.B = std::move(B);
  blk.role = BlockRole::SmoothHalfSquared;
  blk.target = std::move(target);
  return blk;
}

RowBlock RowBlock::nonsmooth(SparseMatrix B, SimpleFunction psi, Vector shift) {
  require(psi.is_lipschitz(), "nonsmooth block: psi must be Lipschitz");
  require(shift.size() == 0 || shift.size() == B.rows(),
          "nonsmooth block: shift dimension mismatch");
  RowBlock blk;
  blk.B = std::move(B);
  blk.role = BlockRole::NonsmoothPiece;
  blk.psi = std::move(psi);
  blk.shift = std::move(shift);
  return blk;
}

RowBlock RowBlock::constraint(SparseMatrix B, SimpleSet set) {
  RowBlock blk;
  blk.B = std::move(B);
  blk.role = BlockRole::Constraint;
  blk.set = std::move(set);
  return blk;
}

namespace {

// power iteration over a virtual vertical stack of blocks
Real stacked_spectral_norm(const std::vector<const SparseMatrix*>& mats, Index n,
                           Real rel_tol, Index max_iter, std::uint64_t seed) {
  bool any = false;
  for (auto* m : mats)
    if (m->nnz() > 0) any = true;
  if (!any || n == 0) return 0.0;
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  v /= v.norm();
  Real sigma = 0.0;
  for (Index it = 0; it < max_iter; ++it) {
    Real sq = 0.0;
    Vector w = Vector::Zero(n);
    for (auto* m : mats) {
      Vector av = apply(*m, v);
      sq += av.squaredNorm();
      w += apply(*m, av, true);
    }
    Real sigma_new = std::sqrt(sq);
    if (sigma_new == 0) return 0.0;
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

}  // namespace

CompositeProblem::CompositeProblem(Index n, std::vector<RowBlock> blocks,
                                   SimpleFunction g, Real mu_g)
    : n_(n), blocks_(std::move(blocks)), g_(std::move(g)), mu_g_(mu_g) {
  require(n_ >= 1, "CompositeProblem: n must be positive");
  require(mu_g_ >= 0, "CompositeProblem: mu_g must be nonnegative");
  if (g_.kind() == SimpleFunction::Kind::WeightedL1)
    require(g_.weights().size() == n_, "CompositeProblem: g weight size != n");

  std::vector<H1Piece> pieces;
  std::vector<KPiece> sets;
  std::vector<const SparseMatrix*> smooth_mats, smoothed_mats;
  col_sq_smooth_ = Vector::Zero(n_);
  col_sq_smoothed_ = Vector::Zero(n_);
  columns_.resize(n_);
  block_t_.reserve(blocks_.size());

  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const RowBlock& blk = blocks_[b];
    require(blk.B.cols() == n_, "CompositeProblem: block column count != n");
    block_t_.push_back(blk.B.transposed());

    Vector csq = column_squared_norms(blk.B);
    switch (blk.role) {
      case BlockRole::SmoothHalfSquared:
        col_sq_smooth_ += csq;
        smooth_mats.push_back(&blk.B);
        break;
      case BlockRole::NonsmoothPiece:
        col_sq_smoothed_ += csq;
        smoothed_mats.push_back(&blk.B);
        pieces.push_back({blk.psi, blk.shift, blk.B.rows()});
        break;
      case BlockRole::Constraint:
        col_sq_smoothed_ += csq;
        smoothed_mats.push_back(&blk.B);
        sets.push_back({blk.set, blk.B.rows()});
        break;
    }

    for (Index r = 0; r < blk.B.rows(); ++r) {
      rows_.push_back({static_cast<int>(b), r});
      row_sq_norms_.push_back(blk.B.row_squared_norm(r));
      for (Index p = blk.B.row_offsets()[r]; p < blk.B.row_offsets()[r + 1]; ++p)
        columns_[blk.B.col_indices()[p]].push_back(
            {static_cast<int>(b), r, blk.B.values()[p]});
    }
    total_rows_ += blk.B.rows();
    total_nnz_ += static_cast<Real>(blk.B.nnz());
  }

  h_spec_ = HSpec::from_pieces(std::move(pieces), std::move(sets));

  Real sf = stacked_spectral_norm(smooth_mats, n_, 1e-6, 200, 1234);
  L_f_ = sf * sf;
  op_norm_A_ = stacked_spectral_norm(smoothed_mats, n_, 1e-6, 200, 1234);
}

std::vector<Vector> CompositeProblem::block_residuals(const Vector& x) const {
  require(x.size() == n_, "block_residuals: dimension mismatch");
  std::vector<Vector> out;
  out.reserve(blocks_.size());
  for (const auto& blk : blocks_) out.push_back(apply(blk.B, x));
  return out;
}

Vector CompositeProblem::stack_h_input(const std::vector<Vector>& residuals) const {
  Vector u(h_spec_.d());
  Index off1 = 0, off2 = h_spec_.d1();
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const RowBlock& blk = blocks_[b];
    if (blk.role == BlockRole::NonsmoothPiece) {
      u.segment(off1, blk.B.rows()) = residuals[b];
      off1 += blk.B.rows();
    } else if (blk.role == BlockRole::Constraint) {
      u.segment(off2, blk.B.rows()) = residuals[b];
      off2 += blk.B.rows();
    }
  }
  return u;
}

Real CompositeProblem::f_value(const std::vector<Vector>& residuals) const {
  Real acc = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    if (blocks_[b].role == BlockRole::SmoothHalfSquared)
      acc += 0.5 * (residuals[b] - blocks_[b].target).squaredNorm();
  return acc;
}

Real CompositeProblem::objective(const Vector& x) const {
  auto res = block_residuals(x);
  Real acc = f_value(res) + g_.value(x);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const RowBlock& blk = blocks_[b];
    if (blk.role == BlockRole::NonsmoothPiece) {
      for (Index i = 0; i < res[b].size(); ++i) {
        Real sh = blk.shift.size() == 0 ? 0.0 : blk.shift[i];
        acc += blk.psi.value1(res[b][i] - sh, i);
      }
    }
  }
  return acc;
}

Real CompositeProblem::infeasibility(const Vector& x) const {
  auto res = block_residuals(x);
  Real acc = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].role != BlockRole::Constraint) continue;
    Real d = blocks_[b].set.distance(res[b]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::vector<Vector> CompositeProblem::split_dual(const DualPoint& lam) const {
  require(lam.d1() == d1() && lam.d2() == d2(), "split_dual: dimension mismatch");
  std::vector<Vector> out(blocks_.size());
  Index off1 = 0, off2 = 0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const RowBlock& blk = blocks_[b];
    if (blk.role == BlockRole::NonsmoothPiece) {
      out[b] = lam.lambda1.segment(off1, blk.B.rows());
      off1 += blk.B.rows();
    } else if (blk.role == BlockRole::Constraint) {
      out[b] = lam.lambda2.segment(off2, blk.B.rows());
      off2 += blk.B.rows();
    }
  }
  return out;
}

DualPoint CompositeProblem::join_dual(const std::vector<Vector>& per_block) const {
  DualPoint out = DualPoint::zeros(d1(), d2());
  Index off1 = 0, off2 = 0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const RowBlock& blk = blocks_[b];
    if (blk.role == BlockRole::NonsmoothPiece) {
      out.lambda1.segment(off1, blk.B.rows()) = per_block[b];
      off1 += blk.B.rows();
    } else if (blk.role == BlockRole::Constraint) {
      out.lambda2.segment(off2, blk.B.rows()) = per_block[b];
      off2 += blk.B.rows();
    }
  }
  return out;
}

}  // namespace ipalm
