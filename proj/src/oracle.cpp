#include "ipalm/oracle.hpp"

#include <cmath>

namespace ipalm {

SubproblemOracle::SubproblemOracle(const CompositeProblem& problem, DualPoint lam,
                                   Real beta, Vector anchor)
    : prob_(&problem), lam_(std::move(lam)), beta_(beta), anchor_(std::move(anchor)) {
  require(beta_ > 0, "SubproblemOracle: beta must be positive");
  require(anchor_.size() == problem.n(), "SubproblemOracle: anchor dimension");
  require(lam_.d1() == problem.d1() && lam_.d2() == problem.d2(),
          "SubproblemOracle: multiplier dimensions");
  lam_block_ = problem.split_dual(lam_);
}

Real SubproblemOracle::eval_phi(const Vector& x) const {
  charge_full_pass();
  auto res = prob_->block_residuals(x);
  Real acc = prob_->f_value(res);
  Vector u = prob_->stack_h_input(res);
  acc += smoothed_value(prob_->h_spec(), u, lam_, beta_);
  return acc;
}

Real SubproblemOracle::eval_H(const Vector& x) const {
  return eval_phi(x) + prob_->g().value(x) +
         0.5 * beta_ * (x - anchor_).squaredNorm();
}

Vector SubproblemOracle::grad_phi(const Vector& x) const {
  require(x.size() == prob_->n(), "grad_phi: dimension mismatch");
  charge_full_pass();
  Vector out = Vector::Zero(prob_->n());
  const auto& blocks = prob_->blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const RowBlock& blk = blocks[b];
    Vector u = apply(blk.B, x);
    Vector d;
    switch (blk.role) {
      case BlockRole::SmoothHalfSquared:
        d = u - blk.target;
        break;
      case BlockRole::NonsmoothPiece: {
        d.resize(u.size());
        const Vector& l = lam_block_[b];
        for (Index i = 0; i < u.size(); ++i) {
          Real sh = blk.shift.size() == 0 ? 0.0 : blk.shift[i];
          Real w = sh + blk.psi.prox1(u[i] + beta_ * l[i] - sh, beta_, i);
          d[i] = l[i] + (u[i] - w) / beta_;
        }
        break;
      }
      case BlockRole::Constraint: {
        const Vector& l = lam_block_[b];
        Vector w = blk.set.project(u + beta_ * l);
        d = l + (u - w) / beta_;
        break;
      }
    }
    out += apply(prob_->block_transposed(static_cast<int>(b)), d);
  }
  return out;
}

Vector SubproblemOracle::prox_P(const Vector& v, Real t) const {
  return prox_shifted_quadratic(prob_->g(), v, t, anchor_, beta_);
}

Real SubproblemOracle::prox_P1(Real v, Real t, Index i) const {
  Real q = 1.0 / t + beta_;
  Real merged = (v / t + beta_ * anchor_[i]) / q;
  return prob_->g().prox1(merged, 1.0 / q, i);
}

Real SubproblemOracle::max_v_coordinate() const {
  Real m = 0.0;
  for (Index i = 0; i < prob_->n(); ++i) m = std::max(m, v_coordinate(i));
  return m;
}

Real SubproblemOracle::component_L(Index j) const {
  auto ref = prob_->row_ref(j);
  Real w = prob_->blocks()[ref.block].role == BlockRole::SmoothHalfSquared
               ? 1.0
               : 1.0 / beta_;
  return static_cast<Real>(component_count()) * prob_->row_sq_norm(j) * w;
}

Real SubproblemOracle::sum_component_L() const {
  Real acc = 0.0;
  for (Index j = 0; j < component_count(); ++j) acc += component_L(j);
  return acc;
}

Real SubproblemOracle::row_deriv(int block, Index local_row, Real u_value) const {
  const RowBlock& blk = prob_->blocks()[block];
  switch (blk.role) {
    case BlockRole::SmoothHalfSquared:
      return u_value - blk.target[local_row];
    case BlockRole::NonsmoothPiece: {
      Real l = lam_block_[block][local_row];
      Real sh = blk.shift.size() == 0 ? 0.0 : blk.shift[local_row];
      Real w = sh + blk.psi.prox1(u_value + beta_ * l - sh, beta_, local_row);
      return l + (u_value - w) / beta_;
    }
    case BlockRole::Constraint: {
      require(blk.set.separable(), "row_deriv: constraint set is not separable");
      Real l = lam_block_[block][local_row];
      Real w = blk.set.project1(u_value + beta_ * l, local_row);
      return l + (u_value - w) / beta_;
    }
  }
  return 0.0;
}

Vector SubproblemOracle::component_grad_phi(const Vector& x, Index j) const {
  Vector out = Vector::Zero(prob_->n());
  add_component_grad(x, j, 1.0, out);
  return out;
}

void SubproblemOracle::add_component_grad(const Vector& x, Index j, Real coef,
                                          Vector& out) const {
  require(j >= 0 && j < component_count(), "component_grad_phi: invalid index");
  require(rowwise_separable(),
          "component view requires rowwise-separable constraint sets");
  auto ref = prob_->row_ref(j);
  const SparseMatrix& B = prob_->blocks()[ref.block].B;
  Real u = B.row_dot(ref.local_row, x);
  Real d = row_deriv(ref.block, ref.local_row, u);
  B.add_scaled_row(ref.local_row, coef * static_cast<Real>(component_count()) * d,
                   out);
  Real row_nnz = static_cast<Real>(B.row_offsets()[ref.local_row + 1] -
                                   B.row_offsets()[ref.local_row]);
  work_ += row_nnz / rows_per_unit();
}

SubproblemOracle::State SubproblemOracle::make_state(const Vector& x) const {
  State s;
  s.x = x;
  refresh_state(s);
  return s;
}

void SubproblemOracle::refresh_state(State& s) const {
  s.residual = prob_->block_residuals(s.x);
  s.ball_sq.assign(prob_->blocks().size(), 0.0);
  for (std::size_t b = 0; b < prob_->blocks().size(); ++b) {
    const RowBlock& blk = prob_->blocks()[b];
    if (blk.role == BlockRole::Constraint &&
        blk.set.kind() == SimpleSet::Kind::Ball) {
      Vector z = s.residual[b] + beta_ * lam_block_[b] - blk.set.ball_center();
      s.ball_sq[b] = z.squaredNorm();
    }
  }
  s.steps_since_refresh = 0;
  charge_full_pass();
}

Real SubproblemOracle::coordinate_grad_phi(const State& s, Index i) const {
  require(i >= 0 && i < prob_->n(), "coordinate_grad_phi: invalid coordinate");
  Real acc = 0.0;
  Real touched = 0.0;
  for (const auto& e : prob_->column(i)) {
    const RowBlock& blk = prob_->blocks()[e.block];
    Real u = s.residual[e.block][e.local_row];
    Real d;
    if (blk.role == BlockRole::Constraint &&
        blk.set.kind() == SimpleSet::Kind::Ball) {
      // radial projection needs the cached segment norm
      Real l = lam_block_[e.block][e.local_row];
      Real z = u + beta_ * l;
      Real znorm = std::sqrt(std::max(s.ball_sq[e.block], 0.0));
      Real c = blk.set.ball_center()[e.local_row];
      Real r = blk.set.ball_radius();
      Real w = znorm <= r ? z : c + (r / znorm) * (z - c);
      d = l + (u - w) / beta_;
    } else {
      d = row_deriv(e.block, e.local_row, u);
    }
    acc += e.value * d;
    touched += 1.0;
  }
  work_ += touched / rows_per_unit();
  return acc;
}

void SubproblemOracle::apply_coordinate_step(State& s, Index i, Real delta) const {
  s.x[i] += delta;
  for (const auto& e : prob_->column(i)) {
    Real u_old = s.residual[e.block][e.local_row];
    Real u_new = u_old + e.value * delta;
    s.residual[e.block][e.local_row] = u_new;
    const RowBlock& blk = prob_->blocks()[e.block];
    if (blk.role == BlockRole::Constraint &&
        blk.set.kind() == SimpleSet::Kind::Ball) {
      Real l = lam_block_[e.block][e.local_row];
      Real c = blk.set.ball_center()[e.local_row];
      Real z_old = u_old + beta_ * l - c;
      Real z_new = u_new + beta_ * l - c;
      s.ball_sq[e.block] += z_new * z_new - z_old * z_old;
    }
  }
  // periodic full refresh bounds incremental float drift
  if (++s.steps_since_refresh >= 10 * prob_->n()) refresh_state(s);
}

}  // namespace ipalm
