#pragma once

#include "ipalm/problem.hpp"

namespace ipalm {

// The outer-iteration objective
//   H(x) = phi(x) + P(x)
//   phi(x) = f(x) + h(Ax; lam, beta)       (smooth part)
//   P(x)   = g(x) + (beta/2)||x - anchor||^2
// with full-gradient, coordinate and finite-sum access patterns. One oracle
// per thread; the shared problem is immutable.
class SubproblemOracle {
 public:
  SubproblemOracle(const CompositeProblem& problem, DualPoint lam, Real beta,
                   Vector anchor);

  const CompositeProblem& problem() const { return *prob_; }
  const DualPoint& lam() const { return lam_; }
  Real beta() const { return beta_; }
  const Vector& anchor() const { return anchor_; }

  Real eval_H(const Vector& x) const;
  Real eval_phi(const Vector& x) const;
  Vector grad_phi(const Vector& x) const;
  Vector prox_P(const Vector& v, Real t) const;
  Real prox_P1(Real v, Real t, Index i) const;

  // rate-constant ingredients
  Real L_phi() const { return prob_->L_f() + sq(prob_->op_norm_A()) / beta_; }
  Real mu_total() const { return prob_->mu_g() + beta_; }
  Real v_coordinate(Index i) const {
    return prob_->col_sq_smooth()[i] + prob_->col_sq_smoothed()[i] / beta_;
  }
  Real max_v_coordinate() const;

  // finite-sum view: one component per stacked row, phi = (1/m) sum phi^j
  Index component_count() const { return prob_->total_rows(); }
  Real component_L(Index j) const;
  Real sum_component_L() const;
  Vector component_grad_phi(const Vector& x, Index j) const;
  // sparse accumulation used by the stochastic solver: out += coef * grad phi^j(x)
  void add_component_grad(const Vector& x, Index j, Real coef, Vector& out) const;

  // derivative of the j-th stacked row's term at residual value u (separable
  // rows only); multiplied by the row this gives that row's gradient piece
  Real row_deriv(int block, Index local_row, Real u_value) const;
  bool rowwise_separable() const { return prob_->h_spec().rowwise_separable(); }

  // residual-backed iterate for coordinate methods; caches B_j x per block
  // plus the squared norms any Ball constraint needs
  struct State {
    Vector x;
    std::vector<Vector> residual;
    std::vector<Real> ball_sq;  // per constraint block, ||u + beta*lam - c||^2
    long steps_since_refresh = 0;
  };
  State make_state(const Vector& x) const;
  void refresh_state(State& s) const;
  Real coordinate_grad_phi(const State& s, Index i) const;
  void apply_coordinate_step(State& s, Index i, Real delta) const;

  // work accounting: one unit = one average-density row touched (a component
  // gradient); full passes cost m units, coordinate steps their share
  double work_units() const { return work_; }
  void reset_work() { work_ = 0.0; }
  void charge_full_pass() const { work_ += static_cast<double>(component_count()); }
  void charge_nnz(Real nnz_touched) const { work_ += nnz_touched / rows_per_unit(); }

  const Vector& lam_for_block(int b) const { return lam_block_[b]; }

 private:
  const CompositeProblem* prob_;
  DualPoint lam_;
  Real beta_;
  Vector anchor_;
  std::vector<Vector> lam_block_;
  mutable double work_ = 0.0;

  static Real sq(Real v) { return v * v; }
  Real rows_per_unit() const {
    return prob_->total_nnz() > 0
               ? prob_->total_nnz() / static_cast<Real>(prob_->total_rows())
               : 1.0;
  }
};

}  // namespace ipalm
