#pragma once

#include <optional>
#include <vector>

#include "ipalm/prox.hpp"
#include "ipalm/types.hpp"

namespace ipalm {

// Dual variable split into the Lipschitz block (lambda1) and the
// constraint block (lambda2).
struct DualPoint {
  Vector lambda1;
  Vector lambda2;

  static DualPoint zeros(Index d1, Index d2) {
    return {Vector::Zero(d1), Vector::Zero(d2)};
  }
  Index d1() const { return lambda1.size(); }
  Index d2() const { return lambda2.size(); }
  Real squared_norm() const {
    return lambda1.squaredNorm() + lambda2.squaredNorm();
  }
  Real norm() const { return std::sqrt(squared_norm()); }
};

inline DualPoint operator-(const DualPoint& a, const DualPoint& b) {
  return {a.lambda1 - b.lambda1, a.lambda2 - b.lambda2};
}

// One segment of the Lipschitz block: psi(u - shift) over `dim` rows.
struct H1Piece {
  SimpleFunction psi;
  Vector shift;  // size 0 means no offset
  Index dim = 0;

  Real shift_at(Index i) const { return shift.size() == 0 ? 0.0 : shift[i]; }
};

// One segment of the constraint block: indicator of `set` over `dim` rows.
struct KPiece {
  SimpleSet set;
  Index dim = 0;
};

// The two-block nonsmooth map h(u) = h1(u_1) + indicator_K(u_2), with h1 and
// K each a concatenation of simple segments. d = d1 + d2 is the length of
// the stacked input u = (u_1; u_2).
class HSpec {
 public:
  HSpec() = default;
  static HSpec from_pieces(std::vector<H1Piece> pieces, std::vector<KPiece> sets);
  // single-segment convenience used by most tests
  static HSpec single(SimpleFunction h1, Index d1, std::optional<SimpleSet> K,
                      Index d2, Vector shift = {});

  Index d1() const { return d1_; }
  Index d2() const { return d2_; }
  Index d() const { return d1_ + d2_; }
  Real lipschitz_h1() const { return lip_h1_; }
  const std::vector<H1Piece>& pieces() const { return pieces_; }
  const std::vector<KPiece>& sets() const { return sets_; }

  // true when d1 == 0 and every constraint segment is a single point; the
  // carry-over bound then loses its square-root term entirely
  bool equality_only() const;
  // true when no Ball segment is present (all row maps decouple)
  bool rowwise_separable() const;

  Real h1_value(const Vector& u1) const;      // sum of psi(u_seg - shift)
  Real constraint_distance(const Vector& u2) const;  // dist(u2, K)
  DualPoint project_dual(const DualPoint& lam) const;  // clip into dom(h*)
  Real conjugate(const DualPoint& y) const;   // h*(y), +inf outside dom

 private:
  std::vector<H1Piece> pieces_;
  std::vector<KPiece> sets_;
  Index d1_ = 0;
  Index d2_ = 0;
  Real lip_h1_ = 0.0;
};

// The multiplier map: argmax_v { <v,u> - h*(v) - (beta/2)||v - lam||^2 },
// computed blockwise through the prox of beta*h.
DualPoint lambda_map(const HSpec& h, const Vector& u, const DualPoint& lam,
                     Real beta);

// Smoothed value h(u; lam, beta), evaluated through the recovered point
// u - beta*(Lambda - lam); the constraint block contributes only the
// quadratic terms since the recovered point is a projection output.
Real smoothed_value(const HSpec& h, const Vector& u, const DualPoint& lam,
                    Real beta);

struct SmoothedEval {
  Real value;
  DualPoint multiplier;
};
SmoothedEval smoothed_eval(const HSpec& h, const Vector& u, const DualPoint& lam,
                           Real beta);

}  // namespace ipalm
