#include "ipalm/smoothing.hpp"

#include <cmath>
#include <limits>

namespace ipalm {

HSpec HSpec::from_pieces(std::vector<H1Piece> pieces, std::vector<KPiece> sets) {
  HSpec h;
  Real lip_sq = 0.0;
  for (auto& p : pieces) {
    require(p.dim >= 0, "HSpec: negative piece dimension");
    require(p.shift.size() == 0 || p.shift.size() == p.dim,
            "HSpec: shift dimension mismatch");
    require(p.psi.is_lipschitz(), "HSpec: h1 segment must be Lipschitz");
    Real lip = p.psi.lipschitz_constant(p.dim);
    lip_sq += lip * lip;
    h.d1_ += p.dim;
  }
  for (auto& s : sets) {
    require(s.dim >= 0, "HSpec: negative set dimension");
    h.d2_ += s.dim;
  }
  h.lip_h1_ = std::sqrt(lip_sq);
  h.pieces_ = std::move(pieces);
  h.sets_ = std::move(sets);
  return h;
}

HSpec HSpec::single(SimpleFunction h1, Index d1, std::optional<SimpleSet> K,
                    Index d2, Vector shift) {
  std::vector<H1Piece> pieces;
  std::vector<KPiece> sets;
  if (d1 > 0) pieces.push_back({std::move(h1), std::move(shift), d1});
  if (K.has_value()) {
    require(d2 > 0, "HSpec::single: constraint block needs d2 > 0");
    sets.push_back({*K, d2});
  }
  return from_pieces(std::move(pieces), std::move(sets));
}

bool HSpec::equality_only() const {
  if (d1_ > 0) return false;
  for (const auto& s : sets_)
    if (s.set.kind() != SimpleSet::Kind::Point) return false;
  return true;
}

bool HSpec::rowwise_separable() const {
  for (const auto& s : sets_)
    if (!s.set.separable()) return false;
  return true;
}

Real HSpec::h1_value(const Vector& u1) const {
  require(u1.size() == d1_, "h1_value: dimension mismatch");
  Real acc = 0.0;
  Index off = 0;
  for (const auto& p : pieces_) {
    for (Index i = 0; i < p.dim; ++i)
      acc += p.psi.value1(u1[off + i] - p.shift_at(i), i);
    off += p.dim;
  }
  return acc;
}

Real HSpec::constraint_distance(const Vector& u2) const {
  require(u2.size() == d2_, "constraint_distance: dimension mismatch");
  Real acc = 0.0;
  Index off = 0;
  for (const auto& s : sets_) {
    Vector seg = u2.segment(off, s.dim);
    Real d = s.set.distance(seg);
    acc += d * d;
    off += s.dim;
  }
  return std::sqrt(acc);
}

DualPoint HSpec::project_dual(const DualPoint& lam) const {
  require(lam.d1() == d1_ && lam.d2() == d2_, "project_dual: dimension mismatch");
  DualPoint out = lam;
  Index off = 0;
  for (const auto& p : pieces_) {
    for (Index i = 0; i < p.dim; ++i)
      out.lambda1[off + i] = p.psi.clip_to_dual_domain1(lam.lambda1[off + i], i);
    off += p.dim;
  }
  off = 0;
  for (const auto& s : sets_) {
    Vector seg = lam.lambda2.segment(off, s.dim);
    out.lambda2.segment(off, s.dim) = s.set.clip_to_support_domain(seg);
    off += s.dim;
  }
  return out;
}

Real HSpec::conjugate(const DualPoint& y) const {
  Real acc = 0.0;
  Index off = 0;
  for (const auto& p : pieces_) {
    for (Index i = 0; i < p.dim; ++i) {
      Real yi = y.lambda1[off + i];
      // h(u) = psi(u - b) has conjugate psi*(y) + <b, y>
      acc += p.psi.conjugate1(yi, i) + p.shift_at(i) * yi;
    }
    off += p.dim;
  }
  off = 0;
  for (const auto& s : sets_) {
    acc += s.set.support(y.lambda2.segment(off, s.dim));
    off += s.dim;
  }
  return acc;
}

SmoothedEval smoothed_eval(const HSpec& h, const Vector& u, const DualPoint& lam,
                           Real beta) {
  require(beta > 0, "smoothed_eval: beta must be positive");
  require(u.size() == h.d(), "smoothed_eval: dimension mismatch");
  require(lam.d1() == h.d1() && lam.d2() == h.d2(),
          "smoothed_eval: multiplier dimension mismatch");

  SmoothedEval out;
  out.value = 0.0;
  out.multiplier = DualPoint::zeros(h.d1(), h.d2());

  Index off = 0;
  for (const auto& p : h.pieces()) {
    for (Index i = 0; i < p.dim; ++i) {
      Real ur = u[off + i];
      Real lr = lam.lambda1[off + i];
      Real b = p.shift_at(i);
      Real w = b + p.psi.prox1(ur + beta * lr - b, beta, i);
      // the maximizer lies in dom(psi*) exactly; the clip removes float dust
      Real mult = p.psi.clip_to_dual_domain1(lr + (ur - w) / beta, i);
      out.multiplier.lambda1[off + i] = mult;
      out.value += p.psi.value1(w - b, i) + 0.5 * beta * (mult * mult - lr * lr);
    }
    off += p.dim;
  }

  off = 0;
  for (const auto& s : h.sets()) {
    Vector useg = u.segment(h.d1() + off, s.dim);
    Vector lseg = lam.lambda2.segment(off, s.dim);
    Vector w = s.set.project(useg + beta * lseg);
    Vector mult =
        s.set.clip_to_support_domain(lseg + (useg - w) / beta);
    out.multiplier.lambda2.segment(off, s.dim) = mult;
    out.value += 0.5 * beta * (mult.squaredNorm() - lseg.squaredNorm());
    off += s.dim;
  }
  return out;
}

DualPoint lambda_map(const HSpec& h, const Vector& u, const DualPoint& lam,
                     Real beta) {
  return smoothed_eval(h, u, lam, beta).multiplier;
}

Real smoothed_value(const HSpec& h, const Vector& u, const DualPoint& lam,
                    Real beta) {
  return smoothed_eval(h, u, lam, beta).value;
}

}  // namespace ipalm
