#pragma once

#include <optional>

#include "ipalm/types.hpp"

namespace ipalm {

// Closed catalog of simple functions with closed-form proximal operators.
// Every variant also knows its value, a coordinate view (all variants are
// separable), its convex conjugate and the conjugate's domain; the latter
// two feed the smoothing identities and the duality-gap certificate.
class SimpleFunction {
 public:
  enum class Kind { Zero, WeightedL1, HalfSquaredL2, HingeSum, AbsSum };

  SimpleFunction() : kind_(Kind::Zero) {}

  static SimpleFunction zero() { return SimpleFunction(); }
  static SimpleFunction weighted_l1(Vector weights);
  static SimpleFunction half_squared_l2(Real weight, Vector center);
  static SimpleFunction hinge_sum(Real scale, Vector margins);
  static SimpleFunction hinge_sum(Real scale, Real margin, Index dim);
  static SimpleFunction abs_sum(Real scale);

  Kind kind() const { return kind_; }
  // strong-convexity modulus; positive only for the quadratic variant
  Real mu() const { return kind_ == Kind::HalfSquaredL2 ? weight_ : 0.0; }
  Real scale() const { return weight_; }
  const Vector& weights() const { return vec_; }
  const Vector& center() const { return vec_; }
  const Vector& margins() const { return vec_; }

  Real value(const Vector& x) const;
  Real value1(Real x, Index i) const;

  Vector prox(const Vector& v, Real t) const;
  Real prox1(Real v, Real t, Index i) const;

  bool is_lipschitz() const;
  Real lipschitz_constant(Index dim) const;

  // conjugate support: clip into dom(f*) and evaluate f* there
  Real conjugate1(Real y, Index i) const;
  Real clip_to_dual_domain1(Real y, Index i) const;
  Vector clip_to_dual_domain(const Vector& y) const;
  Real conjugate(const Vector& y) const;

  // distance from s to the subdifferential at x (used by prox certificates)
  Real subgradient_distance1(Real x, Real s, Index i) const;

 private:
  Kind kind_;
  Real weight_ = 0.0;  // scale for L1/hinge variants, weight for the quadratic
  Vector vec_;         // weights / center / margins depending on kind

  Real weight_at(Index i) const {
    return kind_ == Kind::WeightedL1 ? vec_[i] : weight_;
  }
  Real center_at(Index i) const {
    return vec_.size() == 0 ? 0.0 : vec_[i];
  }
};

// Simple closed convex sets with closed-form Euclidean projections.
class SimpleSet {
 public:
  enum class Kind { Point, Box, NonNegativeOrthant, Ball };

  static SimpleSet point(Vector b);
  static SimpleSet box(Vector lower, Vector upper);
  static SimpleSet nonnegative_orthant();
  static SimpleSet ball(Vector center, Real radius);

  Kind kind() const { return kind_; }
  bool separable() const { return kind_ != Kind::Ball; }
  const Vector& point_value() const { return a_; }
  const Vector& lower() const { return a_; }
  const Vector& upper() const { return b_; }
  const Vector& ball_center() const { return a_; }
  Real ball_radius() const { return radius_; }

  Vector project(const Vector& v) const;
  Real project1(Real v, Index i) const;  // separable kinds only
  Real distance(const Vector& v) const;
  bool contains(const Vector& v, Real tol) const;

  // support function and its effective domain (clip makes it finite)
  Real support(const Vector& y) const;
  Vector clip_to_support_domain(const Vector& y) const;

 private:
  Kind kind_ = Kind::NonNegativeOrthant;
  Vector a_, b_;
  Real radius_ = 0.0;
};

// argmin_x { fn(x) + (1/(2t)) ||x - v||^2 }
Vector prox(const SimpleFunction& fn, const Vector& v, Real t);

// nearest point of the set
Vector project(const SimpleSet& set, const Vector& v);

// argmin_x { fn(x) + (beta/2)||x - anchor||^2 + (1/(2t))||x - v||^2 },
// reduced to a single prox of fn
Vector prox_shifted_quadratic(const SimpleFunction& fn, const Vector& v, Real t,
                              const Vector& anchor, Real beta);

// Euclidean Lipschitz constant of fn on R^dim; throws for the quadratic.
// For the L1/hinge sums it is the Euclidean norm of the componentwise
// subgradient bounds — c*sqrt(dim) for a uniform scale c — which is tight
// along the diagonal direction.
Real lipschitz_constant(const SimpleFunction& fn, Index dim);

}  // namespace ipalm
