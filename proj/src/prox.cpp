#include "ipalm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ipalm {

namespace {
constexpr Real kInf = std::numeric_limits<Real>::infinity();

Real soft_threshold(Real v, Real thr) {
  if (v > thr) return v - thr;
  if (v < -thr) return v + thr;
  return 0.0;  // ties resolve to 0
}
}  // namespace

SimpleFunction SimpleFunction::weighted_l1(Vector weights) {
  require_finite(weights, "weighted_l1 weights");
  require((weights.array() >= 0).all(), "weighted_l1: negative weight");
  SimpleFunction f;
  f.kind_ = Kind::WeightedL1;
  f.vec_ = std::move(weights);
  return f;
}

SimpleFunction SimpleFunction::half_squared_l2(Real weight, Vector center) {
  require(weight >= 0 && std::isfinite(weight), "half_squared_l2: bad weight");
  if (center.size() > 0) require_finite(center, "half_squared_l2 center");
  SimpleFunction f;
  f.kind_ = Kind::HalfSquaredL2;
  f.weight_ = weight;
  f.vec_ = std::move(center);
  return f;
}

SimpleFunction SimpleFunction::hinge_sum(Real scale, Vector margins) {
  require(scale >= 0 && std::isfinite(scale), "hinge_sum: bad scale");
  require_finite(margins, "hinge_sum margins");
  SimpleFunction f;
  f.kind_ = Kind::HingeSum;
  f.weight_ = scale;
  f.vec_ = std::move(margins);
  return f;
}

SimpleFunction SimpleFunction::hinge_sum(Real scale, Real margin, Index dim) {
  return hinge_sum(scale, Vector::Constant(dim, margin));
}

SimpleFunction SimpleFunction::abs_sum(Real scale) {
  require(scale >= 0 && std::isfinite(scale), "abs_sum: bad scale");
  SimpleFunction f;
  f.kind_ = Kind::AbsSum;
  f.weight_ = scale;
  return f;
}

Real SimpleFunction::value1(Real x, Index i) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::WeightedL1:
      return vec_[i] * std::abs(x);
    case Kind::AbsSum:
      return weight_ * std::abs(x);
    case Kind::HalfSquaredL2: {
      Real d = x - center_at(i);
      return 0.5 * weight_ * d * d;
    }
    case Kind::HingeSum:
      return weight_ * std::max(0.0, vec_[i] - x);
  }
  return 0.0;
}

Real SimpleFunction::value(const Vector& x) const {
  if (kind_ == Kind::Zero) return 0.0;
  Real acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) acc += value1(x[i], i);
  return acc;
}

Real SimpleFunction::prox1(Real v, Real t, Index i) const {
  switch (kind_) {
    case Kind::Zero:
      return v;
    case Kind::WeightedL1:
      return soft_threshold(v, t * vec_[i]);
    case Kind::AbsSum:
      return soft_threshold(v, t * weight_);
    case Kind::HalfSquaredL2:
      // (w/2)(x-c)^2: stationarity w(x-c) + (x-v)/t = 0
      return (v + t * weight_ * center_at(i)) / (1.0 + t * weight_);
    case Kind::HingeSum: {
      // c * max(0, m - x): three-piece formula
      Real c = weight_, m = vec_[i];
      if (v >= m) return v;
      if (v < m - c * t) return v + c * t;
      return m;
    }
  }
  return v;
}

Vector SimpleFunction::prox(const Vector& v, Real t) const {
  require(t > 0, "prox: t must be positive");
  if (kind_ == Kind::Zero) return v;
  if (kind_ != Kind::AbsSum)
    require(vec_.size() == 0 || vec_.size() == v.size(),
            "prox: parameter dimension mismatch");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = prox1(v[i], t, i);
  return out;
}

bool SimpleFunction::is_lipschitz() const {
  return kind_ != Kind::HalfSquaredL2 || weight_ == 0.0;
}

Real SimpleFunction::lipschitz_constant(Index dim) const {
  require(is_lipschitz(),
          "lipschitz_constant: HalfSquaredL2 is not Lipschitz on an unbounded domain");
  switch (kind_) {
    case Kind::Zero:
    case Kind::HalfSquaredL2:
      return 0.0;
    case Kind::WeightedL1: {
      require(vec_.size() == dim, "lipschitz_constant: weight dimension mismatch");
      return vec_.norm();  // per-coordinate subgradients bounded by w_i
    }
    case Kind::AbsSum:
      return weight_ * std::sqrt(static_cast<Real>(dim));
    case Kind::HingeSum:
      return weight_ * std::sqrt(static_cast<Real>(dim));
  }
  return 0.0;
}

Real SimpleFunction::clip_to_dual_domain1(Real y, Index i) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::WeightedL1:
      return std::clamp(y, -vec_[i], vec_[i]);
    case Kind::AbsSum:
      return std::clamp(y, -weight_, weight_);
    case Kind::HalfSquaredL2:
      return weight_ > 0 ? y : 0.0;
    case Kind::HingeSum:
      return std::clamp(y, -weight_, 0.0);
  }
  return y;
}

Real SimpleFunction::conjugate1(Real y, Index i) const {
  switch (kind_) {
    case Kind::Zero:
    case Kind::WeightedL1:
    case Kind::AbsSum:
      return 0.0;  // indicator of the dual box, zero inside
    case Kind::HalfSquaredL2: {
      if (weight_ <= 0) return 0.0;
      return y * y / (2.0 * weight_) + center_at(i) * y;
    }
    case Kind::HingeSum:
      return vec_[i] * y;  // on [-scale, 0]
  }
  return 0.0;
}

Vector SimpleFunction::clip_to_dual_domain(const Vector& y) const {
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) out[i] = clip_to_dual_domain1(y[i], i);
  return out;
}

Real SimpleFunction::conjugate(const Vector& y) const {
  Real acc = 0.0;
  for (Index i = 0; i < y.size(); ++i) acc += conjugate1(y[i], i);
  return acc;
}

Real SimpleFunction::subgradient_distance1(Real x, Real s, Index i) const {
  auto interval_dist = [](Real v, Real lo, Real hi) {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
  };
  switch (kind_) {
    case Kind::Zero:
      return std::abs(s);
    case Kind::WeightedL1:
    case Kind::AbsSum: {
      Real w = weight_at(i);
      if (x > 0) return std::abs(s - w);
      if (x < 0) return std::abs(s + w);
      return interval_dist(s, -w, w);
    }
    case Kind::HalfSquaredL2:
      return std::abs(s - weight_ * (x - center_at(i)));
    case Kind::HingeSum: {
      Real c = weight_, m = vec_[i];
      if (x < m) return std::abs(s + c);
      if (x > m) return std::abs(s);
      return interval_dist(s, -c, 0.0);
    }
  }
  return std::abs(s);
}

SimpleSet SimpleSet::point(Vector b) {
  require_finite(b, "point set");
  SimpleSet s;
  s.kind_ = Kind::Point;
  s.a_ = std::move(b);
  return s;
}

SimpleSet SimpleSet::box(Vector lower, Vector upper) {
  require_finite(lower, "box lower");
  require_finite(upper, "box upper");
  require(lower.size() == upper.size() && (lower.array() <= upper.array()).all(),
          "box: lower must not exceed upper");
  SimpleSet s;
  s.kind_ = Kind::Box;
  s.a_ = std::move(lower);
  s.b_ = std::move(upper);
  return s;
}

SimpleSet SimpleSet::nonnegative_orthant() {
  SimpleSet s;
  s.kind_ = Kind::NonNegativeOrthant;
  return s;
}

SimpleSet SimpleSet::ball(Vector center, Real radius) {
  require_finite(center, "ball center");
  require(radius >= 0 && std::isfinite(radius), "ball: bad radius");
  SimpleSet s;
  s.kind_ = Kind::Ball;
  s.a_ = std::move(center);
  s.radius_ = radius;
  return s;
}

Real SimpleSet::project1(Real v, Index i) const {
  switch (kind_) {
    case Kind::Point:
      return a_[i];
    case Kind::Box:
      return std::clamp(v, a_[i], b_[i]);
    case Kind::NonNegativeOrthant:
      return std::max(v, 0.0);
    case Kind::Ball:
      break;
  }
  throw std::logic_error("project1: set is not separable");
}

Vector SimpleSet::project(const Vector& v) const {
  if (kind_ == Kind::Ball) {
    require(v.size() == a_.size(), "project: dimension mismatch");
    Vector d = v - a_;
    Real n = d.norm();
    if (n <= radius_) return v;
    return a_ + (radius_ / n) * d;
  }
  if (kind_ != Kind::NonNegativeOrthant)
    require(v.size() == a_.size(), "project: dimension mismatch");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = project1(v[i], i);
  return out;
}

Real SimpleSet::distance(const Vector& v) const { return (v - project(v)).norm(); }

bool SimpleSet::contains(const Vector& v, Real tol) const {
  return distance(v) <= tol;
}

Real SimpleSet::support(const Vector& y) const {
  switch (kind_) {
    case Kind::Point:
      return a_.dot(y);
    case Kind::Box: {
      Real acc = 0.0;
      for (Index i = 0; i < y.size(); ++i)
        acc += y[i] > 0 ? b_[i] * y[i] : a_[i] * y[i];
      return acc;
    }
    case Kind::NonNegativeOrthant: {
      for (Index i = 0; i < y.size(); ++i)
        if (y[i] > 0) return kInf;
      return 0.0;
    }
    case Kind::Ball:
      return a_.dot(y) + radius_ * y.norm();
  }
  return 0.0;
}

Vector SimpleSet::clip_to_support_domain(const Vector& y) const {
  if (kind_ != Kind::NonNegativeOrthant) return y;
  return y.cwiseMin(0.0);
}

Vector prox(const SimpleFunction& fn, const Vector& v, Real t) {
  return fn.prox(v, t);
}

Vector project(const SimpleSet& set, const Vector& v) { return set.project(v); }

Vector prox_shifted_quadratic(const SimpleFunction& fn, const Vector& v, Real t,
                              const Vector& anchor, Real beta) {
  require(t > 0, "prox_shifted_quadratic: t must be positive");
  require(beta >= 0, "prox_shifted_quadratic: beta must be nonnegative");
  if (beta == 0) return fn.prox(v, t);
  require(anchor.size() == v.size(), "prox_shifted_quadratic: dimension mismatch");
  Real q = 1.0 / t + beta;
  Vector merged = (v / t + beta * anchor) / q;
  return fn.prox(merged, 1.0 / q);
}

Real lipschitz_constant(const SimpleFunction& fn, Index dim) {
  return fn.lipschitz_constant(dim);
}

}  // namespace ipalm
