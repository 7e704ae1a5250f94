#include "ipalm/diagnostics.hpp"

#include <cmath>

namespace ipalm {

namespace {

// conjugate of Psi(x) = g(x) + (beta/2)||x - anchor||^2, evaluated exactly
// through the prox of g
Real psi_conjugate(const SubproblemOracle& o, const Vector& z) {
  const SimpleFunction& g = o.problem().g();
  const Vector& a = o.anchor();
  const Real beta = o.beta();
  Real acc = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    Real xhat = g.prox1(a[i] + z[i] / beta, 1.0 / beta, i);
    acc += z[i] * xhat - g.value1(xhat, i) - 0.5 * beta * (xhat - a[i]) * (xhat - a[i]);
  }
  return acc;
}

}  // namespace

GapCertificate duality_gap_bound(const SubproblemOracle& o, const Vector& x) {
  const CompositeProblem& prob = o.problem();
  require(x.size() == prob.n(), "duality_gap_bound: dimension mismatch");

  GapCertificate cert;
  cert.primal_value = o.eval_H(x);

  // dual candidate per block: gradient of the smooth term, multiplier map of
  // the smoothed terms; each clipped into the conjugate's domain
  auto residuals = prob.block_residuals(x);
  Real dual = 0.0;
  Vector bty = Vector::Zero(prob.n());  // sum of B_j^T y_j
  const Real beta = o.beta();

  for (std::size_t b = 0; b < prob.blocks().size(); ++b) {
    const RowBlock& blk = prob.blocks()[b];
    const Vector& u = residuals[b];
    Vector y;
    Real conj = 0.0;
    switch (blk.role) {
      case BlockRole::SmoothHalfSquared: {
        y = u - blk.target;
        conj = 0.5 * y.squaredNorm() + blk.target.dot(y);
        break;
      }
      case BlockRole::NonsmoothPiece: {
        const Vector& l = o.lam_for_block(static_cast<int>(b));
        y.resize(u.size());
        for (Index i = 0; i < u.size(); ++i) {
          Real sh = blk.shift.size() == 0 ? 0.0 : blk.shift[i];
          Real w = sh + blk.psi.prox1(u[i] + beta * l[i] - sh, beta, i);
          Real cand = l[i] + (u[i] - w) / beta;
          Real yi = blk.psi.clip_to_dual_domain1(cand, i);
          y[i] = yi;
          // conjugate of the smoothed piece: psi*(y) + <shift, y> + quad
          conj += blk.psi.conjugate1(yi, i) + sh * yi +
                  0.5 * beta * (yi - l[i]) * (yi - l[i]);
        }
        break;
      }
      case BlockRole::Constraint: {
        const Vector& l = o.lam_for_block(static_cast<int>(b));
        Vector w = blk.set.project(u + beta * l);
        Vector cand = l + (u - w) / beta;
        y = blk.set.clip_to_support_domain(cand);
        conj = blk.set.support(y) + 0.5 * beta * (y - l).squaredNorm();
        break;
      }
    }
    dual -= conj;
    bty += apply(prob.block_transposed(static_cast<int>(b)), y);
  }

  dual -= psi_conjugate(o, -bty);
  cert.dual_value = dual;
  cert.gap = cert.primal_value - cert.dual_value;
  return cert;
}

std::pair<Real, Real> kkt_bounds(Real beta_s, Real dx_norm, Real dlam_norm,
                                 Real gap_bound, Real L_s) {
  Real x_bound = std::sqrt(std::max(0.0, 16.0 * L_s * gap_bound +
                                             2.0 * beta_s * beta_s * dx_norm * dx_norm));
  return {x_bound, beta_s * dlam_norm};
}

ErrorReport error_report(Real F_value, Real F_lower, Real F_upper) {
  require(F_lower > 0, "error_report: F_lower must be positive");
  require(F_lower <= F_upper, "error_report: empty bracket");
  ErrorReport rep;
  rep.F_value = F_value;
  rep.F_lower = F_lower;
  rep.F_upper = F_upper;
  rep.confidence_error = (F_upper - F_lower) / F_lower;
  if (F_value > (1.0 + rep.confidence_error) * F_upper) {
    rep.log_rel_error = std::log10((F_value - F_upper) / F_upper);
  } else {
    rep.below_confidence_level = true;
  }
  return rep;
}

}  // namespace ipalm
