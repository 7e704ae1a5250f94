#pragma once

#include <optional>

#include "ipalm/oracle.hpp"

namespace ipalm {

// Weak-duality certificate for the subproblem: primal H(x) minus the value
// of a dual-feasible point constructed from x. Always an upper bound on
// H(x) - H*.
struct GapCertificate {
  Real primal_value = 0.0;
  Real dual_value = 0.0;
  Real gap = 0.0;
};

GapCertificate duality_gap_bound(const SubproblemOracle& o, const Vector& x);

// KKT residual bounds: the x-part from the certified gap and the iterate
// move, the lambda-part from the multiplier move.
std::pair<Real, Real> kkt_bounds(Real beta_s, Real dx_norm, Real dlam_norm,
                                 Real gap_bound, Real L_s);

// Bracketing-based error metric when F* is only known to lie in
// [F_lower, F_upper].
struct ErrorReport {
  Real F_value = 0.0;
  Real F_lower = 0.0;
  Real F_upper = 0.0;
  Real confidence_error = 0.0;               // (F_upper - F_lower) / F_lower
  std::optional<Real> log_rel_error;         // log10((F - F_upper)/F_upper)
  bool below_confidence_level = false;
};

ErrorReport error_report(Real F_value, Real F_lower, Real F_upper);

}  // namespace ipalm
