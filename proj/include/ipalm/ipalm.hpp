#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "ipalm/diagnostics.hpp"
#include "ipalm/solvers.hpp"

namespace ipalm {

struct OuterParams {
  Real beta0 = 1.0;
  Real rho = 0.9;       // smoothing decay, in (1/2, 1)
  Real eta = 0.8;       // accuracy decay, in (0, 1); eta < rho unless bounded_domain
  long m0 = 100;        // warm-start inner iterations
  Real eps0 = -1.0;     // initial gap bound; <= 0 means estimate it
  long max_outer = 100;
  Real target_eps = 1e-8;
  bool kkt_mode = false;      // extra proximal-gradient step, needs eta <= rho^3
  bool bounded_domain = false;  // permits eta == rho

  void validate() const;
};

enum class SolveStatus { Converged, IterationLimit, Aborted };

struct OuterRecord {
  long s = 0;
  Real beta = 0, eps = 0, K = 0;
  long m = 0;
  Real M = 0, F = 0, infeas = 0, kkt_x = 0, kkt_lam = 0;
  long inner_cum = 0;
  Real wall_ms = 0;
  double work_cum = 0;  // cumulative oracle work units; not a CSV column
};

struct ConvergenceTrace {
  std::vector<OuterRecord> records;
  SolveStatus status = SolveStatus::IterationLimit;
  long schedule_restarts = 0;  // eps0 contradiction restarts (rare)
  double work_units = 0.0;     // component-gradient-equivalent work

  // fixed column order; with_timing=false zeroes the wall column so traces
  // are byte-identical across runs
  void write_csv(std::ostream& os, bool with_timing = true) const;
};

struct SolveResult {
  Vector x;
  DualPoint lam;
  ConvergenceTrace trace;
};

// Carry-over bound between consecutive subproblems. The square-root term is
// dropped when the whole nonsmooth map is an equality indicator.
Real compute_M(Real beta_s, Real beta_next, Real lip_h1, bool equality_refinement,
               const DualPoint& lam_s, const DualPoint& lam_next,
               const DualPoint& lam_probe, const Vector& x_prev,
               const Vector& x_cur);

// Smallest integer m with 2^floor(m/K) * eps_next / 2 >= 2 eps_s + M,
// clamped to [1, safety_cap].
long inner_budget(Real eps_s, Real eps_next, Real M_s, Real K_next,
                  long safety_cap);

// Certified upper bound on H(x0) - H*: the duality-gap certificate and a
// descent-lemma bound from one proximal-gradient probe, whichever is smaller.
Real estimate_eps0(const SubproblemOracle& o, const Vector& x0);

// Next multiplier from the current iterate: the multiplier map at the
// stacked residuals.
DualPoint multiplier_update(const CompositeProblem& problem, const Vector& x,
                            const DualPoint& lam, Real beta);

// The extra step of the KKT variant: one proximal-gradient step on the
// subproblem at x_tilde, using the per-iteration smoothness bound; never
// increases the subproblem objective.
Vector kkt_prox_gradient_step(const SubproblemOracle& o, const Vector& x_tilde);

SolveResult ipalm_solve(const CompositeProblem& problem,
                        const InnerSolverConfig& cfg, const OuterParams& params,
                        std::optional<Vector> x_init = {},
                        std::optional<DualPoint> lam_init = {});

// Variant with the extra proximal-gradient step; requires eta <= rho^3.
SolveResult ipalm_kkt_solve(const CompositeProblem& problem,
                            const InnerSolverConfig& cfg, OuterParams params,
                            std::optional<Vector> x_init = {},
                            std::optional<DualPoint> lam_init = {});

}  // namespace ipalm
