#pragma once

#include <functional>
#include <optional>

#include "ipalm/oracle.hpp"

namespace ipalm {

enum class SolverKind { APG, APPROX, LKatyusha, BregmanPG };

struct InnerSolverConfig {
  SolverKind kind = SolverKind::APG;
  Index tau = 1;                  // L-Katyusha batch size, tau <= floor(sqrt(m))
  std::uint64_t seed = 0;
  long safety_cap = 10'000'000;   // hard per-call iteration cap
  bool use_early_stop = true;     // duality-gap early stopping inside outer loops
  // Bregman solver: diagonal reference 0.5 * sum w_i (.)^2 plus the relative
  // smoothness/strong-convexity constants of f with respect to it; mu_rel = 0
  // falls back to the quadratic-growth constant of the prox term
  Vector bpg_reference_weights;   // size 0 = all ones
  Real bpg_L_rel = -1.0;          // < 0 = use L_f
  Real bpg_mu_rel = 0.0;

  void validate(Index m_components) const;
};

struct RateConstant {
  Real K = 1.0;  // iterations per guaranteed halving of the expected gap
};

// Per-solver rate constant for the current subproblem.
RateConstant estimate_K(const InnerSolverConfig& cfg, const SubproblemOracle& o);

// Certified upper bound on the current gap; the solver stops early once the
// bound drops below the threshold.
struct EarlyStop {
  std::function<Real(const Vector&)> gap_bound;
  Real threshold = 0.0;
};

struct RunResult {
  Vector x;
  long iterations = 0;
  bool early_stopped = false;
  bool truncated = false;  // budget exceeded the safety cap
};

// Run min(budget, safety_cap) iterations from x0, warm-started; budget 0
// returns x0 unchanged. Randomized solvers are bit-reproducible per seed.
RunResult run(const InnerSolverConfig& cfg, SubproblemOracle& o, const Vector& x0,
              long budget, const std::optional<EarlyStop>& early_stop = {});

}  // namespace ipalm
