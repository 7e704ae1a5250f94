#include "ipalm/ipalm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace ipalm {

void OuterParams::validate() const {
  require(beta0 > 0, "outer params: beta0 must be positive");
  require(rho > 0.5 && rho < 1.0, "outer params: rho must lie in (1/2,1)");
  require(eta > 0.0 && eta < 1.0, "outer params: eta must lie in (0,1)");
  if (!bounded_domain)
    require(eta < rho,
            "outer params: eta < rho is required unless bounded_domain is set");
  else
    require(eta <= rho,
            "outer params: eta <= rho is required even with bounded_domain");
  if (kkt_mode)
    require(eta <= rho * rho * rho,
            "outer params: kkt mode requires eta <= rho^3");
  require(m0 >= 1, "outer params: m0 must be >= 1");
  require(max_outer >= 1, "outer params: max_outer must be >= 1");
  require(target_eps > 0, "outer params: target_eps must be positive");
}

Real compute_M(Real beta_s, Real beta_next, Real lip_h1, bool equality_refinement,
               const DualPoint& lam_s, const DualPoint& lam_next,
               const DualPoint& lam_probe, const Vector& x_prev,
               const Vector& x_cur) {
  require(beta_s >= beta_next && beta_next > 0.5 * beta_s,
          "compute_M: needs beta_s >= beta_next > beta_s/2");
  DualPoint dlam = lam_next - lam_s;
  Real dlam_sq = dlam.squared_norm();
  Real probe_sq = (lam_probe - lam_next).squared_norm();
  Real dx_sq = (x_cur - x_prev).squaredNorm();

  Real M = beta_s * dlam_sq + 0.5 * (beta_s - beta_next) * probe_sq +
           beta_s * beta_s / (2.0 * beta_next - beta_s) * dx_sq;
  if (!equality_refinement) {
    Real a = (beta_s + beta_next) * lip_h1 +
             (beta_s * lam_s.lambda1 - beta_next * lam_next.lambda1).norm();
    Real b = (beta_s * lam_s.lambda2 - beta_next * lam_next.lambda2).norm();
    M += std::sqrt(dlam_sq) * std::sqrt(a * a + b * b);
  }
  return M;
}

long inner_budget(Real eps_s, Real eps_next, Real M_s, Real K_next,
                  long safety_cap) {
  require(eps_s > 0 && eps_next > 0 && K_next >= 1.0 && M_s >= 0,
          "inner_budget: invalid arguments");
  Real ratio = (4.0 * eps_s + 2.0 * M_s) / eps_next;
  long t = 0;
  if (ratio > 1.0) t = static_cast<long>(std::ceil(std::log2(ratio)));
  if (t <= 0) return 1;

  auto halvings = [&](long m) {
    return static_cast<long>(std::floor(static_cast<Real>(m) / K_next));
  };
  long m = static_cast<long>(std::ceil(K_next * static_cast<Real>(t)));
  while (halvings(m) < t) ++m;  // guard against ceil rounding down through floor
  while (m > 1 && halvings(m - 1) >= t) --m;
  return std::clamp<long>(m, 1, safety_cap);
}

namespace {

// one proximal-gradient step on H from x; also reports the step length used
Vector prox_gradient_probe(const SubproblemOracle& o, const Vector& x, Real& t_out) {
  Real L = o.L_phi();
  Real t = L > 0 ? 1.0 / L : 1.0 / o.mu_total();
  t_out = t;
  Vector grad = o.grad_phi(x);
  return o.prox_P(x - t * grad, t);
}

}  // namespace

Real estimate_eps0(const SubproblemOracle& o, const Vector& x0) {
  Real gap_cert = duality_gap_bound(o, x0).gap;

  Real t = 0;
  Vector x1 = prox_gradient_probe(o, x0, t);
  Real H0 = o.eval_H(x0);
  Real H1 = o.eval_H(x1);
  Real L = o.L_phi();
  Real g_norm = (1.0 / t + L) * (x0 - x1).norm();
  Real descent_bound = H0 - H1 + g_norm * g_norm / (2.0 * o.mu_total());

  Real bound = std::min(std::max(gap_cert, 0.0), std::max(descent_bound, 0.0));
  // keep the schedule well defined even when x0 is already optimal
  return std::max(bound, 1e-14 * (1.0 + std::abs(H0)));
}

DualPoint multiplier_update(const CompositeProblem& problem, const Vector& x,
                            const DualPoint& lam, Real beta) {
  Vector u = problem.stack_h_input(problem.block_residuals(x));
  return lambda_map(problem.h_spec(), u, lam, beta);
}

Vector kkt_prox_gradient_step(const SubproblemOracle& o, const Vector& x_tilde) {
  Real L = o.L_phi();
  Real beta = o.beta();
  Real q = L + beta;
  Vector grad = o.grad_phi(x_tilde);
  Vector v = (L * x_tilde - grad + beta * o.anchor()) / q;
  Vector x = o.problem().g().prox(v, 1.0 / q);
  // the step is a minimizer of a majorant of H at x_tilde, so it cannot increase H
  Real H_before = o.eval_H(x_tilde);
  Real H_after = o.eval_H(x);
  if (H_after > H_before + 1e-9 * (1.0 + std::abs(H_before)))
    throw std::logic_error("kkt step increased the subproblem objective");
  return x;
}

namespace {

struct LoopState {
  Vector x_prev, x_cur;
  DualPoint lam;
  Real beta, eps;
  Real K_cur;
  long m_cur;
  Real M_carry = 0.0;
  long inner_cum = 0;
  double work = 0.0;
};

SolveResult solve_impl(const CompositeProblem& problem,
                       const InnerSolverConfig& cfg, const OuterParams& params,
                       std::optional<Vector> x_init,
                       std::optional<DualPoint> lam_init) {
  params.validate();
  const HSpec& h = problem.h_spec();
  const bool deterministic_solver =
      cfg.kind == SolverKind::APG || cfg.kind == SolverKind::BregmanPG;

  auto t_start = std::chrono::steady_clock::now();
  auto wall_ms = [&]() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t_start)
        .count();
  };

  // x^{-1}: user supplied, or 0 pulled into dom(g) by one prox step
  Vector x_start = x_init.has_value()
                       ? *x_init
                       : Vector(problem.g().prox(Vector::Zero(problem.n()), 1.0));
  require(x_start.size() == problem.n(), "ipalm_solve: x_init dimension mismatch");
  require_finite(x_start, "ipalm_solve x_init");
  DualPoint lam0 = lam_init.has_value()
                       ? h.project_dual(*lam_init)
                       : DualPoint::zeros(problem.d1(), problem.d2());

  SolveResult out;
  ConvergenceTrace& trace = out.trace;

  LoopState st;
  st.lam = lam0;
  st.beta = params.beta0;
  st.x_prev = x_start;

  Real eps0_eff = params.eps0;
  long schedule_step = 0;  // exponent in the beta/eps schedules

  // warm start on H_0
  {
    SubproblemOracle oracle0(problem, st.lam, st.beta, x_start);
    st.K_cur = estimate_K(cfg, oracle0).K;
    long m0 = std::clamp<long>(params.m0, 1, cfg.safety_cap);
    RunResult rr = run(cfg, oracle0, x_start, m0);
    st.x_cur = params.kkt_mode ? kkt_prox_gradient_step(oracle0, rr.x) : rr.x;
    st.m_cur = rr.iterations;
    st.inner_cum = rr.iterations;
    if (eps0_eff <= 0) eps0_eff = estimate_eps0(oracle0, st.x_cur);
    st.eps = eps0_eff;
    st.work = oracle0.work_units();
  }

  Real F_prev = std::numeric_limits<Real>::infinity();
  trace.status = SolveStatus::IterationLimit;

  for (long s = 0;; ++s) {
    auto residuals = problem.block_residuals(st.x_cur);
    Vector u = problem.stack_h_input(residuals);
    DualPoint lam_next = lambda_map(h, u, st.lam, st.beta);

    // feasibility surrogate holds surely; a violation means a broken build
    Real infeas = h.constraint_distance(u.tail(problem.d2()));
    Real dual_move2 = st.beta * (lam_next.lambda2 - st.lam.lambda2).norm();
    if (infeas > dual_move2 * (1.0 + 1e-9) + 1e-12)
      throw std::logic_error("feasibility surrogate violated");

    Real L_s = problem.L_f() +
               problem.op_norm_A() * problem.op_norm_A() / st.beta;
    Real dlam_norm = (lam_next - st.lam).norm();
    auto [kkt_x, kkt_lam] = kkt_bounds(
        st.beta, (st.x_cur - st.x_prev).norm(), dlam_norm, st.eps, L_s);
    Real F_cur = problem.objective(st.x_cur);

    trace.records.push_back({s, st.beta, st.eps, st.K_cur, st.m_cur, st.M_carry,
                             F_cur, infeas, kkt_x, kkt_lam, st.inner_cum,
                             wall_ms(), st.work});

    if (s >= 1 && st.beta * dlam_norm <= params.target_eps &&
        std::abs(F_cur - F_prev) <= params.target_eps) {
      trace.status = SolveStatus::Converged;
      out.lam = lam_next;
      break;
    }
    if (s >= params.max_outer) {
      trace.status = SolveStatus::IterationLimit;
      out.lam = lam_next;
      break;
    }
    F_prev = F_cur;

    Real beta_next = params.rho * st.beta;
    Real eps_next = params.eta * st.eps;
    ++schedule_step;
    // schedules are multiplicative; keep them glued to the closed form
    if (std::abs(st.beta * params.rho -
                 params.beta0 * std::pow(params.rho, schedule_step)) >
        1e-12 * beta_next)
      throw std::logic_error("beta schedule drifted from the closed form");

    DualPoint lam_probe = lambda_map(h, u, lam_next, beta_next);
    Real M = compute_M(st.beta, beta_next, h.lipschitz_h1(), h.equality_only(),
                       st.lam, lam_next, lam_probe, st.x_prev, st.x_cur);

    SubproblemOracle oracle(problem, lam_next, beta_next, st.x_cur);
    Real K_next = estimate_K(cfg, oracle).K;
    long m_next = inner_budget(st.eps, eps_next, M, K_next, cfg.safety_cap);

    // the structured duality-gap certificate covers the whole catalog
    std::optional<EarlyStop> early;
    if (cfg.use_early_stop)
      early = EarlyStop{
          [&oracle](const Vector& xx) { return duality_gap_bound(oracle, xx).gap; },
          eps_next};

    RunResult rr = run(cfg, oracle, st.x_cur, m_next, early);
    Vector x_new =
        params.kkt_mode ? kkt_prox_gradient_step(oracle, rr.x) : rr.x;

    // deterministic solvers certify the gap invariant; a provable violation
    // of eps means the initial estimate was too small, so double it and
    // restart the schedule from the current point
    if (deterministic_solver) {
      Real tt = 0;
      Vector probe = prox_gradient_probe(oracle, x_new, tt);
      Real gap_lower = oracle.eval_H(x_new) - oracle.eval_H(probe);
      if (gap_lower > eps_next * (1.0 + 1e-6)) {
        ++trace.schedule_restarts;
        if (trace.schedule_restarts > 40) {
          trace.status = SolveStatus::Aborted;
          out.lam = lam_next;
          st.work += oracle.work_units();
          break;
        }
        eps0_eff *= 2.0;
        schedule_step = 0;
        st.x_prev = st.x_cur;
        st.x_cur = x_new;
        st.lam = lam_next;
        st.beta = params.beta0;
        st.eps = eps0_eff;
        st.K_cur = K_next;
        st.m_cur = m_next;
        st.M_carry = M;
        st.inner_cum += rr.iterations;
        st.work += oracle.work_units();
        continue;
      }
    }

    st.x_prev = st.x_cur;
    st.x_cur = std::move(x_new);
    st.lam = lam_next;
    st.beta = beta_next;
    st.eps = eps_next;
    st.K_cur = K_next;
    st.m_cur = m_next;
    st.M_carry = M;
    st.inner_cum += rr.iterations;
    st.work += oracle.work_units();
  }

  trace.work_units = st.work;
  out.x = st.x_cur;
  return out;
}

}  // namespace

SolveResult ipalm_solve(const CompositeProblem& problem,
                        const InnerSolverConfig& cfg, const OuterParams& params,
                        std::optional<Vector> x_init,
                        std::optional<DualPoint> lam_init) {
  return solve_impl(problem, cfg, params, std::move(x_init), std::move(lam_init));
}

SolveResult ipalm_kkt_solve(const CompositeProblem& problem,
                            const InnerSolverConfig& cfg, OuterParams params,
                            std::optional<Vector> x_init,
                            std::optional<DualPoint> lam_init) {
  params.kkt_mode = true;
  return solve_impl(problem, cfg, params, std::move(x_init), std::move(lam_init));
}

void ConvergenceTrace::write_csv(std::ostream& os, bool with_timing) const {
  os << "s,beta_s,eps_s,K_s,m_s,M_s,F,infeas,kkt_x_bound,kkt_lam_bound,"
        "inner_cum,wall_ms\n";
  char buf[512];
  for (const auto& r : records) {
    double wall = with_timing ? r.wall_ms : 0.0;
    std::snprintf(buf, sizeof(buf),
                  "%ld,%.17g,%.17g,%.17g,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,"
                  "%.3f\n",
                  r.s, r.beta, r.eps, r.K, r.m, r.M, r.F, r.infeas, r.kkt_x,
                  r.kkt_lam, r.inner_cum, wall);
    os << buf;
  }
}

}  // namespace ipalm
