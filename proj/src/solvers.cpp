#include "ipalm/solvers.hpp"

#include <cmath>
#include <iostream>

namespace ipalm {

void InnerSolverConfig::validate(Index m_components) const {
  require(safety_cap >= 1, "solver config: safety_cap must be >= 1");
  require(tau >= 1, "solver config: tau must be >= 1");
  if (kind == SolverKind::LKatyusha) {
    require(m_components >= 1, "L-Katyusha needs at least one component");
    Index cap = static_cast<Index>(std::floor(
        std::sqrt(static_cast<Real>(m_components))));
    require(tau <= std::max<Index>(cap, 1),
            "solver config: tau must not exceed floor(sqrt(m))");
  }
}

RateConstant estimate_K(const InnerSolverConfig& cfg, const SubproblemOracle& o) {
  const Real mu = o.mu_total();
  Real K = 1.0;
  switch (cfg.kind) {
    case SolverKind::APG:
      K = 2.0 * std::sqrt(2.0 * o.L_phi() / mu) + 1.0;
      break;
    case SolverKind::APPROX: {
      Real n = static_cast<Real>(o.problem().n());
      K = 2.0 * n * std::sqrt(2.0 * o.max_v_coordinate() / mu + 2.0) + 1.0;
      break;
    }
    case SolverKind::LKatyusha: {
      cfg.validate(o.component_count());
      Real m = static_cast<Real>(o.component_count());
      Real sumL = o.sum_component_L();
      K = 10.0 * std::max(m, std::sqrt(sumL / mu)) / static_cast<Real>(cfg.tau) +
          1.0;
      break;
    }
    case SolverKind::BregmanPG: {
      Real L_rel = cfg.bpg_L_rel < 0 ? o.problem().L_f() : cfg.bpg_L_rel;
      Real a2 = o.problem().op_norm_A();
      Real C = std::max(a2 * a2 / o.beta(), L_rel);
      // with mu_rel unknown the prox term alone gives quadratic growth mu/2
      // with respect to the total reference
      Real denom = cfg.bpg_mu_rel > 0 ? std::min(mu, cfg.bpg_mu_rel) : 0.5 * mu;
      K = 2.0 * C / denom + 1.0;
      break;
    }
  }
  return {std::max(K, 1.0)};
}

namespace {

long effective_budget(const InnerSolverConfig& cfg, long budget, bool& truncated) {
  if (budget > cfg.safety_cap) {
    std::cerr << "[ipalm] inner budget " << budget << " truncated to safety cap "
              << cfg.safety_cap << "\n";
    truncated = true;
    return cfg.safety_cap;
  }
  return budget;
}

// FISTA with a function-value monotone safeguard and fixed-interval restart.
RunResult run_apg(const InnerSolverConfig& cfg, SubproblemOracle& o,
                  const Vector& x0, long budget,
                  const std::optional<EarlyStop>& early_stop) {
  RunResult res;
  res.x = x0;
  long n_iter = effective_budget(cfg, budget, res.truncated);
  if (n_iter == 0) return res;

  const Real L = o.L_phi();
  const Real mu = o.mu_total();
  const Real step = L > 0 ? 1.0 / L : 1e12 / mu;
  const long restart_interval =
      L > 0 ? std::max<long>(1, static_cast<long>(std::ceil(
                                    2.0 * std::sqrt(2.0 * L / mu))))
            : 1;
  const long check_interval = std::max<long>(1, restart_interval / 8);

  Vector x = x0;
  Real H_x = o.eval_H(x);
  Vector y = x;
  Real t_acc = 1.0;
  long since_restart = 0;

  for (long k = 0; k < n_iter; ++k) {
    Vector grad = o.grad_phi(y);
    Vector z_new = o.prox_P(y - step * grad, step);
    Real H_z = o.eval_H(z_new);
    Vector x_new;
    Real H_new;
    if (H_z <= H_x) {
      x_new = z_new;
      H_new = H_z;
    } else {
      x_new = x;
      H_new = H_x;
    }
    Real t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    y = x_new + (t_acc / t_new) * (z_new - x_new) +
        ((t_acc - 1.0) / t_new) * (x_new - x);
    x = std::move(x_new);
    H_x = H_new;
    t_acc = t_new;
    ++res.iterations;

    if (++since_restart >= restart_interval) {
      since_restart = 0;
      t_acc = 1.0;
      y = x;
    }
    if (early_stop && (k + 1) % check_interval == 0) {
      if (early_stop->gap_bound(x) <= early_stop->threshold) {
        res.early_stopped = true;
        break;
      }
    }
  }
  res.x = std::move(x);
  return res;
}

// Accelerated randomized coordinate descent, uniform single-coordinate
// sampling, restarted every epoch. The iterate is carried as
// x = theta^2 * u + z with per-block residuals for both u and z.
RunResult run_approx(const InnerSolverConfig& cfg, SubproblemOracle& o,
                     const Vector& x0, long budget,
                     const std::optional<EarlyStop>& early_stop) {
  require(o.rowwise_separable(),
          "APPROX requires rowwise-separable constraint sets");
  RunResult res;
  res.x = x0;
  long n_iter = effective_budget(cfg, budget, res.truncated);
  if (n_iter == 0) return res;

  const Index n = o.problem().n();
  const Real nn = static_cast<Real>(n);
  const Real mu = o.mu_total();
  const Real maxv = o.max_v_coordinate();
  const long epoch = std::max<long>(
      1, static_cast<long>(std::ceil(2.0 * nn * std::sqrt(2.0 * maxv / mu + 2.0))));
  const long check_interval = std::max<long>(n, epoch / 8);

  Rng rng(cfg.seed);
  Vector x_epoch = x0;

  auto z_state = o.make_state(x_epoch);
  auto u_state = o.make_state(Vector::Zero(n));
  Real theta = 1.0 / nn;
  long since_restart = 0;

  auto materialize = [&](Real th) {
    Vector x = th * th * u_state.x + z_state.x;
    return x;
  };

  for (long k = 0; k < n_iter; ++k) {
    Index i = rng.uniform_index(n);
    // directional derivative at x_hat = theta^2 u + z along e_i
    Real g = 0.0;
    for (const auto& e : o.problem().column(i)) {
      Real u_hat = theta * theta * u_state.residual[e.block][e.local_row] +
                   z_state.residual[e.block][e.local_row];
      g += e.value * o.row_deriv(e.block, e.local_row, u_hat);
    }
    o.charge_nnz(static_cast<Real>(o.problem().column(i).size()));
    Real vi = o.v_coordinate(i);
    if (vi <= 0) vi = mu;  // decoupled coordinate, any positive curvature works
    Real coef = nn * theta * vi;
    Real zi = z_state.x[i];
    Real z_new = o.prox_P1(zi - g / coef, 1.0 / coef, i);
    Real delta = z_new - zi;
    o.apply_coordinate_step(z_state, i, delta);
    o.apply_coordinate_step(u_state, i, -(1.0 - nn * theta) / (theta * theta) * delta);
    ++res.iterations;

    bool restart = ++since_restart >= epoch;
    bool check = early_stop && (k + 1) % check_interval == 0;
    if (restart || check || k + 1 == n_iter) {
      // the iterate after this step is theta_k^2 u + z with the theta just used
      Vector x_cur = materialize(theta);
      if (check && early_stop->gap_bound(x_cur) <= early_stop->threshold) {
        res.early_stopped = true;
        res.x = std::move(x_cur);
        return res;
      }
      if (k + 1 == n_iter) {
        res.x = std::move(x_cur);
        return res;
      }
      if (restart) {
        x_epoch = std::move(x_cur);
        z_state = o.make_state(x_epoch);
        u_state = o.make_state(Vector::Zero(n));
        theta = 1.0 / nn;
        since_restart = 0;
        continue;
      }
    }
    theta = 0.5 * (std::sqrt(theta * theta * theta * theta + 4.0 * theta * theta) -
                   theta * theta);
  }
  res.x = materialize(theta);  // not reached for positive budgets
  return res;
}

// Loopless Katyusha with nonuniform with-replacement sampling.
RunResult run_lkatyusha(const InnerSolverConfig& cfg, SubproblemOracle& o,
                        const Vector& x0, long budget,
                        const std::optional<EarlyStop>& early_stop) {
  cfg.validate(o.component_count());
  require(o.rowwise_separable(),
          "L-Katyusha requires rowwise-separable constraint sets");
  RunResult res;
  res.x = x0;
  long n_iter = effective_budget(cfg, budget, res.truncated);
  if (n_iter == 0) return res;

  const Index m = o.component_count();
  const Real mm = static_cast<Real>(m);
  const Real tau = static_cast<Real>(cfg.tau);
  const Real mu = o.mu_total();

  // sampling distribution p_j = L_j / sum(L); inverse-CDF on the seeded stream
  std::vector<Real> Lj(m), cdf(m);
  Real sumL = 0.0;
  for (Index j = 0; j < m; ++j) {
    Lj[j] = o.component_L(j);
    sumL += Lj[j];
  }
  require(sumL > 0, "L-Katyusha: all components are zero");
  Real acc = 0.0;
  for (Index j = 0; j < m; ++j) {
    acc += Lj[j] / sumL;
    cdf[j] = acc;
  }
  cdf[m - 1] = 1.0;

  const Real Lbar = sumL / mm;
  const Real theta2 = 1.0 / (2.0 * tau);
  const Real theta1 = std::min(1.0, std::sqrt(mu * mm / Lbar)) * theta2;
  const Real p_update = tau / mm;
  const Real alpha = 1.0 / (3.0 * theta1 * Lbar);
  const Real K_est = 10.0 * std::max(mm, std::sqrt(sumL / mu)) / tau + 1.0;
  const long check_interval = std::max<long>(
      {static_cast<long>(mm / tau), static_cast<long>(K_est / 8.0), 8});

  Rng rng(cfg.seed);
  auto sample = [&]() -> Index {
    Real r = rng.uniform();
    return static_cast<Index>(
        std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
  };

  Vector y = x0, z = x0, w = x0;
  // one full pass per snapshot: residuals, per-row derivatives and the full
  // gradient, all charged as m component evaluations
  Vector grad_w(o.problem().n());
  std::vector<Real> deriv_w(m);
  auto take_snapshot = [&](const Vector& at) {
    auto resblocks = o.problem().block_residuals(at);
    grad_w.setZero();
    for (Index j = 0; j < m; ++j) {
      auto ref = o.problem().row_ref(j);
      deriv_w[j] = o.row_deriv(ref.block, ref.local_row,
                               resblocks[ref.block][ref.local_row]);
      o.problem().blocks()[ref.block].B.add_scaled_row(ref.local_row, deriv_w[j],
                                                       grad_w);
    }
    o.charge_full_pass();
  };
  take_snapshot(w);

  for (long k = 0; k < n_iter; ++k) {
    Vector xk = theta1 * z + theta2 * w + (1.0 - theta1 - theta2) * y;
    Vector g = grad_w;
    Real nnz_touched = 0.0;
    for (Index t = 0; t < cfg.tau; ++t) {
      Index j = sample();
      auto ref = o.problem().row_ref(j);
      const SparseMatrix& B = o.problem().blocks()[ref.block].B;
      Real u = B.row_dot(ref.local_row, xk);
      Real d = o.row_deriv(ref.block, ref.local_row, u);
      Real pj = Lj[j] / sumL;
      B.add_scaled_row(ref.local_row, (d - deriv_w[j]) / (tau * pj), g);
      nnz_touched += static_cast<Real>(B.row_offsets()[ref.local_row + 1] -
                                       B.row_offsets()[ref.local_row]);
    }
    o.charge_nnz(nnz_touched);
    Vector z_new = o.prox_P(z - alpha * g, alpha);
    y = xk + theta1 * (z_new - z);
    z = std::move(z_new);
    ++res.iterations;

    if (rng.uniform() < p_update) {
      w = y;
      take_snapshot(w);
    }
    if (early_stop && (k + 1) % check_interval == 0) {
      if (early_stop->gap_bound(y) <= early_stop->threshold) {
        res.early_stopped = true;
        break;
      }
    }
  }
  res.x = y;
  return res;
}

// Bregman proximal gradient with a diagonal-quadratic reference; with unit
// weights this is exactly the proximal gradient method with step 1/(2C).
RunResult run_bpg(const InnerSolverConfig& cfg, SubproblemOracle& o,
                  const Vector& x0, long budget,
                  const std::optional<EarlyStop>& early_stop) {
  RunResult res;
  res.x = x0;
  long n_iter = effective_budget(cfg, budget, res.truncated);
  if (n_iter == 0) return res;

  const Index n = o.problem().n();
  Vector wref = cfg.bpg_reference_weights;
  if (wref.size() == 0) wref = Vector::Ones(n);
  require(wref.size() == n && (wref.array() > 0).all(),
          "BregmanPG: reference weights must be positive");

  Real L_rel = cfg.bpg_L_rel < 0 ? o.problem().L_f() : cfg.bpg_L_rel;
  Real a2 = o.problem().op_norm_A();
  const Real C = std::max(a2 * a2 / o.beta(), L_rel);
  const Real beta = o.beta();
  const Vector& anchor = o.anchor();
  const RateConstant K = estimate_K(cfg, o);
  const long check_interval = std::max<long>(1, static_cast<long>(K.K / 8.0));

  Vector x = x0;
  for (long k = 0; k < n_iter; ++k) {
    Vector grad = o.grad_phi(x);
    // per-coordinate: min g_i(y) + (beta/2)(y-anchor)^2 + grad_i y
    //                + (C(1+w_i)/2)(y-x_i)^2
    Vector x_new(n);
    for (Index i = 0; i < n; ++i) {
      Real q = beta + C * (1.0 + wref[i]);
      Real v = (beta * anchor[i] + C * (1.0 + wref[i]) * x[i] - grad[i]) / q;
      x_new[i] = o.problem().g().prox1(v, 1.0 / q, i);
    }
    x = std::move(x_new);
    ++res.iterations;
    if (early_stop && (k + 1) % check_interval == 0) {
      if (early_stop->gap_bound(x) <= early_stop->threshold) {
        res.early_stopped = true;
        break;
      }
    }
  }
  res.x = std::move(x);
  return res;
}

}  // namespace

RunResult run(const InnerSolverConfig& cfg, SubproblemOracle& o, const Vector& x0,
              long budget, const std::optional<EarlyStop>& early_stop) {
  require(budget >= 0, "run: negative budget");
  require(x0.size() == o.problem().n(), "run: x0 dimension mismatch");
  switch (cfg.kind) {
    case SolverKind::APG:
      return run_apg(cfg, o, x0, budget, early_stop);
    case SolverKind::APPROX:
      return run_approx(cfg, o, x0, budget, early_stop);
    case SolverKind::LKatyusha:
      return run_lkatyusha(cfg, o, x0, budget, early_stop);
    case SolverKind::BregmanPG:
      return run_bpg(cfg, o, x0, budget, early_stop);
  }
  throw std::logic_error("run: unknown solver kind");
}

}  // namespace ipalm
