#include "inewt/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "inewt/scalar_dynamics.hpp"

namespace inewt {

namespace {

constexpr double kSingularRcond = 1e3 * std::numeric_limits<double>::epsilon();

// Slack for comparisons against derived thresholds (they carry the
// root-finding tolerance of the certificate derivation).
bool within(double value, double bound) { return value <= bound * (1.0 + 1e-9) + 1e-15; }

Vector precond_residual_vector(const OperatorProblem& p, const LuFactorization& base,
                               const Vector& z, const Vector& f_z, const Vector& step) {
  const Matrix jac = p.jacobian_at(z);
  return base.solve(add(f_z, jac.apply(step)));
}

}  // namespace

StepResult residual_controlled_step(const OperatorProblem& p, const LuFactorization& base,
                                    const Vector& z, double theta, const StepMode& mode) {
  if (theta < 0.0 || !std::isfinite(theta))
    throw std::invalid_argument("residual_controlled_step: theta must be >= 0");
  const std::size_t n = static_cast<std::size_t>(p.dimension);
  const Vector f_z = p.residual_at(z);
  const double r_norm = p.norm.norm(base.solve(f_z));

  StepResult result;
  result.step.assign(n, 0.0);
  if (r_norm == 0.0) return result;  // F(z) = 0: S = 0 meets any tolerance

  const Matrix jac = p.jacobian_at(z);
  const LuFactorization jac_lu(jac);
  if (jac_lu.singular() || jac_lu.rcond() < kSingularRcond) {
    std::ostringstream os;
    os << "step failure: jacobian numerically singular (rcond = " << jac_lu.rcond() << ")";
    throw std::runtime_error(os.str());
  }

  if (mode.kind == StepMode::Kind::exact_plus_perturbation) {
    result.step = jac_lu.solve(scaled(f_z, -1.0));
    const double target = std::min(mode.target.value_or(theta), theta);
    if (target > 0.0) {
      Vector dir = mode.direction;
      if (dir.empty()) dir.assign(n, 1.0);
      if (dir.size() != n)
        throw std::invalid_argument("residual_controlled_step: perturbation direction has wrong size");
      double image_norm = p.norm.norm(base.solve(jac.apply(dir)));
      if (image_norm == 0.0) {
        // Degenerate seed: fall back to the first basis direction with a
        // nonzero image (the Jacobian is nonsingular, so one exists).
        for (std::size_t j = 0; j < n; ++j) {
          dir.assign(n, 0.0);
          dir[j] = 1.0;
          image_norm = p.norm.norm(base.solve(jac.apply(dir)));
          if (image_norm > 0.0) break;
        }
      }
      const double alpha = target * r_norm / image_norm;
      result.step = add(result.step, scaled(dir, alpha));
    }
  } else if (theta == 0.0) {
    result.step = jac_lu.solve(scaled(f_z, -1.0));
  } else {
    // GMRES on the preconditioned system; the euclidean residual of the
    // transformed system is exactly the preconditioned residual in the
    // problem norm, so the stopping test is the method's own test.
    auto apply = [&](const Vector& v) { return p.norm.apply_factor(base.solve(jac.apply(v))); };
    const Vector rhs = p.norm.apply_factor(base.solve(scaled(f_z, -1.0)));
    const int restart = std::min(p.dimension, 30);
    const int cap = 10 * p.dimension;
    const GmresResult inner = gmres(apply, rhs, theta, restart, cap);
    result.inner_iterations = inner.iterations;
    if (!inner.converged) {
      std::ostringstream os;
      os << "step failure: inner solver stagnated after " << inner.iterations
         << " iterations (best achieved relative residual " << inner.relative_residual << ")";
      throw std::runtime_error(os.str());
    }
    result.step = inner.solution;
  }

  result.achieved_rel_residual =
      p.norm.norm(precond_residual_vector(p, base, z, f_z, result.step)) / r_norm;
  return result;
}

namespace {

IterationTrace solve_driver(const OperatorProblem& p, const MajorantFunction& m, const SolveConfig& cfg) {
  if (cfg.max_iterations < 0) throw std::invalid_argument("solve: max_iterations must be >= 0");
  IterationTrace trace;
  trace.rho = cfg.rho;
  trace.certificate = derive_certificate(m, cfg.rho);
  const Certificate& cert = trace.certificate;

  const Vector z0 = cfg.start_point.value_or(p.base_point);
  if (z0.size() != static_cast<std::size_t>(p.dimension))
    throw std::invalid_argument("solve: start point has wrong dimension");
  const double start_dist = p.norm.norm(sub(z0, p.base_point));
  if (!within(start_dist, cfg.rho))
    throw std::invalid_argument("solve: start point outside the declared perturbation radius");
  if (cfg.enforce_certificate && cfg.schedule == ThetaSchedule::fixed && !within(cfg.theta, cert.theta_max)) {
    std::ostringstream os;
    os << "solve: theta = " << cfg.theta << " exceeds theta_max = " << cert.theta_max;
    throw std::invalid_argument(os.str());
  }

  const MajorantFunction shifted = shift_majorant(m, cfg.rho);
  const Matrix a0 = p.jacobian_at(z0);
  const LuFactorization base(a0);
  if (base.singular() || base.rcond() < kSingularRcond)
    throw std::runtime_error("solve: F'(z0) numerically singular");

  MajorantState state;  // (0, 0) seed
  double envelope = m.value_at(0.0) + 2.0 * cfg.rho;
  Vector z = z0;

  for (int k = 0;; ++k) {
    const Vector f_z = p.residual_at(z);
    const double residual = p.norm.norm(base.solve(f_z));
    const double dist = p.norm.norm(sub(z, z0));

    TraceRow row;
    row.k = k;
    row.iterate = z;
    row.dist_to_start = dist;
    row.residual_norm = residual;
    row.t = state.t;
    row.eps = state.eps;
    trace.rows.push_back(row);

    if (cfg.enforce_certificate) {
      if (!within(residual, envelope)) {
        std::ostringstream os;
        os << "solve: residual envelope ((1+theta^2)/2)^k (f(0)+2rho) violated at step " << k
           << " (residual " << residual << " > " << envelope << ")";
        throw std::runtime_error(os.str());
      }
      if (!within(dist, cert.lambda)) {
        std::ostringstream os;
        os << "solve: containment ||z_k - z0|| < lambda violated at step " << k << " (distance "
           << dist << " > " << cert.lambda << ")";
        throw std::runtime_error(os.str());
      }
    }

    if (residual <= cfg.stop_residual) {
      trace.converged = true;
      trace.termination = "stop_residual";
      break;
    }
    if (k >= cfg.max_iterations) {
      trace.termination = "max_iterations";
      break;
    }

    double theta_k = cfg.theta;
    if (cfg.schedule == ThetaSchedule::adaptive) {
      theta_k = cfg.theta_rule ? cfg.theta_rule(k, residual, cert)
                               : std::min(cert.theta_max, residual);
      theta_k = std::min(std::max(theta_k, 0.0), cert.theta_max);
    }

    const StepResult step = residual_controlled_step(p, base, z, theta_k, cfg.step_mode);
    if (cfg.enforce_certificate && step.achieved_rel_residual > theta_k + 1e-12) {
      std::ostringstream os;
      os << "solve: relative residual tolerance violated at step " << k << " (achieved "
         << step.achieved_rel_residual << " > theta_k " << theta_k << ")";
      throw std::runtime_error(os.str());
    }

    TraceRow& current = trace.rows.back();
    current.step_norm = p.norm.norm(step.step);
    current.achieved_rel_residual = step.achieved_rel_residual;
    current.theta = theta_k;

    z = add(z, step.step);
    state = n_theta_step(shifted, cert, std::min(theta_k, cert.theta_max), state);
    envelope *= 0.5 * (1.0 + theta_k * theta_k);
  }
  return trace;
}

}  // namespace

IterationTrace inexact_newton_solve(const OperatorProblem& p, const MajorantFunction& m,
                                    const SolveConfig& cfg) {
  return solve_driver(p, m, cfg);
}

IterationTrace adaptive_theta_solve(const OperatorProblem& p, const MajorantFunction& m,
                                    SolveConfig cfg) {
  cfg.schedule = ThetaSchedule::adaptive;
  return solve_driver(p, m, cfg);
}

Vector reference_zero(const OperatorProblem& p, const MajorantFunction& m) {
  SolveConfig cfg;
  cfg.theta = 0.0;
  cfg.stop_residual = 1e-14;
  cfg.max_iterations = 200;
  const IterationTrace trace = inexact_newton_solve(p, m, cfg);
  if (!trace.converged) throw std::runtime_error("reference_zero: exact Newton run did not converge");
  return trace.rows.back().iterate;
}

}  // namespace inewt
