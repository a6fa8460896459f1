#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inewt/majorant.hpp"
#include "inewt/problem.hpp"

namespace inewt {

enum class ThetaSchedule { fixed, adaptive };

/// How each linear subproblem satisfies the relative residual test.
///   iterative_inner:         preconditioned restarted GMRES, stopped at the
///                            first inner iterate within tolerance (theta = 0
///                            falls back to a direct factorization).
///   exact_plus_perturbation: exact step plus a perturbation along a seeded
///                            direction, scaled so the achieved relative
///                            residual equals the target exactly. Test-harness
///                            mode for pinning worst-case tolerance behavior.
struct StepMode {
  enum class Kind { iterative_inner, exact_plus_perturbation };
  Kind kind = Kind::iterative_inner;
  std::optional<double> target;  // pin level; defaults to the step's theta
  Vector direction;              // perturbation seed; defaults to all-ones
};

struct SolveConfig {
  double theta = 0.0;
  double rho = 0.0;
  std::optional<Vector> start_point;  // z0; defaults to x0
  int max_iterations = 100;
  double stop_residual = 1e-13;
  ThetaSchedule schedule = ThetaSchedule::fixed;
  // theta_k for the adaptive schedule; default rule is min(theta_max, r_k).
  std::function<double(int k, double residual, const Certificate&)> theta_rule;
  StepMode step_mode;
  bool enforce_certificate = true;
};

struct StepResult {
  Vector step;
  double achieved_rel_residual = 0.0;  // recomputed independently from the step
  int inner_iterations = 0;
};

struct TraceRow {
  int k = 0;
  Vector iterate;
  double dist_to_start = 0.0;          // ||z_k - z0||
  double residual_norm = 0.0;          // ||A0^{-1} F(z_k)||, A0 = F'(z0)
  double step_norm = 0.0;              // ||S_k||; zero on the terminal row
  double achieved_rel_residual = 0.0;
  double t = 0.0;                      // paired scalar state, evolved against
  double eps = 0.0;                    //   the start-shifted majorant
  double theta = 0.0;                  // theta_k used for the step from this row
};

struct IterationTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  std::string termination;
  double rho = 0.0;
  Certificate certificate;  // the certificate active during the solve
};

// One residual-controlled step at z: returns S with
//   ||A0^{-1}[F(z) + F'(z) S]|| <= theta ||A0^{-1} F(z)||
// where base is the factorization of A0 = F'(z0). Throws on a numerically
// singular Jacobian or inner-solver stagnation.
StepResult residual_controlled_step(const OperatorProblem& p, const LuFactorization& base,
                                    const Vector& z, double theta, const StepMode& mode);

// Full inexact Newton solve with fixed relative residual tolerance cfg.theta;
// records the trace together with the paired scalar states.
IterationTrace inexact_newton_solve(const OperatorProblem& p, const MajorantFunction& m,
                                    const SolveConfig& cfg);

// Same driver with the adaptive theta_k schedule (theta_k -> 0 gives the
// superlinear regime).
IterationTrace adaptive_theta_solve(const OperatorProblem& p, const MajorantFunction& m,
                                    SolveConfig cfg);

// High-accuracy exact-Newton limit (stop residual 1e-14), used as the ground
// truth x* in ratio checks. Throws if it fails to converge.
Vector reference_zero(const OperatorProblem& p, const MajorantFunction& m);

}  // namespace inewt
