#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "inewt/majorant.hpp"
#include "inewt/problem.hpp"
#include "inewt/solver.hpp"

namespace inewt {

/// Outcome of one inequality probe. Slack is bound minus measured (signed);
/// a probe passes iff min_slack >= -tolerance and no sample was rejected for
/// violating the probe's precondition.
struct ProbeReport {
  std::string name;
  int samples = 0;
  int rejected = 0;
  double min_slack = 0.0;
  double max_slack = 0.0;
  std::optional<int> first_violation;
  std::string detail;
  double tolerance = 1e-10;
  bool pass() const;
};

inline constexpr std::uint64_t kDefaultProbeSeed = 1729;

// Seeded, reproducible sample generators (hand-rolled generator so sequences
// are platform-independent). Distances are measured in the problem norm.
std::vector<std::pair<Vector, double>> banach_samples(const OperatorProblem& p,
                                                      const MajorantFunction& m, int count,
                                                      std::uint64_t seed = kDefaultProbeSeed);
std::vector<std::pair<Vector, Vector>> linearization_samples(const OperatorProblem& p, int count,
                                                             std::uint64_t seed = kDefaultProbeSeed);
std::vector<Vector> envelope_samples(const OperatorProblem& p, int count,
                                     std::uint64_t seed = kDefaultProbeSeed);

// ||F'(x)^{-1} F'(x0)|| <= 1/(-f'(t)) for samples (x, t) with ||x - x0|| <= t < t_bar.
ProbeReport probe_banach_bound(const OperatorProblem& p, const MajorantFunction& m,
                               const std::vector<std::pair<Vector, double>>& samples,
                               double tolerance = 1e-10);

// ||A0^{-1} E_F(y, x)|| <= e_f(t + s, t), and for s > 0 also
// <= (1/2) [(f'(s+t) - f'(t)) / s] ||y - x||^2, with t = ||x - x0||, s = ||y - x||.
ProbeReport probe_linearization_bounds(const OperatorProblem& p, const MajorantFunction& m,
                                       const std::vector<std::pair<Vector, Vector>>& pairs,
                                       double tolerance = 1e-10);

// -f(||y - x0||) <= ||A0^{-1} F(y)|| <= f(||y - x0||) + 2 ||y - x0|| and
// ||A0^{-1} F'(y)|| <= 2 + f'(||y - x0||) for y in B(x0, R).
ProbeReport probe_residual_envelope(const OperatorProblem& p, const MajorantFunction& m,
                                    const std::vector<Vector>& points, double tolerance = 1e-10);

/// Per-step trace checks, everything recomputed from first principles (fresh
/// F, F', f evaluations; nothing shared with the solver). Rows whose residual
/// is below the near-convergence cutoff are excluded from ratio checks.
struct TraceCheckBundle {
  ProbeReport k_membership;          // ||z_k - z0|| <= t_k and r_k <= g(t_k) + eps_k
  ProbeReport residual_envelope;     // r_k <= prod_j ((1+theta_j^2)/2) (f(0) + 2 rho)
  ProbeReport step_bounds;           // ||z_{k+1} - z_k|| <= t_{k+1} - t_k
  ProbeReport contraction_shifted;   // composite contraction, shifted-majorant constants
  ProbeReport contraction_base;      // same bound with base-majorant constants; the two
                                     //   coincide at rho = 0 and are reported separately
  ProbeReport qlinear;               // Q-linear ratio bound when theta < kappa/(4+kappa)
  bool h4_holds = false;             // lambda_rho < R - rho (contraction checks need it)
  bool qlinear_applicable = false;
  double ratio_cutoff = 1e-12;
  bool all_pass() const;
};

TraceCheckBundle check_trace(const OperatorProblem& p, const MajorantFunction& m,
                             const Certificate& cert, const IterationTrace& trace,
                             const Vector& x_star, double tolerance = 1e-10);

}  // namespace inewt
