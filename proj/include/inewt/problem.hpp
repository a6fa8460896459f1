#pragma once

#include <functional>

#include "inewt/linalg.hpp"

namespace inewt {

/// Finite-dimensional nonlinear map F with its Jacobian, a base point, the
/// radius of the ball around the base point contained in the domain, and the
/// norm all distances and residuals are measured in.
struct OperatorProblem {
  int dimension = 0;
  std::function<Vector(const Vector&)> residual_at;  // F(x)
  std::function<Matrix(const Vector&)> jacobian_at;  // F'(x)
  Vector base_point;                                 // x0
  double domain_radius = 0.0;                        // R
  NormSpec norm = NormSpec::euclidean();
};

// Central-difference Jacobian of residual_at.
Matrix finite_difference_jacobian(const OperatorProblem& p, const Vector& x);

// Construction contract: shapes consistent, F'(x0) nonsingular (by
// factorization), and F'(x0) within 1e-5 of the finite-difference Jacobian.
// Throws std::invalid_argument naming the failed check.
void validate_problem(const OperatorProblem& p);

}  // namespace inewt
