#pragma once

#include <functional>
#include <vector>

namespace inewt {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scaled(const Vector& a, double s);

/// Dense row-major matrix. Problem dimensions here are desk scale (n <= 50),
/// so everything is direct.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  static Matrix identity(int n);

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  int rows() const { return static_cast<int>(rows_); }
  int cols() const { return static_cast<int>(cols_); }

  Vector apply(const Vector& v) const;
  Vector apply_transpose(const Vector& v) const;
  Matrix multiply(const Matrix& rhs) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

/// LU with partial pivoting plus an explicit 1-norm reciprocal condition
/// estimate (exact inverse norm via n solves).
class LuFactorization {
 public:
  explicit LuFactorization(const Matrix& a);
  bool singular() const { return singular_; }
  double rcond() const { return rcond_; }
  Vector solve(const Vector& rhs) const;

 private:
  Matrix lu_;
  std::vector<int> pivots_;
  bool singular_ = false;
  double rcond_ = 0.0;
};

struct GmresResult {
  Vector solution;
  double relative_residual = 0.0;  // explicit, recomputed from the solution
  int iterations = 0;
  bool converged = false;
};

// Restarted GMRES on apply(x) = rhs, stopping at the first inner iterate whose
// relative residual (euclidean, against ||rhs||) drops to rel_tol.
GmresResult gmres(const std::function<Vector(const Vector&)>& apply, const Vector& rhs,
                  double rel_tol, int restart, int max_iterations);

/// Euclidean norm or the metric norm ||v|| = sqrt(v^T M v) for an SPD M.
class NormSpec {
 public:
  static NormSpec euclidean();
  static NormSpec metric(const Matrix& m);  // throws if m is not SPD

  double norm(const Vector& v) const;
  // C with ||v|| = ||C v||_2 (identity for the euclidean norm).
  Vector apply_factor(const Vector& v) const;
  Vector solve_factor(const Vector& v) const;
  bool is_euclidean() const { return euclidean_; }
  const Matrix& metric_matrix() const { return metric_; }

 private:
  bool euclidean_ = true;
  Matrix metric_;
  Matrix chol_;  // lower-triangular L with M = L L^T; C = L^T
};

// Induced operator norm of the linear map `apply` under `norm`, by power
// iteration on the symmetrized composed map.
double operator_norm(const std::function<Vector(const Vector&)>& apply, int dim,
                     const NormSpec& norm, double tol = 1e-10);

}  // namespace inewt
