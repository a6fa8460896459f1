#include "inewt/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace inewt {

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector add(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vector sub(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vector scaled(const Vector& a, double s) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(static_cast<std::size_t>(rows)),
      cols_(static_cast<std::size_t>(cols)),
      a_(rows_ * cols_, fill) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimensions");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::apply(const Vector& v) const {
  if (v.size() != cols_) throw std::invalid_argument("Matrix::apply: size mismatch");
  Vector r(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += a_[i * cols_ + j] * v[j];
    r[i] = s;
  }
  return r;
}

Vector Matrix::apply_transpose(const Vector& v) const {
  if (v.size() != rows_) throw std::invalid_argument("Matrix::apply_transpose: size mismatch");
  Vector r(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r[j] += a_[i * cols_ + j] * v[i];
  return r;
}

Matrix Matrix::multiply(const Matrix& rhs) const {
  if (cols_ != static_cast<std::size_t>(rhs.rows()))
    throw std::invalid_argument("Matrix::multiply: size mismatch");
  Matrix out(rows(), rhs.cols());
  for (int i = 0; i < rows(); ++i)
    for (int k = 0; k < cols(); ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < rhs.cols(); ++j) out(i, j) += aik * rhs(k, j);
    }
  return out;
}

namespace {

double norm1_columns(const Matrix& a) {
  double best = 0.0;
  for (int j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

LuFactorization::LuFactorization(const Matrix& a) : lu_(a), pivots_(static_cast<std::size_t>(a.rows())) {
  const int n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("LuFactorization: matrix must be square");
  const double a_norm1 = norm1_columns(a);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(lu_(k, k));
    for (int i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        piv = i;
      }
    pivots_[static_cast<std::size_t>(k)] = piv;
    if (best == 0.0) {
      singular_ = true;
      rcond_ = 0.0;
      return;
    }
    if (piv != k)
      for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
    for (int i = k + 1; i < n; ++i) {
      lu_(i, k) /= lu_(k, k);
      const double lik = lu_(i, k);
      for (int j = k + 1; j < n; ++j) lu_(i, j) -= lik * lu_(k, j);
    }
  }
  // Exact 1-norm of the inverse via n solves.
  double inv_norm1 = 0.0;
  for (int j = 0; j < n; ++j) {
    Vector e(static_cast<std::size_t>(n), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    const Vector col = solve(e);
    double s = 0.0;
    for (double v : col) s += std::abs(v);
    inv_norm1 = std::max(inv_norm1, s);
  }
  const double denom = a_norm1 * inv_norm1;
  rcond_ = denom > 0.0 && std::isfinite(denom) ? 1.0 / denom : 0.0;
}

Vector LuFactorization::solve(const Vector& rhs) const {
  if (singular_) throw std::runtime_error("LuFactorization::solve: matrix is singular");
  const int n = lu_.rows();
  Vector x = rhs;
  for (int k = 0; k < n; ++k) {
    const int piv = pivots_[static_cast<std::size_t>(k)];
    if (piv != k) std::swap(x[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(piv)]);
    for (int i = k + 1; i < n; ++i) x[static_cast<std::size_t>(i)] -= lu_(i, k) * x[static_cast<std::size_t>(k)];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= lu_(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / lu_(i, i);
  }
  return x;
}

GmresResult gmres(const std::function<Vector(const Vector&)>& apply, const Vector& rhs,
                  double rel_tol, int restart, int max_iterations) {
  const std::size_t n = rhs.size();
  GmresResult result;
  result.solution.assign(n, 0.0);
  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    result.converged = true;
    return result;
  }
  const double target = rel_tol * rhs_norm;
  int total_iters = 0;

  while (total_iters < max_iterations) {
    Vector residual = sub(rhs, apply(result.solution));
    double beta = norm2(residual);
    if (beta <= target) break;

    const int m = std::min<int>(restart, max_iterations - total_iters);
    std::vector<Vector> basis;
    basis.push_back(scaled(residual, 1.0 / beta));
    std::vector<std::vector<double>> hess(static_cast<std::size_t>(m) + 1,
                                          std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<double> cs(static_cast<std::size_t>(m), 0.0), sn(static_cast<std::size_t>(m), 0.0);
    std::vector<double> g(static_cast<std::size_t>(m) + 1, 0.0);
    g[0] = beta;
    int j = 0;
    for (; j < m; ++j) {
      ++total_iters;
      Vector w = apply(basis[static_cast<std::size_t>(j)]);
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        const double h = dot(w, basis[static_cast<std::size_t>(i)]);
        hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = h;
        w = sub(w, scaled(basis[static_cast<std::size_t>(i)], h));
      }
      const double h_next = norm2(w);
      hess[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(j)] = h_next;
      // Apply accumulated Givens rotations to the new column.
      for (int i = 0; i < j; ++i) {
        const double t1 = cs[static_cast<std::size_t>(i)] * hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                          sn[static_cast<std::size_t>(i)] * hess[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)];
        const double t2 = -sn[static_cast<std::size_t>(i)] * hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                          cs[static_cast<std::size_t>(i)] * hess[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)];
        hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = t1;
        hess[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)] = t2;
      }
      const double denom = std::hypot(hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)], h_next);
      if (denom == 0.0) { ++j; break; }
      cs[static_cast<std::size_t>(j)] = hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] / denom;
      sn[static_cast<std::size_t>(j)] = h_next / denom;
      hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = denom;
      g[static_cast<std::size_t>(j) + 1] = -sn[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(j)] = cs[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];

      const double est = std::abs(g[static_cast<std::size_t>(j) + 1]);
      if (h_next == 0.0 || est <= target) { ++j; break; }
      basis.push_back(scaled(w, 1.0 / h_next));
    }
    // Back-substitute for the projected solution and update.
    std::vector<double> y(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < j; ++k) s -= hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(i)] = s / hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < j; ++i)
      result.solution = add(result.solution, scaled(basis[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]));
  }

  result.iterations = total_iters;
  result.relative_residual = norm2(sub(rhs, apply(result.solution))) / rhs_norm;
  result.converged = result.relative_residual <= rel_tol * (1.0 + 1e-12) + 1e-15;
  return result;
}

NormSpec NormSpec::euclidean() { return NormSpec{}; }

NormSpec NormSpec::metric(const Matrix& m) {
  const int n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("NormSpec::metric: matrix must be square");
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(m(i, j)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("NormSpec::metric: matrix must be symmetric");
  // Cholesky M = L L^T.
  Matrix chol(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= chol(i, k) * chol(j, k);
      if (i == j) {
        if (!(s > 0.0)) throw std::invalid_argument("NormSpec::metric: matrix not positive definite");
        chol(i, i) = std::sqrt(s);
      } else {
        chol(i, j) = s / chol(j, j);
      }
    }
  }
  NormSpec spec;
  spec.euclidean_ = false;
  spec.metric_ = m;
  spec.chol_ = chol;
  return spec;
}

double NormSpec::norm(const Vector& v) const {
  if (euclidean_) return norm2(v);
  return norm2(apply_factor(v));
}

Vector NormSpec::apply_factor(const Vector& v) const {
  if (euclidean_) return v;
  // C = L^T (upper triangular).
  const int n = chol_.rows();
  Vector r(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = i; j < n; ++j) s += chol_(j, i) * v[static_cast<std::size_t>(j)];
    r[static_cast<std::size_t>(i)] = s;
  }
  return r;
}

Vector NormSpec::solve_factor(const Vector& v) const {
  if (euclidean_) return v;
  // Solve L^T x = v by back substitution.
  const int n = chol_.rows();
  Vector x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = v[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= chol_(j, i) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / chol_(i, i);
  }
  return x;
}

double operator_norm(const std::function<Vector(const Vector&)>& apply, int dim,
                     const NormSpec& norm, double tol) {
  if (dim < 1) throw std::invalid_argument("operator_norm: dimension must be >= 1");
  // Form B = C T C^{-1} column by column; the induced norm is sigma_max(B).
  Matrix b(dim, dim);
  for (int j = 0; j < dim; ++j) {
    Vector e(static_cast<std::size_t>(dim), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    const Vector col = norm.apply_factor(apply(norm.solve_factor(e)));
    for (int i = 0; i < dim; ++i) b(i, j) = col[static_cast<std::size_t>(i)];
  }
  // Power iteration on B^T B with a fixed pseudo-random start.
  Vector v(static_cast<std::size_t>(dim));
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (auto& x : v) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x = 1.0 + static_cast<double>(state >> 40) * 0x1p-24;
  }
  double vn = norm2(v);
  for (auto& x : v) x /= vn;
  double lambda_prev = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Vector w = b.apply_transpose(b.apply(v));
    const double lambda = dot(v, w);
    const double wn = norm2(w);
    if (wn == 0.0) return 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / wn;
    if (it > 2 && std::abs(lambda - lambda_prev) <= tol * std::max(1.0, std::abs(lambda))) {
      lambda_prev = lambda;
      break;
    }
    lambda_prev = lambda;
  }
  return std::sqrt(std::max(lambda_prev, 0.0));
}

}  // namespace inewt
