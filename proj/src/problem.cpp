#include "inewt/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace inewt {

Matrix finite_difference_jacobian(const OperatorProblem& p, const Vector& x) {
  const int n = p.dimension;
  Matrix jac(n, n);
  for (int j = 0; j < n; ++j) {
    const double h = 6e-6 * std::max(1.0, std::abs(x[static_cast<std::size_t>(j)]));
    Vector hi = x, lo = x;
    hi[static_cast<std::size_t>(j)] += h;
    lo[static_cast<std::size_t>(j)] -= h;
    const Vector f_hi = p.residual_at(hi);
    const Vector f_lo = p.residual_at(lo);
    for (int i = 0; i < n; ++i)
      jac(i, j) = (f_hi[static_cast<std::size_t>(i)] - f_lo[static_cast<std::size_t>(i)]) / (2.0 * h);
  }
  return jac;
}

void validate_problem(const OperatorProblem& p) {
  if (p.dimension < 1) throw std::invalid_argument("problem: dimension must be >= 1");
  if (!p.residual_at || !p.jacobian_at)
    throw std::invalid_argument("problem: residual_at and jacobian_at required");
  if (p.base_point.size() != static_cast<std::size_t>(p.dimension))
    throw std::invalid_argument("problem: base_point size does not match dimension");
  if (!(p.domain_radius > 0.0))
    throw std::invalid_argument("problem: domain_radius must be positive");

  const Matrix jac = p.jacobian_at(p.base_point);
  if (jac.rows() != p.dimension || jac.cols() != p.dimension)
    throw std::invalid_argument("problem: jacobian_at(x0) has wrong shape");
  const LuFactorization lu(jac);
  if (lu.singular() || lu.rcond() < 1e3 * std::numeric_limits<double>::epsilon())
    throw std::invalid_argument("problem: jacobian_at(x0) is numerically singular");

  const Matrix fd = finite_difference_jacobian(p, p.base_point);
  double scale = 1.0;
  for (int i = 0; i < p.dimension; ++i)
    for (int j = 0; j < p.dimension; ++j) scale = std::max(scale, std::abs(jac(i, j)));
  for (int i = 0; i < p.dimension; ++i)
    for (int j = 0; j < p.dimension; ++j) {
      const double diff = std::abs(jac(i, j) - fd(i, j));
      if (diff > 1e-5 * scale) {
        std::ostringstream os;
        os << "problem: jacobian/finite-difference mismatch at (" << i << "," << j << "): "
           << jac(i, j) << " vs " << fd(i, j);
        throw std::invalid_argument(os.str());
      }
    }
}

}  // namespace inewt
