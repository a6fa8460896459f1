#include "inewt/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "inewt/rootfind.hpp"

namespace inewt {

namespace {

constexpr double kBisectTol = 1e-12;

// Largest admissible evaluation point: the derivation evaluates limits toward
// the open right endpoint here.
double eval_cap(double radius) { return radius * (1.0 - 1e-12); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive and finite, got " << v;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckEntry& c) { return c.pass; });
}

const CheckEntry* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

MajorantFunction quadratic_majorant(double lipschitz, double b) {
  require_positive(lipschitz, "L");
  require_positive(b, "b");
  if (!(b * lipschitz < 0.5)) {
    std::ostringstream os;
    os << "bL < 1/2 violated (b*L = " << b * lipschitz << ")";
    throw std::invalid_argument(os.str());
  }
  MajorantFunction m;
  m.domain_radius = 1.0 / lipschitz;
  m.value_at = [lipschitz, b](double t) { return 0.5 * lipschitz * t * t - t + b; };
  m.derivative_at = [lipschitz](double t) { return lipschitz * t - 1.0; };
  m.left_second_at = [lipschitz](double) { return lipschitz; };
  m.family = MajorantFamily::quadratic;
  m.param_primary = lipschitz;
  m.param_b = b;
  return m;
}

MajorantFunction smale_majorant(double gamma, double b) {
  require_positive(gamma, "gamma");
  require_positive(b, "b");
  const double cap = 3.0 - 2.0 * std::sqrt(2.0);
  if (!(gamma * b < cap)) {
    std::ostringstream os;
    os << "gamma*b < 3 - 2*sqrt(2) violated (gamma*b = " << gamma * b << ")";
    throw std::invalid_argument(os.str());
  }
  MajorantFunction m;
  m.domain_radius = 1.0 / gamma;
  m.value_at = [gamma, b](double t) { return t / (1.0 - gamma * t) - 2.0 * t + b; };
  m.derivative_at = [gamma](double t) {
    const double d = 1.0 - gamma * t;
    return 1.0 / (d * d) - 2.0;
  };
  m.left_second_at = [gamma](double t) {
    const double d = 1.0 - gamma * t;
    return 2.0 * gamma / (d * d * d);
  };
  m.family = MajorantFamily::smale;
  m.param_primary = gamma;
  m.param_b = b;
  return m;
}

MajorantFunction self_concordant_majorant(double b) {
  require_positive(b, "b");
  const double cap = 3.0 - 2.0 * std::sqrt(2.0);
  if (!(b < cap)) {
    std::ostringstream os;
    os << "b < 3 - 2*sqrt(2) violated (b = " << b << ")";
    throw std::invalid_argument(os.str());
  }
  MajorantFunction m = smale_majorant(1.0, b);
  m.family = MajorantFamily::self_concordant;
  m.param_primary = 1.0;
  return m;
}

MajorantFunction make_canonical(MajorantFamily family, double param_primary, double b) {
  switch (family) {
    case MajorantFamily::quadratic:
      return quadratic_majorant(param_primary, b);
    case MajorantFamily::smale:
      return smale_majorant(param_primary, b);
    case MajorantFamily::self_concordant:
      return self_concordant_majorant(b);
    case MajorantFamily::custom:
      break;
  }
  throw std::invalid_argument("make_canonical: custom is not a canonical family");
}

MajorantFunction custom_majorant(double domain_radius, std::function<double(double)> value,
                                 std::function<double(double)> derivative,
                                 std::function<double(double)> left_second) {
  require_positive(domain_radius, "domain_radius");
  if (!value || !derivative) throw std::invalid_argument("custom_majorant: value and derivative required");
  MajorantFunction m;
  m.domain_radius = domain_radius;
  m.value_at = std::move(value);
  m.derivative_at = std::move(derivative);
  if (left_second) {
    m.left_second_at = std::move(left_second);
  } else {
    auto fp = m.derivative_at;
    m.left_second_at = [fp](double t) {
      const double h = 1e-6 * std::max(1.0, t);
      return (fp(t + h) - fp(t - h)) / (2.0 * h);
    };
  }
  m.family = MajorantFamily::custom;
  return m;
}

ValidationReport validate_majorant(const MajorantFunction& m, int grid_size) {
  if (grid_size < 3) throw std::invalid_argument("validate_majorant: grid_size must be >= 3");
  ValidationReport report;
  const double cap = eval_cap(m.domain_radius);

  {
    CheckEntry h1{"h1", false, ""};
    const double f0 = m.value_at(0.0);
    const double fp0 = m.derivative_at(0.0);
    std::ostringstream os;
    os << "f(0) = " << f0 << ", f'(0) = " << fp0;
    h1.pass = f0 > 0.0 && std::abs(fp0 + 1.0) <= 1e-9;
    h1.detail = os.str();
    report.checks.push_back(std::move(h1));
  }

  {
    CheckEntry h2{"h2", false, ""};
    bool monotone = true;
    bool convex = true;
    std::vector<double> t(static_cast<std::size_t>(grid_size));
    std::vector<double> fp(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i) {
      t[static_cast<std::size_t>(i)] = cap * static_cast<double>(i) / (grid_size - 1);
      fp[static_cast<std::size_t>(i)] = m.derivative_at(t[static_cast<std::size_t>(i)]);
    }
    double worst_gap = 0.0;
    for (int i = 0; i + 1 < grid_size && monotone; ++i)
      if (!(fp[static_cast<std::size_t>(i)] < fp[static_cast<std::size_t>(i + 1)])) monotone = false;
    // Uniform grid: t[i+1] is the midpoint of t[i] and t[i+2].
    for (int i = 0; i + 2 < grid_size; ++i) {
      const double chord = 0.5 * (fp[static_cast<std::size_t>(i)] + fp[static_cast<std::size_t>(i + 2)]);
      const double gap = fp[static_cast<std::size_t>(i + 1)] - chord;
      worst_gap = std::max(worst_gap, gap);
      if (gap > 1e-12 * std::max(1.0, std::abs(chord))) convex = false;
    }
    std::ostringstream os;
    os << (monotone ? "f' strictly increasing" : "f' not strictly increasing") << "; "
       << (convex ? "midpoint convexity holds" : "midpoint convexity violated")
       << " (worst midpoint excess " << worst_gap << ")";
    h2.pass = monotone && convex;
    h2.detail = os.str();
    report.checks.push_back(std::move(h2));
  }

  {
    CheckEntry h3{"h3", false, ""};
    auto bracket = scan_for_sign_change(m.value_at, 0.0, cap);
    if (bracket && m.value_at(0.0) > 0.0) {
      h3.pass = true;
      std::ostringstream os;
      os << "f changes sign in [" << bracket->lo << ", " << bracket->hi << "]";
      h3.detail = os.str();
    } else {
      // Direct negativity scan: a sign change can be absent when f(0) <= 0.
      bool negative_found = false;
      double where = 0.0;
      for (double tt : geometric_grid(0.0, cap, 4096))
        if (m.value_at(tt) < 0.0) {
          negative_found = true;
          where = tt;
          break;
        }
      h3.pass = negative_found;
      std::ostringstream os;
      if (negative_found)
        os << "f < 0 at t = " << where;
      else
        os << "no t in (0, R) with f(t) < 0 found";
      h3.detail = os.str();
    }
    report.checks.push_back(std::move(h3));
  }

  {
    CheckEntry fd{"derivative_fd_consistency", true, ""};
    const int n_pts = std::min(grid_size, 256);
    double worst = 0.0;
    for (int i = 0; i < n_pts; ++i) {
      const double t = cap * (static_cast<double>(i) + 0.5) / n_pts * 0.95;
      const double h = std::min(1e-6 * std::max(1.0, t), 0.25 * (cap - t) + 1e-300);
      if (t - h <= 0.0) continue;
      const double fd_value = (m.value_at(t + h) - m.value_at(t - h)) / (2.0 * h);
      const double fp = m.derivative_at(t);
      const double rel = std::abs(fd_value - fp) / std::max(1.0, std::abs(fp));
      worst = std::max(worst, rel);
    }
    fd.pass = worst <= 1e-6;
    std::ostringstream os;
    os << "worst relative deviation " << worst;
    fd.detail = os.str();
    report.checks.push_back(std::move(fd));
  }

  return report;
}

namespace {

struct BaseShape {
  double t_bar = 0.0;
  double beta = 0.0;
};

BaseShape base_shape(const MajorantFunction& m) {
  const double cap = eval_cap(m.domain_radius);
  BaseShape shape;
  if (m.derivative_at(cap) < 0.0) {
    shape.t_bar = m.domain_radius;
    shape.beta = -m.value_at(cap);
  } else {
    auto bracket = scan_for_sign_change(m.derivative_at, 0.0, cap);
    if (!bracket) throw std::runtime_error("hypothesis h3 not numerically verifiable: f' has no sign change yet f'(R-) >= 0");
    shape.t_bar = bisect(m.derivative_at, bracket->lo, bracket->hi, kBisectTol);
    shape.beta = -m.value_at(shape.t_bar);
  }
  return shape;
}

}  // namespace

MajorantFunction shift_majorant(const MajorantFunction& m, double rho) {
  if (rho < 0.0 || !std::isfinite(rho)) throw std::invalid_argument("shift_majorant: rho must be >= 0");
  if (rho == 0.0) return m;
  const BaseShape shape = base_shape(m);
  if (!(rho < 0.5 * shape.beta)) {
    std::ostringstream os;
    os << "perturbation radius too large (rho = " << rho << ", beta/2 = " << 0.5 * shape.beta << ")";
    throw std::invalid_argument(os.str());
  }
  const double slope = m.derivative_at(rho);
  if (!(slope < 0.0)) throw std::invalid_argument("shift_majorant: f'(rho) < 0 required");
  const double scale = -slope;  // |f'(rho)|

  MajorantFunction g;
  g.domain_radius = m.domain_radius - rho;
  g.value_at = [m, rho, slope](double t) { return -(m.value_at(t + rho) + 2.0 * rho) / slope; };
  g.derivative_at = [m, rho, scale](double t) { return m.derivative_at(t + rho) / scale; };
  g.left_second_at = [m, rho, scale](double t) { return m.left_second_at(t + rho) / scale; };
  g.family = MajorantFamily::custom;
  g.param_b = g.value_at(0.0);
  return g;
}

Certificate derive_certificate(const MajorantFunction& m, double rho) {
  if (rho < 0.0 || !std::isfinite(rho)) throw std::invalid_argument("derive_certificate: rho must be >= 0");
  const double radius = m.domain_radius;
  const double cap = eval_cap(radius);

  Certificate cert;
  cert.rho = rho;

  const BaseShape shape = base_shape(m);
  cert.t_bar = shape.t_bar;
  cert.beta = shape.beta;
  if (!(cert.beta > 0.0)) throw std::runtime_error("hypothesis h3 not numerically verifiable: f does not become negative");
  if (!(rho < 0.5 * cert.beta)) {
    std::ostringstream os;
    os << "perturbation radius too large (rho = " << rho << ", beta/2 = " << 0.5 * cert.beta << ")";
    throw std::invalid_argument(os.str());
  }

  // t*: smallest root of f, bracketed on [0, t_bar].
  {
    const double hi = std::min(cert.t_bar, cap);
    auto bracket = scan_for_sign_change(m.value_at, 0.0, hi);
    if (!bracket) throw std::runtime_error("hypothesis h3 not numerically verifiable: no sign change of f in [0, t_bar]");
    cert.t_star = bisect(m.value_at, bracket->lo, bracket->hi, kBisectTol);
  }

  // tau_bar: second zero of f when it exists below R, otherwise R.
  if (cert.t_bar >= cap || m.value_at(cap) < 0.0) {
    cert.tau_bar = radius;
  } else {
    auto bracket = scan_for_sign_change(m.value_at, std::min(cert.t_bar, cap), cap);
    cert.tau_bar = bracket ? bisect(m.value_at, bracket->lo, bracket->hi, kBisectTol) : radius;
  }

  // kappa and lambda from the start-shifted majorant. The supporting-line
  // tangency h(t) = g(t) - t g'(t) is strictly decreasing from g(0) > 0; an
  // interior zero is lambda with kappa = -g'(lambda), otherwise the supremum
  // is the limit toward the right endpoint.
  const MajorantFunction g = shift_majorant(m, rho);
  const double g_cap = eval_cap(g.domain_radius);
  auto tangency = [&g](double t) { return g.value_at(t) - t * g.derivative_at(t); };
  if (tangency(g_cap) < 0.0) {
    auto bracket = scan_for_sign_change(tangency, 0.0, g_cap);
    if (!bracket) throw std::runtime_error("hypothesis h3 not numerically verifiable: tangency bracket lost");
    cert.lambda = bisect(tangency, bracket->lo, bracket->hi, kBisectTol);
    cert.kappa = -g.derivative_at(cert.lambda);
  } else {
    cert.lambda = g.domain_radius;
    cert.kappa = -g.value_at(g_cap) / g_cap;
  }
  cert.theta_max = cert.kappa / (2.0 - cert.kappa);
  cert.qlinear_threshold = cert.kappa / (4.0 + cert.kappa);

  if (!(cert.kappa > 0.0 && cert.kappa < 1.0))
    throw std::runtime_error("derived kappa outside (0,1); majorant hypotheses violated");
  return cert;
}

double scalar_linearization_error(const MajorantFunction& m, double v, double t) {
  if (!(v >= 0.0) || !(t >= 0.0) || !(v < m.domain_radius) || !(t < m.domain_radius))
    throw std::domain_error("scalar_linearization_error: arguments must lie in [0, R)");
  return m.value_at(v) - (m.value_at(t) + m.derivative_at(t) * (v - t));
}

}  // namespace inewt
