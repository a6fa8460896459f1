#include "inewt/verifier.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace inewt {

namespace {

constexpr int kMaxProbeDimension = 50;
constexpr double kRatioCutoff = 1e-12;

void require_probe_dimension(const OperatorProblem& p) {
  if (p.dimension > kMaxProbeDimension)
    throw std::invalid_argument("probes support dimensions up to 50");
}

struct SlackTracker {
  ProbeReport report;
  explicit SlackTracker(std::string name, double tolerance) {
    report.name = std::move(name);
    report.tolerance = tolerance;
    report.min_slack = std::numeric_limits<double>::infinity();
    report.max_slack = -std::numeric_limits<double>::infinity();
  }
  void record(int index, double slack, const char* what) {
    report.min_slack = std::min(report.min_slack, slack);
    report.max_slack = std::max(report.max_slack, slack);
    if (slack < -report.tolerance && !report.first_violation) {
      report.first_violation = index;
      std::ostringstream os;
      os << what << " violated at sample " << index << " (slack " << slack << ")";
      report.detail = os.str();
    }
  }
  void reject(int index, const char* why) {
    ++report.rejected;
    if (report.detail.empty()) {
      std::ostringstream os;
      os << "sample " << index << " rejected: " << why;
      report.detail = os.str();
    }
  }
  ProbeReport finish(int samples) {
    report.samples = samples;
    if (report.samples == 0) {
      report.min_slack = 0.0;
      report.max_slack = 0.0;
    }
    return report;
  }
};

// Deterministic generator: splitmix64 stream + Box-Muller normals, so sample
// sets are identical across platforms for a given seed.
struct SampleRng {
  std::uint64_t state;
  explicit SampleRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() {  // (0, 1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  // Uniform point in the `norm`-ball of the given radius around center.
  Vector in_ball(const Vector& center, double radius, const NormSpec& norm) {
    const std::size_t n = center.size();
    Vector dir(n);
    double len = 0.0;
    do {
      for (auto& d : dir) d = normal();
      len = norm.norm(dir);
    } while (len == 0.0);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = center[i] + dir[i] * (r / len);
    return out;
  }
};

}  // namespace

bool ProbeReport::pass() const { return !first_violation.has_value() && rejected == 0; }

std::vector<std::pair<Vector, double>> banach_samples(const OperatorProblem& p,
                                                      const MajorantFunction& m, int count,
                                                      std::uint64_t seed) {
  const double t_bar = derive_certificate(m, 0.0).t_bar;
  const double cap = 0.9 * std::min(t_bar, p.domain_radius);
  SampleRng rng(seed);
  std::vector<std::pair<Vector, double>> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Vector x = rng.in_ball(p.base_point, cap, p.norm);
    samples.emplace_back(x, p.norm.norm(sub(x, p.base_point)));
  }
  return samples;
}

std::vector<std::pair<Vector, Vector>> linearization_samples(const OperatorProblem& p, int count,
                                                             std::uint64_t seed) {
  const double cap = 0.95 * p.domain_radius;
  SampleRng rng(seed);
  std::vector<std::pair<Vector, Vector>> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Vector x = rng.in_ball(p.base_point, 0.6 * cap, p.norm);
    const double used = p.norm.norm(sub(x, p.base_point));
    const Vector y = rng.in_ball(x, 0.95 * (cap - used), p.norm);
    pairs.emplace_back(x, y);
  }
  return pairs;
}

std::vector<Vector> envelope_samples(const OperatorProblem& p, int count, std::uint64_t seed) {
  SampleRng rng(seed);
  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    points.push_back(rng.in_ball(p.base_point, 0.95 * p.domain_radius, p.norm));
  return points;
}

ProbeReport probe_banach_bound(const OperatorProblem& p, const MajorantFunction& m,
                               const std::vector<std::pair<Vector, double>>& samples,
                               double tolerance) {
  require_probe_dimension(p);
  const double t_bar = derive_certificate(m, 0.0).t_bar;
  const Matrix a0 = p.jacobian_at(p.base_point);
  SlackTracker tracker("banach_bound", tolerance);
  int index = 0;
  for (const auto& [x, t] : samples) {
    const int i = index++;
    if (!(p.norm.norm(sub(x, p.base_point)) <= t * (1.0 + 1e-12)) || !(t < t_bar)) {
      tracker.reject(i, "||x - x0|| <= t < t_bar required");
      continue;
    }
    const double slope = m.derivative_at(t);
    if (!(slope < 0.0)) {
      tracker.reject(i, "f'(t) < 0 required");
      continue;
    }
    const LuFactorization jx(p.jacobian_at(x));
    if (jx.singular()) {
      tracker.record(i, -std::numeric_limits<double>::infinity(), "F'(x) nonsingular");
      continue;
    }
    auto map = [&](const Vector& v) { return jx.solve(a0.apply(v)); };
    const double measured = operator_norm(map, p.dimension, p.norm);
    tracker.record(i, 1.0 / (-slope) - measured, "||F'(x)^{-1} F'(x0)|| <= 1/(-f'(t))");
  }
  return tracker.finish(index);
}

ProbeReport probe_linearization_bounds(const OperatorProblem& p, const MajorantFunction& m,
                                       const std::vector<std::pair<Vector, Vector>>& pairs,
                                       double tolerance) {
  require_probe_dimension(p);
  const LuFactorization base(p.jacobian_at(p.base_point));
  SlackTracker tracker("linearization_bounds", tolerance);
  int index = 0;
  for (const auto& [x, y] : pairs) {
    const int i = index++;
    const double t = p.norm.norm(sub(x, p.base_point));
    const double s = p.norm.norm(sub(y, x));
    if (!(t + s < p.domain_radius)) {
      tracker.reject(i, "||x - x0|| + ||y - x|| < R required");
      continue;
    }
    const Vector err = sub(p.residual_at(y), add(p.residual_at(x), p.jacobian_at(x).apply(sub(y, x))));
    const double measured = p.norm.norm(base.solve(err));
    tracker.record(i, scalar_linearization_error(m, t + s, t) - measured,
                   "||A0^{-1} E_F(y,x)|| <= e_f(t+s, t)");
    if (s > 0.0) {
      // (1/2) [(f'(s+t) - f'(t)) / s] s^2
      const double quad = 0.5 * (m.derivative_at(s + t) - m.derivative_at(t)) * s;
      tracker.record(i, quad - measured,
                     "||A0^{-1} E_F(y,x)|| <= (1/2)[(f'(s+t)-f'(t))/s] ||y-x||^2");
    }
  }
  return tracker.finish(index);
}

ProbeReport probe_residual_envelope(const OperatorProblem& p, const MajorantFunction& m,
                                    const std::vector<Vector>& points, double tolerance) {
  require_probe_dimension(p);
  const Matrix a0 = p.jacobian_at(p.base_point);
  const LuFactorization base(a0);
  SlackTracker tracker("residual_envelope", tolerance);
  int index = 0;
  for (const Vector& y : points) {
    const int i = index++;
    const double t = p.norm.norm(sub(y, p.base_point));
    if (!(t < p.domain_radius)) {
      tracker.reject(i, "y in B(x0, R) required");
      continue;
    }
    const double measured = p.norm.norm(base.solve(p.residual_at(y)));
    const double f_t = m.value_at(t);
    tracker.record(i, measured - (-f_t), "-f(||y-x0||) <= ||A0^{-1} F(y)||");
    tracker.record(i, f_t + 2.0 * t - measured, "||A0^{-1} F(y)|| <= f(||y-x0||) + 2||y-x0||");
    const Matrix jy = p.jacobian_at(y);
    auto map = [&](const Vector& v) { return base.solve(jy.apply(v)); };
    const double jac_norm = operator_norm(map, p.dimension, p.norm);
    tracker.record(i, 2.0 + m.derivative_at(t) - jac_norm, "||A0^{-1} F'(y)|| <= 2 + f'(||y-x0||)");
  }
  return tracker.finish(index);
}

bool TraceCheckBundle::all_pass() const {
  bool ok = k_membership.pass() && residual_envelope.pass() && step_bounds.pass();
  if (h4_holds) ok = ok && contraction_shifted.pass() && contraction_base.pass();
  if (qlinear_applicable) ok = ok && qlinear.pass();
  return ok;
}

TraceCheckBundle check_trace(const OperatorProblem& p, const MajorantFunction& m,
                             const Certificate& cert, const IterationTrace& trace,
                             const Vector& x_star, double tolerance) {
  if (trace.rows.empty()) throw std::invalid_argument("check_trace: empty trace");
  if (std::abs(cert.rho - trace.rho) > 1e-12 * std::max(1.0, std::abs(cert.rho)))
    throw std::invalid_argument("check_trace: mismatched certificate/trace provenance (rho differs)");

  const double rho = cert.rho;
  const MajorantFunction shifted = shift_majorant(m, rho);
  const Vector& z0 = trace.rows.front().iterate;
  const LuFactorization base(p.jacobian_at(z0));
  const std::size_t rows = trace.rows.size();

  // Recompute everything from the recorded iterates alone.
  std::vector<double> residual(rows), dist(rows), err(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    const Vector& z = trace.rows[k].iterate;
    residual[k] = p.norm.norm(base.solve(p.residual_at(z)));
    dist[k] = p.norm.norm(sub(z, z0));
    err[k] = p.norm.norm(sub(x_star, z));
  }

  // Independent scalar chain from (0,0) under the recorded theta_k.
  std::vector<double> t_chain(rows), eps_chain(rows);
  t_chain[0] = 0.0;
  eps_chain[0] = 0.0;
  for (std::size_t k = 0; k + 1 < rows; ++k) {
    const double theta = trace.rows[k].theta;
    const double level = shifted.value_at(t_chain[k]) + eps_chain[k];
    const double slope = shifted.derivative_at(t_chain[k]);
    t_chain[k + 1] = t_chain[k] - (1.0 + theta) * level / slope;
    eps_chain[k + 1] = eps_chain[k] + 2.0 * theta * level;
  }

  TraceCheckBundle bundle;
  bundle.ratio_cutoff = kRatioCutoff;
  bundle.h4_holds = cert.lambda < m.domain_radius - rho;

  {
    // Membership is held to the verifier's own chain; the recorded states are
    // the solver's business (a trace can legitimately be re-verified under a
    // smaller rho than it was produced with).
    SlackTracker tracker("k_membership", tolerance);
    for (std::size_t k = 0; k < rows; ++k) {
      const int i = static_cast<int>(k);
      tracker.record(i, t_chain[k] - dist[k], "||z_k - z0|| <= t_k");
      tracker.record(i, shifted.value_at(t_chain[k]) + eps_chain[k] - residual[k],
                     "r_k <= f(t_k) + eps_k");
    }
    bundle.k_membership = tracker.finish(static_cast<int>(rows));
  }

  {
    SlackTracker tracker("residual_envelope", tolerance);
    double envelope = m.value_at(0.0) + 2.0 * rho;
    for (std::size_t k = 0; k < rows; ++k) {
      tracker.record(static_cast<int>(k), envelope - residual[k],
                     "r_k <= prod((1+theta^2)/2) (f(0) + 2 rho)");
      envelope *= 0.5 * (1.0 + trace.rows[k].theta * trace.rows[k].theta);
    }
    bundle.residual_envelope = tracker.finish(static_cast<int>(rows));
  }

  {
    SlackTracker tracker("step_bounds", tolerance);
    for (std::size_t k = 0; k + 1 < rows; ++k) {
      const double step = p.norm.norm(sub(trace.rows[k + 1].iterate, trace.rows[k].iterate));
      tracker.record(static_cast<int>(k), (t_chain[k + 1] - t_chain[k]) - step,
                     "||z_{k+1} - z_k|| <= t_{k+1} - t_k");
    }
    bundle.step_bounds = tracker.finish(static_cast<int>(rows > 0 ? rows - 1 : 0));
  }

  int excluded = 0;
  if (bundle.h4_holds) {
    // Composite contraction constants: once from the shifted majorant, once
    // with the base-majorant constants; they coincide at rho = 0.
    const double g_slope = shifted.derivative_at(cert.lambda);
    const double g_curv = shifted.left_second_at(cert.lambda);
    const double shifted_lin = g_curv / std::abs(g_slope);
    const double shifted_off = (2.0 + g_slope) / std::abs(g_slope);
    const double f_slope_lam = m.derivative_at(cert.lambda);
    const double f_slope_out = m.derivative_at(cert.lambda + rho);
    const double base_lin = m.left_second_at(cert.lambda) / std::abs(f_slope_lam);
    const double base_off =
        (f_slope_out + 2.0 * std::abs(m.derivative_at(rho))) / std::abs(f_slope_out);

    SlackTracker shifted_tracker("contraction_shifted", tolerance);
    SlackTracker base_tracker("contraction_base", tolerance);
    int checked = 0;
    for (std::size_t k = 0; k + 1 < rows; ++k) {
      if (residual[k] < kRatioCutoff || residual[k + 1] < kRatioCutoff || err[k] == 0.0) {
        ++excluded;
        continue;
      }
      ++checked;
      const double theta = trace.rows[k].theta;
      const double bound_a =
          (0.5 * (1.0 + theta) * shifted_lin * err[k] + theta * shifted_off) * err[k];
      const double bound_b = (0.5 * (1.0 + theta) * base_lin * err[k] + theta * base_off) * err[k];
      shifted_tracker.record(static_cast<int>(k), bound_a - err[k + 1],
                             "||x*-z_{k+1}|| composite contraction (shifted constants)");
      base_tracker.record(static_cast<int>(k), bound_b - err[k + 1],
                          "||x*-z_{k+1}|| composite contraction (base constants)");
    }
    bundle.contraction_shifted = shifted_tracker.finish(checked);
    bundle.contraction_base = base_tracker.finish(checked);
  } else {
    bundle.contraction_shifted = SlackTracker("contraction_shifted", tolerance).finish(0);
    bundle.contraction_base = SlackTracker("contraction_base", tolerance).finish(0);
    bundle.contraction_shifted.detail = "skipped: lambda < R - rho does not hold";
    bundle.contraction_base.detail = bundle.contraction_shifted.detail;
  }

  {
    SlackTracker tracker("qlinear", tolerance);
    int checked = 0;
    for (std::size_t k = 0; k + 1 < rows; ++k) {
      const double theta = trace.rows[k].theta;
      if (!(theta < cert.qlinear_threshold)) continue;
      if (residual[k] < kRatioCutoff || residual[k + 1] < kRatioCutoff || err[k] == 0.0) continue;
      ++checked;
      const double bound = (0.5 * (1.0 + theta) + 2.0 * theta / cert.kappa) * err[k] + 1e-12;
      tracker.record(static_cast<int>(k), bound - err[k + 1],
                     "||x*-z_{k+1}|| <= [(1+theta)/2 + 2 theta/kappa] ||x*-z_k|| + 1e-12");
    }
    bundle.qlinear_applicable = checked > 0;
    bundle.qlinear = tracker.finish(checked);
  }

  if (excluded > 0) {
    std::ostringstream os;
    os << (bundle.contraction_shifted.detail.empty() ? "" : bundle.contraction_shifted.detail + "; ")
       << excluded << " near-convergence rows excluded (cutoff " << kRatioCutoff << ")";
    bundle.contraction_shifted.detail = os.str();
  }
  return bundle;
}

}  // namespace inewt
