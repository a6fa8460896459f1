#include "inewt/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace inewt {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const json& require_field(const json& j, const char* key, const char* context) {
  auto it = j.find(key);
  if (it == j.end()) {
    std::ostringstream os;
    os << "missing field '" << key << "' in " << context;
    throw std::invalid_argument(os.str());
  }
  return *it;
}

double require_number(const json& j, const char* key, const char* context) {
  const json& v = require_field(j, key, context);
  if (!v.is_number()) {
    std::ostringstream os;
    os << "field '" << key << "' in " << context << " must be a number";
    throw std::invalid_argument(os.str());
  }
  return v.get<double>();
}

double integer_power(double x, int p) {
  double out = 1.0;
  for (int i = 0; i < p; ++i) out *= x;
  return out;
}

struct PolyTerm {
  double coef = 0.0;
  std::vector<int> powers;
};

using PolySystem = std::vector<std::vector<PolyTerm>>;

PolySystem parse_poly_system(const json& params, int dimension) {
  const json& eqs = require_field(params, "equations", "parameters");
  if (!eqs.is_array() || eqs.size() != static_cast<std::size_t>(dimension))
    throw std::invalid_argument("parameters.equations must list one equation per dimension");
  PolySystem system;
  for (const json& eq : eqs) {
    std::vector<PolyTerm> terms;
    for (const json& term : eq) {
      PolyTerm t;
      t.coef = require_number(term, "coef", "polynomial term");
      const json& powers = require_field(term, "powers", "polynomial term");
      if (!powers.is_array() || powers.size() != static_cast<std::size_t>(dimension))
        throw std::invalid_argument("polynomial term 'powers' must have one entry per variable");
      for (const json& p : powers) {
        const int e = p.get<int>();
        if (e < 0) throw std::invalid_argument("polynomial term powers must be nonnegative");
        t.powers.push_back(e);
      }
      terms.push_back(std::move(t));
    }
    system.push_back(std::move(terms));
  }
  return system;
}

OperatorProblem poly_system_problem(const PolySystem& system, int dimension) {
  OperatorProblem p;
  p.dimension = dimension;
  p.residual_at = [system, dimension](const Vector& x) {
    Vector out(static_cast<std::size_t>(dimension), 0.0);
    for (std::size_t i = 0; i < system.size(); ++i)
      for (const PolyTerm& term : system[i]) {
        double v = term.coef;
        for (int j = 0; j < dimension; ++j)
          v *= integer_power(x[static_cast<std::size_t>(j)], term.powers[static_cast<std::size_t>(j)]);
        out[i] += v;
      }
    return out;
  };
  p.jacobian_at = [system, dimension](const Vector& x) {
    Matrix jac(dimension, dimension);
    for (std::size_t i = 0; i < system.size(); ++i)
      for (const PolyTerm& term : system[i])
        for (int j = 0; j < dimension; ++j) {
          const int pj = term.powers[static_cast<std::size_t>(j)];
          if (pj == 0) continue;
          double v = term.coef * pj * integer_power(x[static_cast<std::size_t>(j)], pj - 1);
          for (int l = 0; l < dimension; ++l) {
            if (l == j) continue;
            v *= integer_power(x[static_cast<std::size_t>(l)], term.powers[static_cast<std::size_t>(l)]);
          }
          jac(static_cast<int>(i), j) += v;
        }
    return jac;
  };
  return p;
}

MajorantFunction majorant_from_json(const json& j) {
  const std::string family = require_field(j, "family", "majorant").get<std::string>();
  if (family == "quadratic")
    return quadratic_majorant(require_number(j, "L", "majorant"), require_number(j, "b", "majorant"));
  if (family == "smale")
    return smale_majorant(require_number(j, "gamma", "majorant"), require_number(j, "b", "majorant"));
  if (family == "self_concordant")
    return self_concordant_majorant(require_number(j, "b", "majorant"));
  std::ostringstream os;
  os << "majorant.family unknown: '" << family << "'";
  throw std::invalid_argument(os.str());
}

json majorant_to_json(const MajorantFunction& m) {
  json j;
  switch (m.family) {
    case MajorantFamily::quadratic:
      j["family"] = "quadratic";
      j["L"] = m.param_primary;
      j["b"] = m.param_b;
      return j;
    case MajorantFamily::smale:
      j["family"] = "smale";
      j["gamma"] = m.param_primary;
      j["b"] = m.param_b;
      return j;
    case MajorantFamily::self_concordant:
      j["family"] = "self_concordant";
      j["b"] = m.param_b;
      return j;
    case MajorantFamily::custom:
      break;
  }
  throw std::invalid_argument("custom majorants have no on-disk form");
}

NormSpec norm_from_json(const json& j, int dimension) {
  const std::string kind = require_field(j, "kind", "norm").get<std::string>();
  if (kind == "euclidean") return NormSpec::euclidean();
  if (kind == "metric") {
    const json& rows = require_field(j, "matrix", "norm");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(dimension))
      throw std::invalid_argument("norm.matrix must be square with the problem dimension");
    Matrix m(dimension, dimension);
    for (int i = 0; i < dimension; ++i) {
      const json& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(dimension))
        throw std::invalid_argument("norm.matrix must be square with the problem dimension");
      for (int c = 0; c < dimension; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return NormSpec::metric(m);
  }
  std::ostringstream os;
  os << "norm.kind unknown: '" << kind << "'";
  throw std::invalid_argument(os.str());
}

const json& builtin_registry_entry(const std::string& name);

}  // namespace

void spot_check_majorant(const OperatorProblem& p, const MajorantFunction& m, int pairs,
                         std::uint64_t seed) {
  const LuFactorization base(p.jacobian_at(p.base_point));
  auto samples = linearization_samples(p, pairs, seed);
  int index = 0;
  for (const auto& [x, y] : samples) {
    const double t = p.norm.norm(sub(x, p.base_point));
    const double s = p.norm.norm(sub(y, x));
    if (!(t + s < m.domain_radius) || s == 0.0) {
      ++index;
      continue;
    }
    const Matrix jx = p.jacobian_at(x);
    const Matrix jy = p.jacobian_at(y);
    auto diff = [&](const Vector& v) { return base.solve(sub(jy.apply(v), jx.apply(v))); };
    const double measured = operator_norm(diff, p.dimension, p.norm);
    const double bound = m.derivative_at(s + t) - m.derivative_at(t);
    if (measured > bound * (1.0 + 1e-6) + 1e-12) {
      std::ostringstream os;
      os << "majorant constant check failed on sampled pair " << index << ": measured increment "
         << measured << " exceeds majorant increment " << bound
         << (m.family == MajorantFamily::quadratic ? " (field 'L')" : " (majorant parameters)");
      throw std::invalid_argument(os.str());
    }
    ++index;
  }
}

LoadedProblem problem_from_json(const json& j) {
  const std::string family = require_field(j, "family", "problem").get<std::string>();
  if (family == "custom_builtin") {
    const json& params = require_field(j, "parameters", "problem");
    const std::string name = require_field(params, "builtin", "parameters").get<std::string>();
    return problem_from_json(builtin_registry_entry(name));
  }

  LoadedProblem lp;
  lp.name = require_field(j, "name", "problem").get<std::string>();
  const json& x0 = require_field(j, "x0", "problem");
  if (!x0.is_array() || x0.empty()) throw std::invalid_argument("field 'x0' must be a nonempty array");
  const int dimension = static_cast<int>(x0.size());

  OperatorProblem p;
  if (family == "polynomial_system") {
    p = poly_system_problem(parse_poly_system(require_field(j, "parameters", "problem"), dimension),
                            dimension);
  } else if (family == "exp_analytic") {
    if (dimension != 1) throw std::invalid_argument("exp_analytic problems are scalar");
    const double offset = require_number(require_field(j, "parameters", "problem"), "offset", "parameters");
    p.dimension = 1;
    p.residual_at = [offset](const Vector& x) { return Vector{std::exp(x[0]) - offset}; };
    p.jacobian_at = [](const Vector& x) {
      Matrix jac(1, 1);
      jac(0, 0) = std::exp(x[0]);
      return jac;
    };
  } else if (family == "log_barrier") {
    // Gradient of x - ln x; the minimizer is x = 1.
    if (dimension != 1) throw std::invalid_argument("log_barrier problems are scalar");
    p.dimension = 1;
    p.residual_at = [](const Vector& x) { return Vector{1.0 - 1.0 / x[0]}; };
    p.jacobian_at = [](const Vector& x) {
      Matrix jac(1, 1);
      jac(0, 0) = 1.0 / (x[0] * x[0]);
      return jac;
    };
  } else {
    std::ostringstream os;
    os << "family unknown: '" << family << "'";
    throw std::invalid_argument(os.str());
  }

  p.dimension = dimension;
  p.base_point = x0.get<Vector>();
  p.domain_radius = require_number(j, "domain_radius", "problem");
  p.norm = norm_from_json(require_field(j, "norm", "problem"), dimension);
  validate_problem(p);

  lp.problem = std::move(p);
  lp.majorant = majorant_from_json(require_field(j, "majorant", "problem"));
  if (lp.problem.domain_radius > lp.majorant.domain_radius) {
    std::ostringstream os;
    os << "field 'domain_radius' (" << lp.problem.domain_radius
       << ") exceeds the majorant's domain (" << lp.majorant.domain_radius << ")";
    throw std::invalid_argument(os.str());
  }
  spot_check_majorant(lp.problem, lp.majorant);

  // Normalized spec: rebuilt from the parsed values.
  json spec;
  spec["name"] = lp.name;
  spec["family"] = family;
  spec["parameters"] = j.contains("parameters") ? j.at("parameters") : json::object();
  spec["x0"] = lp.problem.base_point;
  spec["majorant"] = majorant_to_json(lp.majorant);
  spec["domain_radius"] = lp.problem.domain_radius;
  spec["norm"] = j.at("norm");
  lp.spec = std::move(spec);
  return lp;
}

LoadedProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open problem file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("problem file does not parse: " + std::string(e.what()));
  }
  return problem_from_json(j);
}

json problem_to_json(const LoadedProblem& lp) { return lp.spec; }

namespace {

json sqrt2_spec() {
  json j;
  j["name"] = "sqrt2";
  j["family"] = "polynomial_system";
  j["parameters"] = {{"equations",
                      json::array({json::array({{{"coef", 1.0}, {"powers", {2}}},
                                                {{"coef", -2.0}, {"powers", {0}}}})})}};
  j["x0"] = {1.5};
  // ||F'(x0)^{-1}[F'(y)-F'(x)]|| = (2/3)|y - x| and ||F'(x0)^{-1}F(x0)|| = 1/12.
  j["majorant"] = {{"family", "quadratic"}, {"L", 2.0 / 3.0}, {"b", 1.0 / 12.0}};
  j["domain_radius"] = 1.5;
  j["norm"] = {{"kind", "euclidean"}};
  return j;
}

json circle_line_spec() {
  json j;
  j["name"] = "circle_line";
  j["family"] = "polynomial_system";
  j["parameters"] = {{"equations",
                      json::array({json::array({{{"coef", 1.0}, {"powers", {2, 0}}},
                                                {{"coef", 1.0}, {"powers", {0, 2}}},
                                                {{"coef", -1.0}, {"powers", {0, 0}}}}),
                                   json::array({{{"coef", 1.0}, {"powers", {1, 0}}},
                                                {{"coef", -1.0}, {"powers", {0, 1}}}})})}};
  const Vector x0{0.75, 0.70};
  j["x0"] = x0;
  OperatorProblem p = poly_system_problem(parse_poly_system(j.at("parameters"), 2), 2);
  p.dimension = 2;
  const LuFactorization lu(p.jacobian_at(x0));
  // Only the first Jacobian row varies: F'(u) - F'(v) = e1 (2(u-v))^T is rank
  // one, so the preconditioned increment is exactly 2 ||A0^{-1} e1|| ||u - v||.
  Vector e1{1.0, 0.0};
  const double lipschitz = 2.0 * norm2(lu.solve(e1));
  const double b = norm2(lu.solve(p.residual_at(x0)));
  j["majorant"] = {{"family", "quadratic"}, {"L", lipschitz}, {"b", b}};
  j["domain_radius"] = 1.0 / lipschitz;
  j["norm"] = {{"kind", "euclidean"}};
  return j;
}

json exp_analytic_spec() {
  json j;
  j["name"] = "exp_analytic";
  j["family"] = "exp_analytic";
  j["parameters"] = {{"offset", 1.1}};
  j["x0"] = {0.0};
  // gamma = sup_{n>1} (1/n!)^{1/(n-1)} = 1/2 (attained at n = 2); b = |e^0 - 1.1|.
  j["majorant"] = {{"family", "smale"}, {"gamma", 0.5}, {"b", 0.1}};
  j["domain_radius"] = 2.0;
  j["norm"] = {{"kind", "euclidean"}};
  return j;
}

json log_barrier_spec() {
  json j;
  j["name"] = "log_barrier";
  j["family"] = "log_barrier";
  j["parameters"] = json::object();
  j["x0"] = {1.15};
  // Local norm at x0: ||v||^2 = v^T g''(x0) v with g''(x0) = 1/x0^2;
  // b = ||g''(x0)^{-1} g'(x0)||_{x0} = x0 - 1 = 0.15.
  j["majorant"] = {{"family", "self_concordant"}, {"b", 0.15}};
  j["domain_radius"] = 1.0;
  j["norm"] = {{"kind", "metric"}, {"matrix", {{1.0 / 1.3225}}}};
  return j;
}

json poly3_spec() {
  json j;
  j["name"] = "poly3";
  j["family"] = "polynomial_system";
  auto eq = [](int sq) {
    json terms = json::array();
    for (int v = 0; v < 3; ++v) {
      json powers = {0, 0, 0};
      powers[static_cast<std::size_t>(v)] = (v == sq) ? 2 : 1;
      terms.push_back({{"coef", 1.0}, {"powers", powers}});
    }
    terms.push_back({{"coef", -3.0}, {"powers", {0, 0, 0}}});
    return terms;
  };
  j["parameters"] = {{"equations", json::array({eq(0), eq(1), eq(2)})}};
  const Vector x0{1.1, 1.05, 1.08};
  j["x0"] = x0;
  OperatorProblem p = poly_system_problem(parse_poly_system(j.at("parameters"), 3), 3);
  p.dimension = 3;
  // F'(u) - F'(v) = 2 diag(u - v), so the stored Lipschitz constant is
  // 2 ||A0^{-1}||; b is ||A0^{-1} F(x0)||.
  const LuFactorization lu(p.jacobian_at(x0));
  auto inverse = [&lu](const Vector& v) { return lu.solve(v); };
  const double lipschitz = 2.0 * operator_norm(inverse, 3, NormSpec::euclidean());
  const double b = norm2(lu.solve(p.residual_at(x0)));
  j["majorant"] = {{"family", "quadratic"}, {"L", lipschitz}, {"b", b}};
  j["domain_radius"] = 1.0 / lipschitz;
  j["norm"] = {{"kind", "euclidean"}};
  return j;
}

const json& builtin_registry_entry(const std::string& name) {
  static const std::vector<json> registry = {sqrt2_spec(), circle_line_spec(), exp_analytic_spec(),
                                             log_barrier_spec(), poly3_spec()};
  for (const json& entry : registry)
    if (entry.at("name").get<std::string>() == name) return entry;
  throw std::invalid_argument("unknown builtin problem: '" + name + "'");
}

}  // namespace

std::vector<LoadedProblem> builtin_corpus() {
  std::vector<LoadedProblem> corpus;
  for (const char* name : {"sqrt2", "circle_line", "exp_analytic", "log_barrier", "poly3"})
    corpus.push_back(problem_from_json(builtin_registry_entry(name)));
  return corpus;
}

void write_trace_csv(const std::string& path, const IterationTrace& trace, int dimension) {
  std::ostringstream out;
  out << "k";
  for (int i = 0; i < dimension; ++i) out << ",z_" << i;
  out << ",dist_to_z0,precond_residual,step_norm,achieved_rel_residual,t_k,eps_k,theta_k\n";
  for (const TraceRow& row : trace.rows) {
    out << row.k;
    for (int i = 0; i < dimension; ++i) out << ',' << format_double(row.iterate[static_cast<std::size_t>(i)]);
    out << ',' << format_double(row.dist_to_start) << ',' << format_double(row.residual_norm)
        << ',' << format_double(row.step_norm) << ',' << format_double(row.achieved_rel_residual)
        << ',' << format_double(row.t) << ',' << format_double(row.eps) << ','
        << format_double(row.theta) << '\n';
  }
  write_text_atomic(path, out.str());
}

IterationTrace read_trace_csv(const std::string& path, int dimension) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,", 0) != 0)
    throw std::invalid_argument("trace file missing header row: " + path);
  IterationTrace trace;
  const std::size_t expected = static_cast<std::size_t>(dimension) + 8;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != expected)
      throw std::invalid_argument("trace row has wrong column count: " + line);
    TraceRow row;
    std::size_t at = 0;
    row.k = std::stoi(fields[at++]);
    row.iterate.resize(static_cast<std::size_t>(dimension));
    for (int i = 0; i < dimension; ++i) row.iterate[static_cast<std::size_t>(i)] = std::stod(fields[at++]);
    row.dist_to_start = std::stod(fields[at++]);
    row.residual_norm = std::stod(fields[at++]);
    row.step_norm = std::stod(fields[at++]);
    row.achieved_rel_residual = std::stod(fields[at++]);
    row.t = std::stod(fields[at++]);
    row.eps = std::stod(fields[at++]);
    row.theta = std::stod(fields[at++]);
    trace.rows.push_back(std::move(row));
  }
  if (trace.rows.empty()) throw std::invalid_argument("trace file has no rows: " + path);
  return trace;
}

std::string certificate_text(const Certificate& cert) {
  std::ostringstream out;
  out << "rho = " << format_double(cert.rho) << '\n'
      << "beta = " << format_double(cert.beta) << '\n'
      << "t_star = " << format_double(cert.t_star) << '\n'
      << "tau_bar = " << format_double(cert.tau_bar) << '\n'
      << "t_bar = " << format_double(cert.t_bar) << '\n'
      << "kappa = " << format_double(cert.kappa) << '\n'
      << "lambda = " << format_double(cert.lambda) << '\n'
      << "theta_max = " << format_double(cert.theta_max) << '\n'
      << "qlinear_threshold = " << format_double(cert.qlinear_threshold) << '\n';
  return out.str();
}

std::string probe_report_text(const ProbeReport& report) {
  std::ostringstream out;
  out << report.name << ": " << (report.pass() ? "PASS" : "FAIL") << " (samples=" << report.samples
      << ", rejected=" << report.rejected << ", min_slack=" << format_double(report.min_slack)
      << ", max_slack=" << format_double(report.max_slack) << ", tol=" << report.tolerance << ")";
  if (!report.detail.empty()) out << " " << report.detail;
  return out.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

void run_sweep(const LoadedProblem& lp, const SweepOptions& options, const std::string& out_dir) {
  if (options.theta_count < 2 || options.rho_count < 1)
    throw std::invalid_argument("sweep grid needs at least 2 theta values and 1 rho value");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const Certificate base = derive_certificate(lp.majorant, 0.0);
  const Vector x_star = reference_zero(lp.problem, lp.majorant);
  const double rho_cap = 0.9 * 0.5 * base.beta;

  const std::string header =
      "rho,theta,kappa,lambda,theta_max,iterations,converged,final_residual,trace_ok\n";
  std::ostringstream merged;
  merged << header;

  for (int i = 0; i < options.rho_count; ++i) {
    const double rho =
        options.rho_count == 1 ? 0.0 : rho_cap * static_cast<double>(i) / (options.rho_count - 1);
    const Certificate cert = derive_certificate(lp.majorant, rho);
    Vector start = lp.problem.base_point;
    if (rho > 0.0) {
      Vector dir(start.size(), 1.0);
      const double len = lp.problem.norm.norm(dir);
      for (std::size_t c = 0; c < start.size(); ++c) start[c] += dir[c] * (rho / len);
    }
    for (int jj = 0; jj < options.theta_count; ++jj) {
      const double theta = cert.theta_max * static_cast<double>(jj) / (options.theta_count - 1);
      SolveConfig cfg;
      cfg.theta = theta;
      cfg.rho = rho;
      cfg.start_point = start;
      cfg.stop_residual = 1e-12;
      cfg.max_iterations = 500;
      const IterationTrace trace = inexact_newton_solve(lp.problem, lp.majorant, cfg);
      const TraceCheckBundle checks =
          check_trace(lp.problem, lp.majorant, trace.certificate, trace, x_star);
      std::ostringstream row;
      row << format_double(rho) << ',' << format_double(theta) << ',' << format_double(cert.kappa)
          << ',' << format_double(cert.lambda) << ',' << format_double(cert.theta_max) << ','
          << trace.rows.back().k << ',' << (trace.converged ? 1 : 0) << ','
          << format_double(trace.rows.back().residual_norm) << ',' << (checks.all_pass() ? 1 : 0)
          << '\n';
      std::ostringstream cell_name;
      cell_name << out_dir << "/cell_r" << i << "_t" << jj << ".csv";
      write_text_atomic(cell_name.str(), header + row.str());
      merged << row.str();
    }
  }
  write_text_atomic(out_dir + "/sweep.csv", merged.str());
}

}  // namespace inewt
