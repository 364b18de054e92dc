#include "cspec/spectra.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "cspec/error.hpp"
#include "cspec/parallel.hpp"
#include "cspec/quadrature.hpp"

namespace cspec {

namespace {

constexpr double kPi = std::numbers::pi;

struct MuEntry {
  double value;
  int parity;
  int index;  // descending position inside the parity block
};

ModelSpec make_spec(int d, double omega, double lambda) {
  ModelSpec s;
  s.d = d;
  s.omega = omega;
  s.lambda = lambda;
  return s;
}

Eigen::MatrixXd sector_operator(int d, double omega, double lambda, int sector, const SolverBudgets& b) {
  const ModelSpec spec = make_spec(d, omega, lambda);
  const double scale = b.scale_for(omega);
  if (d == 1) return k_sector_matrix(spec, sector, b.basis_1d, scale);
  return gamma_sector_matrix(spec, sector, b.basis_radial, scale);
}

std::vector<MuEntry> merged_mu(double omega, double lambda, const SolverBudgets& b) {
  std::vector<MuEntry> out;
  for (int parity = 0; parity < 2; ++parity) {
    const EigenSystem es = sym_eigen(sector_operator(1, omega, lambda, parity, b));
    const int n = static_cast<int>(es.values.size());
    for (int i = 0; i < n; ++i) out.push_back({es.values(n - 1 - i), parity, i});
  }
  std::stable_sort(out.begin(), out.end(), [](const MuEntry& a, const MuEntry& c) { return a.value > c.value; });
  return out;
}

std::string curve_payload(const std::vector<std::pair<double, double>>& curve, const std::string& what) {
  nlohmann::json j;
  j["error"] = what;
  j["curve"] = nlohmann::json::array();
  for (const auto& [e, v] : curve) j["curve"].push_back({e, v});
  return j.dump();
}

// Bisection in log E on a non-decreasing secular function f with a root in (lo, hi).
template <class F>
RootResult bisect_log(F&& f, double lo, double hi, const SolverBudgets& b, RootResult r) {
  while (r.iterations < b.max_iterations) {
    if (hi / lo - 1.0 <= b.root_tol) {
      r.converged = true;
      break;
    }
    const double mid = std::sqrt(lo * hi);
    const double v = f(mid);
    ++r.iterations;
    if (v < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  r.energy = std::sqrt(lo * hi);
  if (!r.converged) r.diagnostic = "bisection stopped at the iteration budget";
  return r;
}

// Locate the sign change of a non-decreasing f above E_min, or report none.
template <class F>
RootResult solve_monotone(F&& f, double omega, const SolverBudgets& b, const char* what) {
  RootResult r;
  const double e_min = b.e_min_factor * omega;
  const double f_min = f(e_min);
  r.curve.emplace_back(e_min, f_min);
  if (f_min >= 0.0) {
    r.converged = true;
    r.diagnostic = "no root above E_min";
    return r;
  }
  double lo = e_min;
  double hi = std::max(omega, 10.0 * e_min);
  for (;;) {
    const double v = f(hi);
    r.curve.emplace_back(hi, v);
    if (v >= 0.0) break;
    lo = hi;
    hi *= 10.0;
    if (hi > b.e_max_factor * omega) {
      const std::string msg = std::string(what) + ": search window exhausted without a sign change";
      throw NumericalError(msg, curve_payload(r.curve, msg));
    }
  }
  return bisect_log(f, lo, hi, b, std::move(r));
}

void check_budgets(const SolverBudgets& b) {
  require(b.basis_1d >= 4 && b.basis_radial >= 4, "budgets: basis sizes must be >= 4");
  require(b.max_sector >= 0, "budgets: max_sector must be nonnegative");
  require(b.branches_per_sector >= 1 && b.branches_1d >= 1, "budgets: branch budgets must be positive");
  require(b.e_min_factor > 0.0 && b.e_max_factor > 1.0, "budgets: invalid energy window");
  require(b.root_tol > 0.0 && b.max_iterations > 0, "budgets: invalid root tolerance");
}

double stable_coth_minus_inv(double w, double t) {
  // omega coth(omega t) - 1/t
  const double x = w * t;
  if (x < 1e-2) return w * (x / 3.0 - x * x * x / 45.0 + 2.0 * std::pow(x, 5) / 945.0);
  return w / std::tanh(x) - 1.0 / t;
}

}  // namespace

std::vector<double> mu_spectrum(const ModelSpec& spec, int count, const SolverBudgets& budgets) {
  spec.validate();
  require(spec.d == 1, "mu_spectrum: d must be 1");
  require(count >= 1, "mu_spectrum: count must be positive");
  check_budgets(budgets);
  const auto m = merged_mu(spec.omega, spec.lambda, budgets);
  require(count <= static_cast<int>(m.size()), "mu_spectrum: count exceeds the basis size " + std::to_string(m.size()));
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(m[i].value);
  return out;
}

std::vector<double> mu_spectrum(const ModelSpec& spec, const Grid1D& grid, int count) {
  require(count >= 1, "mu_spectrum: count must be positive");
  const EigenSystem es = sym_eigen(discretize_k_1d(spec, grid));
  std::vector<double> out;
  const int n = static_cast<int>(es.values.size());
  require(count <= n, "mu_spectrum: count exceeds the grid size " + std::to_string(n));
  for (int i = 0; i < count; ++i) out.push_back(es.values(n - 1 - i));
  return out;
}

std::vector<GammaBranch> gamma_spectrum(const ModelSpec& spec, const SolverBudgets& budgets) {
  spec.validate();
  require(spec.d == 2 || spec.d == 3, "gamma_spectrum: d must be 2 or 3");
  check_budgets(budgets);
  std::vector<std::vector<GammaBranch>> per(budgets.max_sector + 1);
  std::vector<std::string> errors(per.size());
  parallel_for(static_cast<int>(per.size()), budgets.jobs, [&](int ell) {
    try {
      const EigenSystem es = sym_eigen(sector_operator(spec.d, spec.omega, spec.lambda, ell, budgets));
      const int n = std::min<int>(budgets.branches_per_sector, es.values.size());
      for (int k = 0; k < n; ++k) per[ell].push_back({ell, k, es.values(k), sector_degeneracy(spec.d, ell)});
    } catch (const std::exception& e) {
      errors[ell] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError("gamma_spectrum: " + e);
  std::vector<GammaBranch> out;
  for (const auto& v : per) out.insert(out.end(), v.begin(), v.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const GammaBranch& a, const GammaBranch& c) { return a.value < c.value; });
  return out;
}

RootResult solve_secular_1d(double alpha, double omega, int branch, const SolverBudgets& budgets) {
  require(omega > 0.0 && std::isfinite(omega), "solve_secular_1d: omega must be positive");
  require(std::isfinite(alpha), "solve_secular_1d: alpha must be finite");
  require(branch >= 0 && branch < 2 * budgets.basis_1d, "solve_secular_1d: branch outside the basis");
  check_budgets(budgets);
  if (alpha >= 0.0) {
    RootResult r;
    r.converged = true;
    r.diagnostic = "alpha >= 0: no negative eigenvalues";
    return r;
  }
  auto f = [&](double e) { return 1.0 + alpha * merged_mu(omega, e, budgets)[branch].value; };
  return solve_monotone(f, omega, budgets, "solve_secular_1d");
}

RootResult solve_secular_hd(int d, double alpha, double omega, int ell, int index, const SolverBudgets& budgets) {
  require(d == 2 || d == 3, "solve_secular_hd: d must be 2 or 3");
  require(omega > 0.0 && std::isfinite(omega), "solve_secular_hd: omega must be positive");
  require(std::isfinite(alpha), "solve_secular_hd: alpha must be finite");
  require(ell >= 0, "solve_secular_hd: sector must be nonnegative");
  require(index >= 0 && index < budgets.basis_radial, "solve_secular_hd: branch outside the basis");
  check_budgets(budgets);
  auto f = [&](double e) { return sym_eigen(sector_operator(d, omega, e, ell, budgets)).values(index) + alpha; };
  return solve_monotone(f, omega, budgets, "solve_secular_hd");
}

BoundState build_eigenfunction(int d, double alpha, double omega, int sector, int index, double energy,
                               const SolverBudgets& budgets) {
  require(energy > 0.0 && std::isfinite(energy), "build_eigenfunction: energy must be positive");
  const ModelSpec spec = make_spec(d, omega, energy);
  const double scale = budgets.scale_for(omega);
  const int size = d == 1 ? budgets.basis_1d : budgets.basis_radial;
  const Eigen::MatrixXd op = sector_operator(d, omega, energy, sector, budgets);
  const EigenSystem es = sym_eigen(op);
  const int col = d == 1 ? size - 1 - index : index;
  require(col >= 0 && col < size, "build_eigenfunction: branch outside the basis");
  Eigen::VectorXd q = es.vectors.col(col);

  const Eigen::MatrixXd t0 = t0_sector_matrix(spec, sector, size, scale);
  const double n2 = q.dot(t0 * q);
  if (!(n2 > 0.0)) throw NumericalError("build_eigenfunction: nonpositive norm of the eigenfunction");
  q /= std::sqrt(n2);
  Eigen::Index imax = 0;
  q.cwiseAbs().maxCoeff(&imax);
  if (q(imax) < 0.0) q = -q;

  BoundState s;
  s.energy = energy;
  s.sector = sector;
  s.index = index;
  s.degeneracy = sector_degeneracy(d, sector);
  s.scale = scale;
  s.charge = q;
  s.norm = std::sqrt(q.dot(t0 * q));
  const Eigen::VectorXd res = d == 1 ? Eigen::VectorXd(q + alpha * (op * q)) : Eigen::VectorXd(alpha * q + op * q);
  s.residual = res.norm() / q.norm();
  s.converged = s.residual <= kResidualFlag;
  return s;
}

SpectrumReport bound_states(int d, double alpha, double omega, const SolverBudgets& budgets) {
  require(d >= 1 && d <= 3, "bound_states: d must be 1, 2 or 3");
  require(omega > 0.0 && std::isfinite(omega), "bound_states: omega must be positive");
  require(std::isfinite(alpha), "bound_states: alpha must be finite");
  check_budgets(budgets);
  SpectrumReport rep;
  rep.d = d;
  rep.alpha = alpha;
  rep.omega = omega;
  rep.budgets = budgets;
  const double e_min = budgets.e_min_factor * omega;

  struct Job {
    int sector, index, merged;
  };
  std::vector<Job> jobs;
  if (d == 1) {
    if (alpha >= 0.0) {
      rep.diagnostics.push_back("alpha >= 0: no negative eigenvalues");
      return rep;
    }
    const auto m = merged_mu(omega, e_min, budgets);
    int n = 0;
    while (n < static_cast<int>(m.size()) && 1.0 + alpha * m[n].value < 0.0) ++n;
    if (n > budgets.branches_1d) {
      rep.partial = true;
      rep.diagnostics.push_back("branch budget reached: " + std::to_string(n) + " branches have roots, " +
                                std::to_string(budgets.branches_1d) + " solved");
      n = budgets.branches_1d;
    }
    if (n == static_cast<int>(m.size())) {
      rep.partial = true;
      rep.diagnostics.push_back("every basis branch has a root; basis budget reached");
    }
    for (int i = 0; i < n; ++i) jobs.push_back({m[i].parity, m[i].index, i});
  } else {
    for (int ell = 0; ell <= budgets.max_sector; ++ell) {
      const EigenSystem es = sym_eigen(sector_operator(d, omega, e_min, ell, budgets));
      int n = 0;
      while (n < es.values.size() && es.values(n) + alpha < 0.0) ++n;
      if (n > budgets.branches_per_sector) {
        rep.partial = true;
        rep.diagnostics.push_back("sector " + std::to_string(ell) + ": " + std::to_string(n) +
                                  " branches have roots, " + std::to_string(budgets.branches_per_sector) +
                                  " solved");
        n = budgets.branches_per_sector;
      }
      if (n > 0 && ell == budgets.max_sector) {
        rep.partial = true;
        rep.diagnostics.push_back("sector budget reached: the last sector still has roots");
      }
      for (int k = 0; k < n; ++k) jobs.push_back({ell, k, -1});
    }
  }

  std::vector<std::optional<BoundState>> found(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), budgets.jobs, [&](int i) {
    const Job& j = jobs[i];
    try {
      const RootResult r = d == 1 ? solve_secular_1d(alpha, omega, j.merged, budgets)
                                  : solve_secular_hd(d, alpha, omega, j.sector, j.index, budgets);
      if (!r.energy) return;
      BoundState s = build_eigenfunction(d, alpha, omega, j.sector, j.index, *r.energy, budgets);
      s.iterations = r.iterations;
      s.converged = s.converged && r.converged;
      if (!r.converged) errors[i] = r.diagnostic;
      found[i] = std::move(s);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      rep.partial = true;
      rep.diagnostics.push_back("sector " + std::to_string(jobs[i].sector) + " branch " +
                                std::to_string(jobs[i].index) + ": " + errors[i]);
    }
    if (found[i]) {
      if (!found[i]->converged) {
        rep.partial = true;
        rep.diagnostics.push_back("sector " + std::to_string(jobs[i].sector) + " branch " +
                                  std::to_string(jobs[i].index) + ": residual above flag");
      }
      rep.states.push_back(std::move(*found[i]));
    }
  }
  std::stable_sort(rep.states.begin(), rep.states.end(),
                   [](const BoundState& a, const BoundState& c) { return a.energy > c.energy; });
  for (std::size_t i = 0; i < rep.states.size(); ++i) {
    rep.states[i].branch = static_cast<int>(i);
    rep.count += rep.states[i].degeneracy;
  }
  return rep;
}

StateCount count_states(int d, double alpha, double omega, const SolverBudgets& budgets) {
  require(d >= 1 && d <= 3, "count_states: d must be 1, 2 or 3");
  require(omega > 0.0 && std::isfinite(omega) && std::isfinite(alpha), "count_states: invalid model");
  check_budgets(budgets);
  const double e_min = budgets.e_min_factor * omega;
  StateCount c;
  const int sectors = d == 1 ? 2 : budgets.max_sector + 1;
  c.per_sector.assign(sectors, 0);
  if (d == 1 && alpha >= 0.0) return c;
  parallel_for(sectors, budgets.jobs, [&](int ell) {
    const EigenSystem es = sym_eigen(sector_operator(d, omega, e_min, ell, budgets));
    int n = 0;
    for (int k = 0; k < es.values.size(); ++k)
      if (d == 1 ? 1.0 + alpha * es.values(k) < 0.0 : es.values(k) + alpha < 0.0) ++n;
    c.per_sector[ell] = n;
  });
  for (int ell = 0; ell < sectors; ++ell) {
    const int n = c.per_sector[ell];
    const int size = d == 1 ? budgets.basis_1d : budgets.basis_radial;
    c.count += d == 1 ? n : n * sector_degeneracy(d, ell);
    if (n == size || (d > 1 && ell == budgets.max_sector && n > 0)) c.partial = true;
  }
  return c;
}

double charge_value(int d, int sector, double scale, const Eigen::VectorXd& coeffs, Point s) {
  require(static_cast<int>(s.size()) == d, "charge_value: point dimension mismatch");
  double r2 = 0.0;
  for (double v : s) r2 += v * v;
  const double r = std::sqrt(r2);
  double ang = 0.0;
  if (d == 1) ang = s[0];
  if (d == 2) ang = std::atan2(s[1], s[0]);
  if (d == 3) ang = r > 0.0 ? s[2] / r : 1.0;
  const int n = static_cast<int>(coeffs.size());
  std::vector<double> f(n);
  radial_functions(d, sector, n, std::sqrt(scale) * r, f.data());
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += coeffs(k) * f[k];
  return std::pow(scale, 0.25 * d) * sum * angular_factor(d, sector, ang);
}

double potential_value(int d, double omega, double lambda, int sector, double scale, const Eigen::VectorXd& coeffs,
                       Point x, Point y, double rel_tol) {
  require(static_cast<int>(x.size()) == d && static_cast<int>(y.size()) == d,
          "potential_value: point dimension mismatch");
  require(omega > 0.0 && lambda > 0.0 && scale > 0.0, "potential_value: omega, lambda, scale must be positive");
  double dist2 = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
  for (int i = 0; i < d; ++i) {
    dist2 += (x[i] - y[i]) * (x[i] - y[i]);
    xx += x[i] * x[i];
    yy += y[i] * y[i];
    xy += x[i] * y[i];
  }
  if (d > 1 && dist2 == 0.0) throw InvalidArgument("potential_value: point on the coincidence set");

  // Charge as polynomial times e^{-scale |s|^2 / 2}: exact Gauss-Hermite in s.
  int kmax = 0;
  const double cmax = coeffs.cwiseAbs().maxCoeff();
  for (int k = 0; k < coeffs.size(); ++k)
    if (std::abs(coeffs(k)) > 1e-15 * cmax) kmax = k;
  const Eigen::VectorXd c = coeffs.head(kmax + 1);
  const int ngh = kmax + sector / 2 + 2;
  const QuadRule gh = gauss_hermite(ngh);
  const double b = scale;
  auto Q = [&](const double* s) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += s[i] * s[i];
    return charge_value(d, sector, b, c, Point(s, d)) * std::exp(0.5 * b * r2);
  };

  NuProfile prof;
  prof.p = lambda / omega;
  prof.endpoint_class = d == 1 ? EndpointClass::D2G : EndpointClass::D3G;
  prof.relative_tolerance = std::min(rel_tol, 1e-6);
  prof.feature_scale = d == 1 && dist2 == 0.0 ? 1.0 : std::min(1.0, std::sqrt(0.5 * omega * dist2));
  const double w = omega;
  auto g = [&](const NuNode& nd) {
    if (nd.t == 0.0) return 0.0;
    const double t = nd.t / w;
    const double th = std::tanh(0.5 * w * t);
    const double a1 = 0.5 / t;
    const double a2 = 0.25 * w * (th + 1.0 / th) + 0.5 * b;
    const double A = a1 + a2;
    const double beta = 0.5 * w * (1.0 / th - th);
    const double expo = -(a1 * a2 * dist2 + a1 * (w * th + b) * xy +
                          (0.25 * w * w + 0.25 * b * stable_coth_minus_inv(w, t)) * yy) /
                        A;
    double M[3];
    for (int i = 0; i < d; ++i) M[i] = (2.0 * a1 * x[i] + beta * y[i]) / (2.0 * A);
    const double sa = 1.0 / std::sqrt(A);
    double sum = 0.0, s[3];
    const int n = ngh;
    const int total = d == 1 ? n : (d == 2 ? n * n : n * n * n);
    for (int idx = 0; idx < total; ++idx) {
      int rem = idx;
      double wt = 1.0;
      for (int i = 0; i < d; ++i) {
        const int j = rem % n;
        rem /= n;
        s[i] = M[i] + gh.nodes[j] * sa;
        wt *= gh.weights[j];
      }
      sum += wt * Q(s);
    }
    const double pre = std::pow(2.0 * kPi * t, -0.5 * d) * std::pow(w / (kPi * (-std::expm1(-2.0 * w * t))), 0.5 * d) *
                       std::pow(A, -0.5 * d);
    return std::exp(-prof.p * nd.t + expo) * pre * sum / w;
  };
  NuRule rule = nu_rule_fixed(prof, 0);
  double prev = integrate_t(g, rule);
  for (int level = 1; level <= 6; ++level) {
    rule = nu_rule_fixed(prof, level);
    const double val = integrate_t(g, rule);
    if (std::abs(val - prev) <= rel_tol * std::abs(val) + 1e-300) return val;
    prev = val;
  }
  throw NumericalError("potential_value: t-quadrature did not converge");
}

SampleGrid sample_eigenfunction(const BoundState& state, int d, double omega, const std::vector<double>& xs,
                                const std::vector<double>& ys) {
  SampleGrid g;
  g.xs = xs;
  g.ys = ys;
  g.values.resize(xs.size(), ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      double x[3] = {xs[i], 0.0, 0.0}, y[3] = {ys[j], 0.0, 0.0};
      if (d > 1 && xs[i] == ys[j]) {
        g.values(i, j) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      g.values(i, j) = potential_value(d, omega, state.energy, state.sector, state.scale, state.charge, Point(x, d),
                                       Point(y, d));
    }
  }
  return g;
}

double measure_alpha0_1d(double omega, const SolverBudgets& budgets) {
  check_budgets(budgets);
  const auto m = merged_mu(omega, budgets.e_min_factor * omega, budgets);
  return 1.0 / m[1].value;
}

}  // namespace cspec
