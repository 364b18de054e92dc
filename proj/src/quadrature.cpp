#include "cspec/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cspec/error.hpp"

namespace cspec {

namespace {

// Gauss rule of a symmetric Jacobi matrix: diagonal a (n entries), off-diagonal b (n entries, the last one
// couples p_{n-1} to p_n). Golub-Welsch nodes are Newton-polished on p_n and the weights come from the
// Christoffel sum mu0 / sum_k p_k(x)^2, which keeps tiny tail weights relatively accurate.
QuadRule gauss_from_jacobi(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double mu0) {
  const auto n = a.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(a, b.head(n - 1), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Gauss rule eigensolve failed");
  QuadRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    double sum = 0.0;
    for (int it = 0; it < 4; ++it) {
      double p0 = 0.0, p1 = 1.0, d0 = 0.0, d1 = 0.0;
      sum = 1.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double bm = k > 0 ? b(k - 1) : 0.0;
        const double p2 = ((x - a(k)) * p1 - bm * p0) / b(k);
        const double d2 = ((x - a(k)) * d1 + p1 - bm * d0) / b(k);
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
        if (k + 1 < n) sum += p1 * p1;
      }
      if (d1 == 0.0 || !std::isfinite(p1 / d1)) break;
      const double dx = p1 / d1;
      x -= dx;
      if (std::abs(dx) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    }
    // Christoffel sum at the final node.
    double p0 = 0.0, p1 = 1.0;
    sum = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const double bm = k > 0 ? b(k - 1) : 0.0;
      const double p2 = ((x - a(k)) * p1 - bm * p0) / b(k);
      p0 = p1;
      p1 = p2;
      sum += p1 * p1;
    }
    r.nodes[i] = x;
    r.weights[i] = mu0 / sum;
  }
  return r;
}

}  // namespace

QuadRule gauss_legendre(int n, double a, double b) {
  require(n >= 1, "gauss_legendre: n must be >= 1");
  require(a < b, "gauss_legendre: need a < b");
  QuadRule r;
  r.a = a;
  r.b = b;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = mid - half * x;
    r.nodes[n - 1 - i] = mid + half * x;
    r.weights[i] = r.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = mid;  // exact centre
  if (n == 1) r.weights[0] = b - a;
  return r;
}

QuadRule gauss_hermite(int n) {
  require(n >= 1, "gauss_hermite: n must be >= 1");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd b(n);
  for (int k = 1; k <= n; ++k) b(k - 1) = std::sqrt(0.5 * k);
  QuadRule r = gauss_from_jacobi(a, b, std::sqrt(std::numbers::pi));
  // Enforce exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  r.a = -std::numeric_limits<double>::infinity();
  r.b = std::numeric_limits<double>::infinity();
  return r;
}

QuadRule gauss_laguerre(int n, double alpha) {
  require(n >= 1, "gauss_laguerre: n must be >= 1");
  require(alpha > -1.0, "gauss_laguerre: alpha must exceed -1");
  Eigen::VectorXd a(n);
  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) a(k) = 2.0 * k + alpha + 1.0;
  for (int k = 1; k <= n; ++k) b(k - 1) = std::sqrt(k * (k + alpha));
  QuadRule r = gauss_from_jacobi(a, b, std::tgamma(alpha + 1.0));
  r.a = 0.0;
  r.b = std::numeric_limits<double>::infinity();
  return r;
}

double integrate(const std::function<double(double)>& f, const QuadRule& rule) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v))
      throw NumericalError("integrate: non-finite integrand at node " + std::to_string(rule.nodes[i]));
    s += rule.weights[i] * v;
  }
  return s;
}

EndpointClass endpoint_class_from_string(const std::string& s) {
  if (s == "1D") return EndpointClass::D1;
  if (s == "2D-a") return EndpointClass::D2a;
  if (s == "2D-G") return EndpointClass::D2G;
  if (s == "3D-a") return EndpointClass::D3a;
  if (s == "3D-G") return EndpointClass::D3G;
  throw InvalidArgument("unknown endpoint class: " + s);
}

std::string to_string(EndpointClass c) {
  switch (c) {
    case EndpointClass::D1: return "1D";
    case EndpointClass::D2a: return "2D-a";
    case EndpointClass::D2G: return "2D-G";
    case EndpointClass::D3a: return "3D-a";
    case EndpointClass::D3G: return "3D-G";
  }
  return "?";
}

namespace {

bool has_subtraction(EndpointClass c) { return c == EndpointClass::D2a || c == EndpointClass::D3a; }

void check_profile(const NuProfile& pr) {
  require(pr.p > 0.0 && std::isfinite(pr.p), "NuProfile: p must be positive");
  require(pr.relative_tolerance > 0.0 && pr.relative_tolerance < 1.0,
          "NuProfile: relative_tolerance must lie in (0,1)");
  require(pr.feature_scale > 0.0, "NuProfile: feature_scale must be positive");
}

const QuadRule& panel_rule() {
  static const QuadRule r = gauss_legendre(kNuPanelOrder, 0.0, 1.0);
  return r;
}

void append_panel(NuRule& rule, double lo, double hi, int key) {
  const QuadRule& g = panel_rule();
  for (int i = 0; i < kNuPanelOrder; ++i) {
    const double u = lo + (hi - lo) * g.nodes[i];
    const double t = u * u;
    NuNode nd;
    nd.u = u;
    nd.t = t;
    nd.nu = std::exp(-t);
    nd.one_minus_nu = -std::expm1(-t);
    nd.weight_t = (hi - lo) * g.weights[i] * 2.0 * u;
    nd.panel_key = key;
    nd.index = i;
    rule.nodes.push_back(nd);
  }
}

}  // namespace

NuRule nu_rule_fixed(const NuProfile& profile, int subdivision) {
  check_profile(profile);
  require(subdivision >= 0 && subdivision <= 12, "nu_rule: subdivision out of range");
  const double tail = std::log(1.0 / profile.relative_tolerance) + 30.0;
  double t_max = tail / profile.p;
  if (has_subtraction(profile.endpoint_class)) t_max = std::max(t_max, tail);
  const double u_max = std::sqrt(t_max);
  const int k_lo = static_cast<int>(std::floor(std::log2(0.05 * std::min(1.0 / std::sqrt(std::max(profile.p, 1.0)), profile.feature_scale))));
  const int k_hi = std::max(k_lo + 1, static_cast<int>(std::ceil(std::log2(u_max))));

  NuRule rule;
  rule.profile = profile;
  rule.subdivision = subdivision;
  rule.u_lo = std::ldexp(1.0, k_lo);
  rule.u_max = std::ldexp(1.0, k_hi);
  const int parts = 1 << subdivision;
  // Panel keys: first panel [0, 2^k_lo] gets an odd base key, [2^k, 2^{k+1}] an even one;
  // level and subpanel index are folded in so every key names one u-interval.
  auto add = [&](double lo, double hi, int base_key) {
    for (int s = 0; s < parts; ++s) {
      const double a = lo + (hi - lo) * s / parts;
      const double b = lo + (hi - lo) * (s + 1) / parts;
      append_panel(rule, a, b, base_key * 65536 + subdivision * 4096 + s);
    }
  };
  add(0.0, rule.u_lo, 2 * k_lo + 1);
  for (int k = k_lo; k < k_hi; ++k) add(std::ldexp(1.0, k), std::ldexp(1.0, k + 1), 2 * k);
  return rule;
}

NuRule refine(const NuRule& rule) { return nu_rule_fixed(rule.profile, rule.subdivision + 1); }

double integrate_t(const std::function<double(const NuNode&)>& g, const NuRule& rule) {
  double s = 0.0;
  for (const auto& nd : rule.nodes) {
    const double v = g(nd);
    if (!std::isfinite(v))
      throw NumericalError("integrate: non-finite integrand at t = " + std::to_string(nd.t));
    s += nd.weight_t * v;
  }
  return s;
}

double integrate(const std::function<double(const NuNode&)>& f, const NuRule& rule) {
  double s = 0.0;
  for (const auto& nd : rule.nodes) {
    if (nd.nu == 0.0) {
      // nu underflowed; the node only drops out when nu^p is negligible there too.
      if (rule.profile.p * nd.t < 700.0)
        throw NumericalError("integrate: nu underflows at t = " + std::to_string(nd.t) +
                             " where nu^p is not negligible; use integrate_t");
      continue;
    }
    const double v = f(nd);
    if (!std::isfinite(v))
      throw NumericalError("integrate: non-finite integrand at nu = " + std::to_string(nd.nu));
    s += nd.weight_t * nd.nu * v;
  }
  return s;
}

double model_density_t(const NuProfile& pr, const NuNode& nd) {
  const double p = pr.p;
  const double t = nd.t;
  const double pw = std::exp(-p * t);             // nu^p
  const double one_m_nu2 = -std::expm1(-2.0 * t);  // 1 - nu^2
  const double pi = std::numbers::pi;
  const double gauss = pr.feature_scale * pr.feature_scale / (2.0 * t);
  switch (pr.endpoint_class) {
    // Kernel classes carry the off-diagonal factor exp(-s^2 / 2t), s = feature_scale; without it the
    // 1D profile diverges logarithmically at nu -> 1.
    case EndpointClass::D1:
      return pw / std::sqrt(one_m_nu2 * t) * std::exp(-gauss);
    case EndpointClass::D2G:
      return pw / (one_m_nu2 * t) * std::exp(-gauss);
    case EndpointClass::D3G:
      return pw / std::pow(one_m_nu2 * t, 1.5) * std::exp(-gauss);
    case EndpointClass::D2a:
    case EndpointClass::D3a: {
      const double A = 0.5 * std::tanh(0.5 * t);
      const double B = 0.5 / t + 0.5 / std::sinh(t);
      const double P = A + B;
      if (pr.endpoint_class == EndpointClass::D2a)
        return nd.nu / (4.0 * pi * nd.one_minus_nu) - pw / (2.0 * pi * pi * one_m_nu2 * t) * (pi / P);
      return nd.nu * std::pow(4.0 * pi * nd.one_minus_nu, -1.5) -
             pw / (std::pow(2.0, 1.5) * pi * pi * pi * std::pow(one_m_nu2 * t, 1.5)) * std::pow(pi / P, 1.5);
    }
  }
  return 0.0;
}

double model_integrand(const NuProfile& pr, const NuNode& nd) { return model_density_t(pr, nd) / nd.nu; }

NuRule nu_rule(const NuProfile& profile, int node_budget) {
  check_profile(profile);
  auto model = [&](const NuNode& nd) { return model_density_t(profile, nd); };
  NuRule cur = nu_rule_fixed(profile, 0);
  double prev = integrate_t(model, cur);
  for (;;) {
    NuRule next = refine(cur);
    if (static_cast<int>(next.size()) > node_budget) {
      throw NumericalError("nu_rule: tolerance " + std::to_string(profile.relative_tolerance) +
                           " not reached within node budget " + std::to_string(node_budget) + " (class " +
                           to_string(profile.endpoint_class) + ", p = " + std::to_string(profile.p) + ")");
    }
    const double val = integrate_t(model, next);
    if (std::abs(val - prev) <= profile.relative_tolerance * std::abs(val)) return cur;
    cur = std::move(next);
    prev = val;
  }
}

}  // namespace cspec
