#include "cspec/kernels.hpp"

#include <cmath>
#include <numbers>

#include "cspec/error.hpp"

namespace cspec {

namespace {

constexpr double kPi = std::numbers::pi;

double sqdist(Point a, Point b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double sqsum(Point a, Point b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] + b[i]) * (a[i] + b[i]);
  return s;
}

void check_points(int d, std::initializer_list<Point> pts) {
  for (Point p : pts) require(static_cast<int>(p.size()) == d, "point dimension does not match d");
}

// Integrate g over t with nu_rule panels, doubling until two levels agree.
double converged_t_integral(const NuProfile& prof, const std::function<double(const NuNode&)>& g,
                            double rel_tol, const char* what) {
  NuRule rule = nu_rule_fixed(prof, 0);
  double prev = integrate_t(g, rule);
  for (int level = 1; level <= 6; ++level) {
    rule = nu_rule_fixed(prof, level);
    const double val = integrate_t(g, rule);
    if (std::abs(val - prev) <= rel_tol * std::abs(val)) return val;
    prev = val;
  }
  throw NumericalError(std::string(what) + ": nu-quadrature did not converge to " + std::to_string(rel_tol));
}

}  // namespace

void ModelSpec::validate() const {
  require(d >= 1 && d <= 3, "ModelSpec: d must be 1, 2 or 3");
  require(omega > 0.0 && std::isfinite(omega), "ModelSpec: omega must be positive");
  require(lambda > 0.0 && std::isfinite(lambda), "ModelSpec: lambda must be positive");
  require(std::isfinite(alpha), "ModelSpec: alpha must be finite");
}

double hermite_psi(int n, double omega, double x) {
  require(n >= 0 && n <= kHermiteMaxLevel, "hermite_psi: level out of range [0, 200]");
  require(omega > 0.0, "hermite_psi: omega must be positive");
  std::vector<double> v(n + 1);
  hermite_psi_all(n, omega, x, v.data());
  return v[n];
}

void hermite_psi_all(int nmax, double omega, double x, double* out) {
  const double s = std::sqrt(omega);
  const double xi = s * x;
  const double scale = std::sqrt(s);  // omega^{1/4}
  double p0 = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
  out[0] = scale * p0;
  if (nmax == 0) return;
  double p1 = std::sqrt(2.0) * xi * p0;
  out[1] = scale * p1;
  for (int n = 1; n < nmax; ++n) {
    const double p2 = std::sqrt(2.0 / (n + 1)) * xi * p1 - std::sqrt(static_cast<double>(n) / (n + 1)) * p0;
    p0 = p1;
    p1 = p2;
    out[n + 1] = scale * p1;
  }
}

double heat(int d, double t, Point x, Point xp) {
  require(t > 0.0, "heat: t must be positive");
  return std::pow(2.0 * kPi * t, -0.5 * d) * std::exp(-sqdist(x, xp) / (2.0 * t));
}

double mehler(const ModelSpec& spec, double t, Point y, Point yp) {
  require(t > 0.0, "mehler: t must be positive");
  check_points(spec.d, {y, yp});
  const double w = spec.omega;
  const double wt = w * t;
  // e^{omega d t/2} / sinh(omega t)^{d/2} = (2/(1 - e^{-2 omega t}))^{d/2}
  const double pre = std::pow(w / (2.0 * kPi) * 2.0 / (-std::expm1(-2.0 * wt)), 0.5 * spec.d);
  const double th = std::tanh(0.5 * wt);
  const double expo = -0.25 * w * (sqsum(y, yp) * th + sqdist(y, yp) / th);
  return pre * std::exp(expo);
}

double green(const ModelSpec& spec, Point x, Point y, Point xp, Point yp, double rel_tol) {
  spec.validate();
  check_points(spec.d, {x, y, xp, yp});
  const double s2 = sqdist(x, xp) + sqdist(y, yp);
  if (s2 == 0.0) throw InvalidArgument("green: coincident points (diagonal divergence)");
  const double w = spec.omega;
  NuProfile prof;
  prof.p = spec.lambda / w;
  prof.endpoint_class = spec.d == 1 ? EndpointClass::D2G : EndpointClass::D3G;
  prof.relative_tolerance = std::min(rel_tol, 1e-6);
  prof.feature_scale = std::min(1.0, std::sqrt(0.5 * w * s2));
  auto g = [&](const NuNode& nd) {
    const double t = nd.t / w;  // physical time
    if (nd.t == 0.0) return 0.0;
    return std::exp(-prof.p * nd.t) * heat(spec.d, t, x, xp) * mehler(spec, t, y, yp) / w;
  };
  return converged_t_integral(prof, g, rel_tol, "green");
}

SeriesValue green_series_1d(double omega, double lambda, int n_max, double x, double y, double xp, double yp,
                            double rel_tol) {
  require(omega > 0.0 && lambda > 0.0, "green_series_1d: omega and lambda must be positive");
  require(n_max >= 0, "green_series_1d: n_max must be nonnegative");
  const double s = std::abs(x - xp);
  // Cramer's inequality |Psi_n| <= 1.086435 pi^{-1/4} omega^{1/4}.
  const double c2 = std::pow(1.086435, 2) / std::sqrt(kPi) * std::sqrt(omega);
  std::vector<double> py(n_max + 1), pyp(n_max + 1);
  hermite_psi_all(n_max, omega, y, py.data());
  hermite_psi_all(n_max, omega, yp, pyp.data());
  SeriesValue r;
  double sum = 0.0, comp = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double kappa = std::sqrt(2.0 * (omega * n + lambda));
    const double term = py[n] * pyp[n] * std::exp(-kappa * s) / kappa;
    // Kahan summation.
    const double yk = term - comp;
    const double tk = sum + yk;
    comp = (tk - sum) - yk;
    sum = tk;
    r.terms = n + 1;
    if (s > 0.0) {
      r.tail_bound = c2 * std::exp(-kappa * s) / (omega * s);
      if (r.tail_bound <= rel_tol * std::abs(sum) && n >= 1) break;
    } else {
      r.tail_bound = std::numeric_limits<double>::infinity();
    }
  }
  r.value = sum;
  if (!(r.tail_bound <= rel_tol * std::abs(sum))) {
    throw NumericalError("green_series_1d: tail bound " + std::to_string(r.tail_bound) +
                         " not below tolerance within n_max = " + std::to_string(n_max));
  }
  return r;
}

double k_kernel(const ModelSpec& spec, Point x, Point xp, double rel_tol) {
  spec.validate();
  check_points(spec.d, {x, xp});
  if (sqdist(x, xp) == 0.0) throw InvalidArgument("k_kernel: coincident points (diagonal divergence)");
  return green(spec, x, x, xp, xp, rel_tol);
}

double k_kernel_regrouped_1d(double lambda, double x, double xp, double rel_tol) {
  require(lambda > 0.0, "k_kernel_regrouped_1d: lambda must be positive");
  require(x != xp, "k_kernel_regrouped_1d: coincident points");
  NuProfile prof;
  prof.p = lambda;
  prof.endpoint_class = EndpointClass::D1;
  prof.relative_tolerance = std::min(rel_tol, 1e-6);
  prof.feature_scale = std::min(1.0, std::abs(x - xp));
  const double d2 = (x - xp) * (x - xp);
  auto g = [&](const NuNode& nd) {
    const double t = nd.t;
    const double omn = nd.one_minus_nu;
    const double om2 = omn * (2.0 - omn);  // 1 - nu^2
    const double nu = nd.nu;
    // m^lambda(nu) * nu, in t-measure
    const double m = std::exp(-lambda * t) / (std::sqrt(2.0) * kPi * std::sqrt(om2 * t));
    const double expo = -0.5 * omn / (2.0 - omn) * (x * x + xp * xp) - d2 / (2.0 * t) - nu * d2 / om2;
    return m * std::exp(expo);
  };
  return converged_t_integral(prof, g, rel_tol, "k_kernel_regrouped_1d");
}

double constant_C_with_panels(int panels) {
  require(panels >= 1, "constant_C: panels must be >= 1");
  // First piece directly in nu on (0,1); the integrand vanishes to all orders at 0.
  const QuadRule g = gauss_legendre(16, 0.0, 1.0);
  double i1 = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) / panels;
    const double h = 1.0 / panels;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double nu = a + h * g.nodes[i];
      i1 += h * g.weights[i] * std::exp(-1.0 / nu) / nu;
    }
  }
  // Second piece on (1, inf) through nu = e^{s}: e^{-e^{-s}} (-s) e^{-s} ds, s in (0, 60).
  double i2 = 0.0;
  const double smax = 60.0;
  for (int k = 0; k < panels; ++k) {
    const double h = smax / panels;
    const double a = k * h;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = a + h * g.nodes[i];
      i2 += h * g.weights[i] * std::exp(-std::exp(-s)) * (-s) * std::exp(-s);
    }
  }
  return -(i1 + i2);
}

double constant_C() {
  static const double c = constant_C_with_panels(128);
  return c;
}

namespace {

// int_0^1 dnu [1 - c nu^{p-1} (1-nu)^{k} / D1^{k} e^{-E X}] / (1-nu)^{k}, k = d/2,
// with E = num/(2 D1). `fourier` drops the 2(1-nu)^2 term of num.
double renormalized_integral(int d, double p, double X, bool fourier) {
  NuProfile prof;
  prof.p = p;
  prof.endpoint_class = d == 2 ? EndpointClass::D2a : EndpointClass::D3a;
  prof.relative_tolerance = 1e-12;
  prof.feature_scale = std::min(1.0, 1.0 / std::sqrt(std::max(X, 1e-300)));
  const double kexp = 0.5 * d;
  const double c = d == 2 ? 4.0 : 8.0;
  // The expansion is in t X and t p; below this the direct form loses only O(1/t) absolute digits.
  const double t_series = 1e-4 / std::max({1.0, X, p});
  auto g = [&](const NuNode& nd) {
    const double t = nd.t;
    const double nu = nd.nu;
    if (t < t_series) {
      double f;
      if (d == 2 && !fourier) {
        f = (X + 2 * p - 3) / 2 - t * (3 * X * X + 12 * X * p - 24 * X + 12 * p * p - 48 * p + 38) / 24 +
            t * t *
                (X * X * X + 6 * X * X * p - 12 * X * X + 12 * X * p * p - 48 * X * p + 35 * X + 8 * p * p * p -
                 48 * p * p + 80 * p - 32) /
                48;
      } else if (d == 2) {
        f = X / 4 + p - 1.5 + t * (-X * X / 32 - X * p / 4 + X / 2 - p * p / 2 + 2 * p - 19.0 / 12) +
            t * t *
                (X * X * X / 384 + X * X * p / 32 - X * X / 16 + X * p * p / 8 - X * p / 2 + 3 * X / 8 +
                 p * p * p / 6 - p * p + 5 * p / 3 - 2.0 / 3);
      } else {
        const double c0 = 15360 * X + 30720 * p - 53760;
        const double c1 = -3840 * X * X - 15360 * X * p + 38400 * X - 15360 * p * p + 76800 * p - 73920;
        const double c2 = 640 * X * X * X + 3840 * X * X * p - 9600 * X * X + 7680 * X * p * p - 38400 * X * p +
                          37120 * X + 5120 * p * p * p - 38400 * p * p + 80640 * p - 40880;
        f = (c0 + t * c1 + t * t * c2) / (30720.0 * std::sqrt(t));
      }
      return f * nu;
    }
    const double omn = nd.one_minus_nu;
    const double om2 = omn * (2.0 - omn);
    const double D1 = (1.0 + nu * nu) * t + om2;
    const double num = fourier ? om2 * t : om2 * t + 2.0 * omn * omn;
    const double E = num / (2.0 * D1);
    // nu / (1-nu)^k - c e^{-p t} / D1^k e^{-E X}
    return nu / std::pow(omn, kexp) - c * std::exp(-p * t - E * X) / std::pow(D1, kexp);
  };
  return converged_t_integral(prof, g, 1e-11, "a_lambda");
}

}  // namespace

double a_lambda(const ModelSpec& spec, double r) {
  spec.validate();
  require(spec.d == 2 || spec.d == 3, "a_lambda: d must be 2 or 3");
  require(r >= 0.0, "a_lambda: r must be nonnegative");
  const double p = spec.lambda / spec.omega;
  const double X = spec.omega * r * r;
  const double I = renormalized_integral(spec.d, p, X, false);
  if (spec.d == 2) return (constant_C() + I) / (4.0 * kPi);
  return std::sqrt(spec.omega) * std::pow(4.0 * kPi, -1.5) * (0.5 + I);
}

double a_tilde(const ModelSpec& spec, double k) {
  spec.validate();
  require(spec.d == 2, "a_tilde: only d = 2 is supported");
  require(k >= 0.0, "a_tilde: k must be nonnegative");
  const double p = spec.lambda / spec.omega;
  const double X = k * k / spec.omega;
  return (constant_C() + renormalized_integral(2, p, X, true)) / (4.0 * kPi);
}

double g_tilde(const ModelSpec& spec, double k, double kp, double angle) {
  spec.validate();
  require(spec.d == 2, "g_tilde: only d = 2 is supported");
  require(k >= 0.0 && kp >= 0.0, "g_tilde: radii must be nonnegative");
  const double w = spec.omega;
  const double a = k / std::sqrt(w), b = kp / std::sqrt(w);
  const double kdot = a * b * std::cos(angle);
  const double diff2 = a * a + b * b - 2.0 * kdot;
  if (diff2 <= 1e-300) throw InvalidArgument("g_tilde: coincident momenta (diagonal divergence)");
  NuProfile prof;
  prof.p = spec.lambda / w;
  prof.endpoint_class = EndpointClass::D2G;
  prof.relative_tolerance = 1e-10;
  prof.feature_scale = std::min(1.0, std::sqrt(diff2));
  auto g = [&](const NuNode& nd) {
    const double t = nd.t, nu = nd.nu, omn = nd.one_minus_nu;
    const double om2 = omn * (2.0 - omn);
    const double D = om2 * t + 2.0 * omn * omn;
    const double D1 = (1.0 + nu * nu) * t + om2;
    const double cross = om2 + 2.0 * nu * t;
    const double expo = -(D1 * (a * a + b * b) - 2.0 * cross * kdot) / (2.0 * D);
    return std::exp(-prof.p * t + expo) / (2.0 * kPi * kPi * D);
  };
  return converged_t_integral(prof, g, 1e-11, "g_tilde") / w;
}

SliceParams slice_params(double t) {
  SliceParams s;
  s.t = t;
  s.A = 0.5 * std::tanh(0.5 * t);
  s.B = 0.5 / t + (t > 700.0 ? 0.0 : 0.5 / std::sinh(t));
  s.P = s.A + s.B;
  s.Delta = s.A * (s.A + 2.0 * s.B);
  const double sd = std::sqrt(s.Delta);
  s.beta = 2.0 * sd;
  s.one_minus_z = 2.0 * s.A / (sd + s.A);
  s.z = s.B / (s.P + sd);
  s.tau = s.z < 0.5 ? -std::log(s.z) : -std::log1p(-s.one_minus_z);
  return s;
}

double slice_prefactor(int d, double t) {
  return 1.0 / (std::pow(2.0, 0.5 * d) * std::pow(kPi, d) * std::pow(-std::expm1(-2.0 * t) * t, 0.5 * d));
}

double renorm_density(int d, const NuNode& nd) {
  if (d == 2) return nd.nu / (4.0 * kPi * nd.one_minus_nu);
  if (d == 3) return nd.nu * std::pow(4.0 * kPi * nd.one_minus_nu, -1.5);
  return 0.0;
}

double renorm_constant(int d) {
  if (d == 2) return constant_C() / (4.0 * kPi);
  if (d == 3) return 0.5 * std::pow(4.0 * kPi, -1.5);
  return 0.0;
}

}  // namespace cspec
