#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "cspec/error.hpp"
#include "cspec/operators.hpp"

namespace cspec {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kSliceBuffer = 30;
}  // namespace

void radial_functions(int d, int ell, int count, double r, double* out) {
  const double a = ell + 0.5 * d - 1.0;
  const double s = r * r;
  // log of sqrt(2) r^ell e^{-s/2} / sqrt(Gamma(a+1)), kept in logs for large ell or r
  const double lr = r > 0.0 ? ell * std::log(r) : (ell == 0 ? 0.0 : -INFINITY);
  const double pre = std::exp(0.5 * std::log(2.0) + lr - 0.5 * s - 0.5 * std::lgamma(a + 1.0));
  if (count <= 0) return;
  double l0 = 1.0, l1 = 0.0;
  out[0] = pre * l0;
  if (count == 1) return;
  l1 = (a + 1.0 - s) / std::sqrt(a + 1.0);
  out[1] = pre * l1;
  for (int k = 1; k + 1 < count; ++k) {
    const double l2 = ((2.0 * k + a + 1.0 - s) * l1 - std::sqrt(k * (k + a)) * l0) / std::sqrt((k + 1.0) * (k + a + 1.0));
    l0 = l1;
    l1 = l2;
    out[k + 1] = pre * l1;
  }
}

double angular_factor(int d, int ell, double v) {
  switch (d) {
    case 1:
      if (ell == 0) return 1.0 / std::sqrt(2.0);
      return (v >= 0.0 ? 1.0 : -1.0) / std::sqrt(2.0);
    case 2:
      if (ell == 0) return 1.0 / std::sqrt(2.0 * kPi);
      return std::cos(ell * v) / std::sqrt(kPi);
    case 3:
      return std::sqrt((2.0 * ell + 1.0) / (4.0 * kPi)) * std::legendre(ell, v);
  }
  throw InvalidArgument("angular_factor: bad dimension");
}

int sector_degeneracy(int d, int ell) {
  if (d == 1) return 1;
  if (d == 2) return ell == 0 ? 1 : 2;
  return 2 * ell + 1;
}

Eigen::MatrixXd slice_matrix_direct(int d, int ell, int size, double beta, double z, double one_minus_z, double tau) {
  const int n = size + kSliceBuffer;
  const double c = ell + 0.5 * d;
  Eigen::VectorXd diag(n), off(n - 1);
  const double dp = 0.5 * (beta + 1.0 / beta);
  const double om = 0.5 * (1.0 / beta - beta);
  for (int k = 0; k < n; ++k) diag(k) = dp * (2.0 * k + c);
  for (int k = 0; k + 1 < n; ++k) off(k) = om * std::sqrt((k + 1.0) * (k + c));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("slice_matrix: tridiagonal eigensolve failed");
  // [pi (1 - z^2) / (beta z)]^{d/2} folded into the exponent.
  const double one_m_z2 = one_minus_z * (1.0 + z);
  const double logc = 0.5 * d * std::log(kPi * one_m_z2 / (beta * z));
  Eigen::VectorXd f(n);
  for (int k = 0; k < n; ++k) f(k) = std::exp(logc - tau * es.eigenvalues()(k));
  const auto V = es.eigenvectors().topRows(size);
  return V * f.asDiagonal() * V.transpose();
}

namespace {

struct SliceKey {
  int d, ell, size;
  double ratio;
  bool fourier;
  int panel, index;
  auto operator<=>(const SliceKey&) const = default;
};

std::mutex g_slice_mu;
std::map<SliceKey, Eigen::MatrixXd> g_slices;

}  // namespace

const Eigen::MatrixXd& slice_matrix(const SectorSpec& s, double ratio, const NuNode& node) {
  SliceKey key{s.d, s.ell, s.size, ratio, s.fourier, node.panel_key, node.index};
  std::lock_guard<std::mutex> lock(g_slice_mu);
  auto it = g_slices.find(key);
  if (it != g_slices.end()) return it->second;
  const SliceParams sp = slice_params(node.t);
  double beta = ratio * sp.beta;
  if (s.fourier) beta = 1.0 / beta;
  auto res = g_slices.emplace(key, slice_matrix_direct(s.d, s.ell, s.size, beta, sp.z, sp.one_minus_z, sp.tau));
  return res.first->second;
}

std::size_t slice_cache_size() {
  std::lock_guard<std::mutex> lock(g_slice_mu);
  return g_slices.size();
}

void clear_slice_cache() {
  std::lock_guard<std::mutex> lock(g_slice_mu);
  g_slices.clear();
}

NuRule operator_rule(int d, double p, bool subtract) {
  NuProfile prof;
  prof.p = p;
  if (d == 1)
    prof.endpoint_class = EndpointClass::D1;
  else if (subtract)
    prof.endpoint_class = d == 2 ? EndpointClass::D2a : EndpointClass::D3a;
  else
    prof.endpoint_class = d == 2 ? EndpointClass::D2G : EndpointClass::D3G;
  prof.relative_tolerance = 1e-12;
  return nu_rule_fixed(prof, 0);
}

Eigen::MatrixXd weighted_sector_matrix(const SectorSpec& s, double omega, const WeightFn& phi, const NuRule& rule,
                                       bool subtract) {
  require(s.d >= 1 && s.d <= 3, "weighted_sector_matrix: bad dimension");
  require(!subtract || s.d >= 2, "weighted_sector_matrix: renormalization needs d >= 2");
  const double ratio = omega / s.scale;
  require(!s.fourier || (s.d == 2 && ratio == 1.0), "weighted_sector_matrix: Fourier path needs d = 2, scale = omega");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(s.size, s.size);
  double sub = 0.0;
  for (const NuNode& nd : rule.nodes) {
    const double f = phi(nd.t);
    if (subtract) sub += nd.weight_t * renorm_density(s.d, nd);
    if (f == 0.0) continue;
    double pref;
    if (s.fourier) {
      const double omn = nd.one_minus_nu;
      const double D = omn * (2.0 - omn) * nd.t + 2.0 * omn * omn;
      pref = 1.0 / (2.0 * kPi * kPi * D);
    } else {
      pref = slice_prefactor(s.d, nd.t);
    }
    const double c = nd.weight_t * f * pref;
    if (c == 0.0 || !std::isfinite(c)) continue;
    acc.noalias() += c * slice_matrix(s, ratio, nd);
  }
  const double factor = s.fourier ? 1.0 : std::pow(omega, s.d - 1) * std::pow(s.scale, -0.5 * s.d);
  acc *= factor;
  if (!subtract) return acc;
  const double c0 = std::pow(omega, 0.5 * s.d - 1.0) * (renorm_constant(s.d) + sub);
  Eigen::MatrixXd out = -acc;
  out.diagonal().array() += c0;
  return out;
}

Eigen::MatrixXd k_sector_matrix(const ModelSpec& spec, int parity, int size, double scale) {
  spec.validate();
  require(spec.d == 1, "k_sector_matrix: d must be 1");
  require(parity == 0 || parity == 1, "k_sector_matrix: parity must be 0 or 1");
  const double p = spec.lambda / spec.omega;
  const NuRule rule = operator_rule(1, p, false);
  SectorSpec s{1, parity, size, scale, false};
  return weighted_sector_matrix(s, spec.omega, [p](double t) { return std::exp(-p * t); }, rule, false);
}

Eigen::MatrixXd gamma_sector_matrix(const ModelSpec& spec, int ell, int size, double scale) {
  spec.validate();
  require(spec.d == 2 || spec.d == 3, "gamma_sector_matrix: d must be 2 or 3");
  require(ell >= 0, "gamma_sector_matrix: sector must be nonnegative");
  const double p = spec.lambda / spec.omega;
  const NuRule rule = operator_rule(spec.d, p, true);
  SectorSpec s{spec.d, ell, size, scale, false};
  return weighted_sector_matrix(s, spec.omega, [p](double t) { return std::exp(-p * t); }, rule, true);
}

Eigen::MatrixXd t0_sector_matrix(const ModelSpec& spec, int ell, int size, double scale) {
  spec.validate();
  const double p = spec.lambda / spec.omega;
  const double w = spec.omega;
  const NuRule rule = operator_rule(spec.d, p, false);
  SectorSpec s{spec.d, ell, size, scale, false};
  return weighted_sector_matrix(s, w, [p, w](double t) { return t / w * std::exp(-p * t); }, rule, false);
}

Eigen::MatrixXd cross_sector_matrix(const ModelSpec& spec, double la, double lb, int ell, int size, double scale) {
  spec.validate();
  require(la > 0.0 && lb > 0.0, "cross_sector_matrix: shifts must be positive");
  const double w = spec.omega;
  const double pa = la / w, pb = lb / w;
  const double plo = std::min(pa, pb), phi_ = std::max(pa, pb);
  const NuRule rule = operator_rule(spec.d, plo, false);
  SectorSpec s{spec.d, ell, size, scale, false};
  // (e^{-pa t} - e^{-pb t}) / (lb - la) in physical units, written around the slower rate.
  auto phi = [plo, phi_, w](double t) {
    const double dp = phi_ - plo;
    if (dp * t < 1e-300) return t / w * std::exp(-plo * t);
    return std::exp(-plo * t) * (-std::expm1(-dp * t)) / (dp * w);
  };
  return weighted_sector_matrix(s, w, phi, rule, false);
}

Eigen::MatrixXd multiplication_matrix(int d, int ell, int size, const std::function<double(double)>& f,
                                      int extra_nodes) {
  const double a = ell + 0.5 * d - 1.0;
  const QuadRule g = gauss_laguerre(size + extra_nodes, a);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd l(size);
  std::vector<double> buf(size);
  for (std::size_t q = 0; q < g.size(); ++q) {
    const double s = g.nodes[q];
    const double r = std::sqrt(s);
    // phi_k(r)^2 r^{d-1} dr = l_k(s)^2 s^a e^{-s} ds, so strip the prefactor from phi.
    radial_functions(d, ell, size, r, buf.data());
    const double pre = std::sqrt(2.0) * std::pow(r, ell) * std::exp(-0.5 * s);
    for (int k = 0; k < size; ++k) l(k) = pre > 0.0 ? buf[k] / pre : 0.0;
    const double fv = f(r);
    m.noalias() += (g.weights[q] * fv) * l * l.transpose();
  }
  return m;
}

Eigen::MatrixXd sector_dvr_transform(int d, int ell, int size) {
  const double a = ell + 0.5 * d - 1.0;
  const QuadRule g = gauss_laguerre(size, a);
  Eigen::MatrixXd U(size, size);
  std::vector<double> buf(size);
  for (int q = 0; q < size; ++q) {
    const double s = g.nodes[q];
    const double r = std::sqrt(s);
    radial_functions(d, ell, size, r, buf.data());
    const double pre = std::sqrt(2.0) * std::pow(r, ell) * std::exp(-0.5 * s);
    for (int k = 0; k < size; ++k) U(q, k) = std::sqrt(g.weights[q]) * buf[k] / pre;
  }
  return U;
}

}  // namespace cspec
