#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cspec/error.hpp"
#include "cspec/quadrature.hpp"
#include "cspec/spectra.hpp"

namespace cspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPanelOrder = 16;

struct Channels {
  std::vector<double> k, w;
  Eigen::MatrixXd a;  // a(i, n) = sqrt(w_i / 2 pi) c_n^(k_i)
};

// Momentum-space channel amplitudes c_n^(k) = F_n(k) / (k^2/2 + omega n + E),
// F_n the cosine or sine transform of Psi_n q (whichever matches its parity).
Channels channel_block(const BoundState& st, double alpha, double omega, int channels, const DensityOptions& o) {
  const double b = st.scale;
  const double E = st.energy;
  int kmax = 0;
  const double cmax = st.charge.cwiseAbs().maxCoeff();
  for (int k = 0; k < st.charge.size(); ++k)
    if (std::abs(st.charge(k)) > 1e-15 * cmax) kmax = k;
  const double deg = 2.0 * kmax + st.sector + 1.0;

  // Momentum grid: geometric panels near 0, uniform beyond.
  const double band_q = std::sqrt(2.0 * deg * b) + 8.0 * std::sqrt(b);
  const double k_top = std::sqrt(2.0 * channels * omega) + band_q + 8.0 * std::sqrt(omega);
  const double k0 = 0.25 * std::min(std::sqrt(2.0 * E), alpha != 0.0 ? std::abs(alpha) : std::sqrt(2.0 * E));
  const double width = kPanelOrder * o.k_spacing * std::sqrt(omega);
  std::vector<double> edges{0.0, std::min(k0, width)};
  while (edges.back() < k_top) {
    const double step = std::min(edges.back(), width);
    edges.push_back(edges.back() + step);
  }
  Channels c;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const QuadRule r = gauss_legendre(kPanelOrder, edges[p], edges[p + 1]);
    for (int i = 0; i < kPanelOrder; ++i) {
      c.k.push_back(r.nodes[i]);
      c.w.push_back(r.weights[i]);
    }
  }
  const int half = static_cast<int>(c.k.size());
  for (int i = 0; i < half; ++i) {
    c.k.push_back(-c.k[i]);
    c.w.push_back(c.w[i]);
  }
  const int m = static_cast<int>(c.k.size());

  // Trapezoid in s: spectrally accurate for the smooth, Gaussian-decaying Psi_n q.
  const double s_top = (std::sqrt(deg) + 7.0) / std::sqrt(b) + 1.0 / std::sqrt(omega);
  const double band = k_top + std::sqrt(2.0 * channels * omega) + band_q;
  const double h = kPi / (1.3 * band);
  const int ns = static_cast<int>(std::ceil(s_top / h));
  const int nsamp = 2 * ns + 1;
  Eigen::MatrixXd pe(channels, nsamp);
  std::vector<double> psi(channels);
  Eigen::VectorXd svals(nsamp);
  for (int j = 0; j < nsamp; ++j) {
    const double s = (j - ns) * h;
    svals(j) = s;
    const double qv = charge_value(1, st.sector, b, st.charge, Point(&s, 1));
    hermite_psi_all(channels - 1, omega, s, psi.data());
    for (int n = 0; n < channels; ++n) pe(n, j) = h * psi[n] * qv;
  }
  Eigen::MatrixXd cs(nsamp, m), sn(nsamp, m);
  for (int j = 0; j < nsamp; ++j)
    for (int i = 0; i < m; ++i) {
      cs(j, i) = std::cos(c.k[i] * svals(j));
      sn(j, i) = std::sin(c.k[i] * svals(j));
    }
  const Eigen::MatrixXd fc = pe * cs;
  const Eigen::MatrixXd fs = pe * sn;
  c.a.resize(m, channels);
  for (int n = 0; n < channels; ++n) {
    const bool even = ((n + st.sector) % 2) == 0;
    for (int i = 0; i < m; ++i) {
      const double f = even ? fc(n, i) : fs(n, i);
      c.a(i, n) = std::sqrt(c.w[i] / (2.0 * kPi)) * f / (0.5 * c.k[i] * c.k[i] + omega * n + E);
    }
  }
  return c;
}

double xi_hat(double kappa, double k) { return std::sqrt(kappa) * 2.0 * kappa / (k * k + kappa * kappa); }

}  // namespace

DensityMatrix reduced_density(const BoundState& state, double alpha, double omega, const DensityOptions& opts) {
  require(state.charge.size() > 0, "reduced_density: state has no charge");
  require(state.energy > 0.0 && omega > 0.0, "reduced_density: energy and omega must be positive");
  require(opts.max_channels >= 1 && opts.capture > 0.0 && opts.k_spacing > 0.0, "reduced_density: bad options");
  DensityMatrix dm;
  Channels c;
  int n = std::min(64, opts.max_channels);
  for (;;) {
    c = channel_block(state, alpha, omega, n, opts);
    dm.trace = c.a.squaredNorm();
    if (1.0 - dm.trace <= opts.capture || n >= opts.max_channels) break;
    n = std::min(4 * n, opts.max_channels);
  }
  dm.channels = n;
  dm.k_nodes = c.k;
  dm.k_weights = c.w;
  dm.factor = std::move(c.a);
  const Eigen::MatrixXd rho = dm.factor * dm.factor.transpose();
  dm.max_asymmetry = (rho - rho.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("reduced_density: eigensolve failed");
  dm.min_eigenvalue = es.eigenvalues().minCoeff();
  dm.adequate = std::abs(dm.trace - 1.0) <= 1e-4;
  return dm;
}

double trace_distance_to_fixed_center(const DensityMatrix& rho, double alpha) {
  require(alpha < 0.0, "trace_distance_to_fixed_center: alpha must be negative");
  const int m = static_cast<int>(rho.k_nodes.size());
  Eigen::VectorXd x(m);
  for (int i = 0; i < m; ++i)
    x(i) = std::sqrt(rho.k_weights[i] / (2.0 * kPi)) * xi_hat(-alpha, rho.k_nodes[i]);
  const Eigen::MatrixXd diff = rho.factor * rho.factor.transpose() - x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("trace_distance_to_fixed_center: eigensolve failed");
  return es.eigenvalues().cwiseAbs().sum();
}

double overlap_with_product_state(const BoundState& state, double alpha, double omega, const DensityOptions& opts) {
  require(state.charge.size() > 0 && state.energy > 0.0, "overlap_with_product_state: invalid state");
  const Channels c = channel_block(state, alpha, omega, 1, opts);
  const double kappa = std::sqrt(2.0 * state.energy);
  double s = 0.0;
  for (std::size_t i = 0; i < c.k.size(); ++i)
    s += c.a(i, 0) * std::sqrt(c.w[i] / (2.0 * kPi)) * xi_hat(kappa, c.k[i]);
  return std::abs(s);
}

FixedCenter fixed_center_reference(double alpha) {
  require(alpha < 0.0 && std::isfinite(alpha), "fixed_center_reference: alpha must be negative");
  return FixedCenter{-0.5 * alpha * alpha, -alpha};
}

double FixedCenter::value(double x) const { return std::sqrt(kappa) * std::exp(-kappa * std::abs(x)); }

double fixed_center_form(double alpha, const std::function<double(double)>& f, const std::function<double(double)>& df,
                         double half_width, int panels) {
  require(half_width > 0.0 && panels >= 2 && panels % 2 == 0, "fixed_center_form: panels must be even");
  const double h = 2.0 * half_width / panels;
  double kin = 0.0;
  for (int p = 0; p < panels; ++p) {
    const QuadRule r = gauss_legendre(kPanelOrder, -half_width + p * h, -half_width + (p + 1) * h);
    for (int i = 0; i < kPanelOrder; ++i) kin += r.weights[i] * df(r.nodes[i]) * df(r.nodes[i]);
  }
  const double f0 = f(0.0);
  return 0.5 * kin + alpha * f0 * f0;
}

}  // namespace cspec
