#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cspec/error.hpp"
#include "cspec/operators.hpp"

namespace cspec {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(AssemblyPath p) {
  switch (p) {
    case AssemblyPath::Galerkin: return "galerkin";
    case AssemblyPath::Nystrom: return "nystrom";
    case AssemblyPath::Regularized: return "regularized";
    case AssemblyPath::Position: return "position";
    case AssemblyPath::Fourier: return "fourier";
  }
  return "?";
}

Grid1D Grid1D::hermite(int N, double scale) {
  require(N >= 16, "Grid1D: N must be >= 16");
  require(scale > 0.0, "Grid1D: scale must be positive");
  Grid1D g;
  g.kind = Kind::Hermite;
  g.N = N;
  g.scale = scale;
  const QuadRule gh = gauss_hermite(N);
  const double sb = std::sqrt(scale);
  for (int i = 0; i < N; ++i) {
    g.nodes.push_back(gh.nodes[i] / sb);
    g.weights.push_back(gh.weights[i] * std::exp(gh.nodes[i] * gh.nodes[i]) / sb);
  }
  g.L = g.nodes.back();
  return g;
}

Grid1D Grid1D::legendre(double L, int N, int panel_order) {
  require(N >= 16, "Grid1D: N must be >= 16");
  require(L > 0.0, "Grid1D: L must be positive");
  require(panel_order >= 2 && N % (2 * panel_order) == 0,
          "Grid1D: N must be a multiple of twice the panel order (panel edge at 0)");
  Grid1D g;
  g.kind = Kind::Legendre;
  g.L = L;
  g.N = N;
  g.panel_order = panel_order;
  const int panels = N / panel_order;
  const double h = 2.0 * L / panels;
  const QuadRule q = gauss_legendre(panel_order, 0.0, 1.0);
  for (int k = 0; k < panels; ++k) {
    for (int i = 0; i < panel_order; ++i) {
      g.nodes.push_back(-L + h * (k + q.nodes[i]));
      g.weights.push_back(h * q.weights[i]);
    }
  }
  return g;
}

std::string Grid1D::describe() const {
  std::ostringstream os;
  if (kind == Kind::Hermite)
    os << "hermite-dvr N=" << N << " scale=" << scale;
  else
    os << "legendre L=" << L << " N=" << N << " order=" << panel_order;
  return os.str();
}

Grid1D default_grid_1d(const ModelSpec& spec) { return Grid1D::hermite(120, spec.omega); }

RadialSector RadialSector::make(int d, int m, int N, double scale, int angular_order) {
  require(d == 2 || d == 3, "RadialSector: d must be 2 or 3");
  require(m >= 0, "RadialSector: sector must be nonnegative");
  require(N >= 2, "RadialSector: N must be >= 2");
  require(scale > 0.0, "RadialSector: scale must be positive");
  require(angular_order >= 32, "RadialSector: angular order must be >= 32");
  RadialSector s;
  s.d = d;
  s.m = m;
  s.N = N;
  s.scale = scale;
  s.angular_order = angular_order;
  const double a = m + 0.5 * d - 1.0;
  const QuadRule g = gauss_laguerre(N, a);
  for (std::size_t i = 0; i < g.size(); ++i) {
    // int f r^{d-1} dr = (1/2) b^{-d/2} int s^{d/2-1} f ds
    const double sq = g.nodes[i];
    s.nodes.push_back(std::sqrt(sq / scale));
    s.weights.push_back(0.5 * std::pow(scale, -0.5 * d) * g.weights[i] * std::exp(sq) * std::pow(sq, 0.5 * d - 1.0 - a));
  }
  return s;
}

std::string RadialSector::describe() const {
  std::ostringstream os;
  os << "radial-dvr d=" << d << " m=" << m << " N=" << N << " scale=" << scale;
  return os.str();
}

namespace {

// Rows: grid nodes; columns: even sector functions then odd ones, times sqrt(W).
Eigen::MatrixXd hermite_dvr_transform(const Grid1D& g, int n_even, int n_odd) {
  const int N = g.N;
  Eigen::MatrixXd U(N, n_even + n_odd);
  std::vector<double> be(n_even), bo(std::max(n_odd, 1));
  const double sb = std::sqrt(g.scale);
  for (int i = 0; i < N; ++i) {
    const double xi = sb * g.nodes[i];
    radial_functions(1, 0, n_even, std::abs(xi), be.data());
    radial_functions(1, 1, n_odd, std::abs(xi), bo.data());
    // sqrt(W) chi(x) with W = w e^{xi^2} / sqrt(b), chi = b^{1/4} phi Y
    const double sw = std::sqrt(g.weights[i]) * std::pow(g.scale, 0.25);
    for (int k = 0; k < n_even; ++k) U(i, k) = sw * be[k] * angular_factor(1, 0, xi);
    for (int k = 0; k < n_odd; ++k) U(i, n_even + k) = sw * bo[k] * angular_factor(1, 1, xi);
  }
  return U;
}

Eigen::MatrixXd nystrom_k_1d(const ModelSpec& spec, const Grid1D& g) {
  const int N = g.N;
  const double w = spec.omega;
  const double p = spec.lambda / w;
  double hmin = INFINITY;
  for (int i = 0; i + 1 < N; ++i) hmin = std::min(hmin, g.nodes[i + 1] - g.nodes[i]);
  NuProfile prof;
  prof.p = p;
  prof.endpoint_class = EndpointClass::D1;
  prof.relative_tolerance = 1e-12;
  prof.feature_scale = std::min(1.0, std::sqrt(w) * hmin);
  const NuRule rule = nu_rule_fixed(prof, 1);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd R = Eigen::VectorXd::Zero(N);
  for (const NuNode& nd : rule.nodes) {
    const SliceParams sp = slice_params(nd.t);
    const double c = nd.weight_t * std::exp(-p * nd.t) * slice_prefactor(1, nd.t);
    if (c == 0.0) continue;
    for (int i = 0; i < N; ++i) {
      const double xi = g.nodes[i];
      R(i) += c * std::sqrt(kPi / (w * sp.P)) * std::exp(-w * sp.Delta / sp.P * xi * xi);
      for (int j = i + 1; j < N; ++j) {
        const double xj = g.nodes[j];
        K(i, j) += c * std::exp(-w * (sp.A * (xi * xi + xj * xj) + sp.B * (xi - xj) * (xi - xj)));
      }
    }
  }
  Eigen::MatrixXd M(N, N);
  for (int i = 0; i < N; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      const double kij = i < j ? K(i, j) : K(j, i);
      rowsum += g.weights[j] * kij;
      M(i, j) = std::sqrt(g.weights[i] * g.weights[j]) * kij;
    }
    M(i, i) = R(i) - rowsum;
  }
  return M;
}

}  // namespace

DiscreteOperator discretize_k_1d(const ModelSpec& spec, const Grid1D& grid) {
  spec.validate();
  require(spec.d == 1, "discretize_k_1d: d must be 1");
  DiscreteOperator op;
  op.spec = spec;
  op.grid = grid.describe();
  if (grid.kind == Grid1D::Kind::Legendre) {
    op.path = AssemblyPath::Nystrom;
    op.matrix = nystrom_k_1d(spec, grid);
    return op;
  }
  const int ne = (grid.N + 1) / 2, no = grid.N / 2;
  const Eigen::MatrixXd Ke = k_sector_matrix(spec, 0, ne, grid.scale);
  const Eigen::MatrixXd Ko = k_sector_matrix(spec, 1, no, grid.scale);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ne + no, ne + no);
  B.topLeftCorner(ne, ne) = Ke;
  B.bottomRightCorner(no, no) = Ko;
  const Eigen::MatrixXd U = hermite_dvr_transform(grid, ne, no);
  op.path = AssemblyPath::Galerkin;
  op.matrix = U * B * U.transpose();
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose());
  return op;
}

double angular_moment(const ModelSpec& spec, int m, double r, double rp, bool difference) {
  spec.validate();
  require(spec.d == 2 || spec.d == 3, "angular_moment: d must be 2 or 3");
  require(m >= 0 && r > 0.0 && rp > 0.0, "angular_moment: need m >= 0 and positive radii");
  if (r == rp && !difference) throw InvalidArgument("angular_moment: direct evaluation on the diagonal");
  const double sep = std::abs(r - rp) / std::max(r, rp);
  const double gmin = std::max(0.05 * sep, 1e-9);
  // Graded panels on (0, pi], refined toward gamma = 0 where the kernel peaks.
  std::vector<double> edges{0.0};
  for (double g = gmin; g < kPi; g *= 2.0) edges.push_back(g);
  edges.push_back(kPi);
  const QuadRule q = gauss_legendre(16, 0.0, 1.0);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], h = edges[k + 1] - edges[k];
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double g = a + h * q.nodes[i];
      double weightfn;
      if (spec.d == 2) {
        weightfn = difference ? 1.0 - std::cos(m * g) : std::cos(m * g);
        weightfn *= 2.0;  // cos is even: 2 int_0^pi
      } else {
        const double c = std::cos(g);
        weightfn = 2.0 * kPi * std::sin(g) * (difference ? 1.0 - std::legendre(m, c) : std::legendre(m, c));
      }
      if (weightfn == 0.0) continue;
      double x[3] = {r, 0.0, 0.0};
      double xp[3] = {rp * std::cos(g), rp * std::sin(g), 0.0};
      const double kv = k_kernel(spec, Point(x, spec.d), Point(xp, spec.d), 1e-9);
      sum += h * q.weights[i] * weightfn * kv;
    }
  }
  return sum;
}

namespace {

Eigen::MatrixXd to_dvr(const Eigen::MatrixXd& basis_matrix, int d, int m) {
  const Eigen::MatrixXd U = sector_dvr_transform(d, m, static_cast<int>(basis_matrix.rows()));
  Eigen::MatrixXd out = U * basis_matrix * U.transpose();
  return 0.5 * (out + out.transpose());
}

// a-multiplication + int dt w e^{-pt} pref (rho_t - M_t) in the unit sector basis, omega = b = 1 after scaling.
Eigen::MatrixXd difference_form_basis(const ModelSpec& spec, int m, int N, bool fourier) {
  const int d = spec.d;
  const double p = spec.lambda / spec.omega;
  const NuRule rule = operator_rule(d, p, true);
  const double a = m + 0.5 * d - 1.0;
  const int Q = N + 40;
  const QuadRule gl = gauss_laguerre(Q, a);
  std::vector<double> fvals(Q, 0.0);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(N, N);
  SectorSpec s{d, m, N, 1.0, fourier};
  for (const NuNode& nd : rule.nodes) {
    const double e = std::exp(-p * nd.t);
    if (e == 0.0) continue;
    const SliceParams sp = slice_params(nd.t);
    double pref, cP, cexp;
    if (fourier) {
      const double omn = nd.one_minus_nu;
      const double D = omn * (2.0 - omn) * nd.t + 2.0 * omn * omn;
      pref = 1.0 / (2.0 * kPi * kPi * D);
      const double Pt = sp.P / (4.0 * sp.Delta);
      cP = kPi / Pt;
      cexp = 1.0 / (4.0 * sp.P);
    } else {
      pref = slice_prefactor(d, nd.t);
      cP = kPi / sp.P;
      cexp = sp.Delta / sp.P;
    }
    const double c = nd.weight_t * e * pref;
    if (c == 0.0 || !std::isfinite(c)) continue;
    const double amp = std::pow(cP, 0.5 * d);
    for (int q = 0; q < Q; ++q) fvals[q] += c * amp * std::exp(-cexp * gl.nodes[q]);
    acc.noalias() -= c * slice_matrix(s, 1.0, nd);
  }
  // Renormalized diagonal coefficient at the radial nodes.
  const ModelSpec unit{d, 1.0, spec.alpha, p};
  Eigen::MatrixXd mult = Eigen::MatrixXd::Zero(N, N);
  std::vector<double> buf(N);
  Eigen::VectorXd l(N);
  for (int q = 0; q < Q; ++q) {
    const double sq = gl.nodes[q];
    const double r = std::sqrt(sq);
    const double av = fourier ? a_tilde(unit, r) : a_lambda(unit, r);
    radial_functions(d, m, N, r, buf.data());
    const double pre = std::sqrt(2.0) * std::pow(r, m) * std::exp(-0.5 * sq);
    for (int k = 0; k < N; ++k) l(k) = buf[k] / pre;
    mult.noalias() += (gl.weights[q] * (av + fvals[q])) * l * l.transpose();
  }
  return std::pow(spec.omega, 0.5 * d - 1.0) * (mult + acc);
}

}  // namespace

DiscreteOperator assemble_gamma_sector(const ModelSpec& spec, const RadialSector& sector, AssemblyPath path) {
  spec.validate();
  require(spec.d == 2 || spec.d == 3, "assemble_gamma_sector: d must be 2 or 3");
  require(sector.d == spec.d, "assemble_gamma_sector: sector dimension mismatch");
  DiscreteOperator op;
  op.spec = spec;
  op.grid = sector.describe();
  op.sector = sector.m;
  op.path = path;
  Eigen::MatrixXd B;
  switch (path) {
    case AssemblyPath::Regularized:
      B = gamma_sector_matrix(spec, sector.m, sector.N, sector.scale);
      break;
    case AssemblyPath::Position:
      require(sector.scale == spec.omega, "position assembly needs basis scale = omega");
      B = difference_form_basis(spec, sector.m, sector.N, false);
      break;
    case AssemblyPath::Fourier:
      return assemble_gamma_fourier(spec, sector);
    default:
      throw InvalidArgument("assemble_gamma_sector: unsupported path " + to_string(path));
  }
  op.matrix = to_dvr(B, spec.d, sector.m);
  return op;
}

DiscreteOperator assemble_gamma_fourier(const ModelSpec& spec, const RadialSector& sector) {
  spec.validate();
  require(spec.d == 2, "assemble_gamma_fourier: only d = 2");
  require(sector.d == 2, "assemble_gamma_fourier: sector dimension mismatch");
  require(sector.scale == spec.omega, "assemble_gamma_fourier: basis scale must equal omega");
  Eigen::MatrixXd B = difference_form_basis(spec, sector.m, sector.N, true);
  // The Fourier transform acts as (-1)^k on the sector basis (up to a global phase).
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j)
      if ((i + j) % 2 == 1) B(i, j) = -B(i, j);
  DiscreteOperator op;
  op.spec = spec;
  op.grid = sector.describe() + " (momentum)";
  op.sector = sector.m;
  op.path = AssemblyPath::Fourier;
  op.matrix = to_dvr(B, 2, sector.m);
  return op;
}

EigenSystem sym_eigen(const Eigen::MatrixXd& a_in) {
  const int n = static_cast<int>(a_in.rows());
  require(a_in.cols() == n, "sym_eigen: matrix must be square");
  require(a_in.allFinite(), "sym_eigen: non-finite entries");
  const double asym = (a_in - a_in.transpose()).cwiseAbs().maxCoeff();
  const double anorm = a_in.norm();
  require(asym <= 1e-10 * std::max(anorm, 1e-300), "sym_eigen: matrix not symmetric");
  Eigen::MatrixXd A = 0.5 * (a_in + a_in.transpose());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  EigenSystem es;
  const double eps = std::numeric_limits<double>::epsilon();
  bool converged = n <= 1;
  for (int sweep = 1; sweep <= 30 && !converged; ++sweep) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i) off += A(i, j) * A(i, j);
    es.sweeps = sweep;
    if (std::sqrt(off) <= eps * 0.1 * anorm || off == 0.0) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double app = A(p, p), aqq = A(q, q);
        // Skip rotations that cannot change the diagonal in floating point (after warm-up).
        if (sweep > 4 && std::abs(apq) * 1e18 < std::abs(app) && std::abs(apq) * 1e18 < std::abs(aqq)) {
          A(p, q) = A(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = A(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i) off += A(i, j) * A(i, j);
    if (std::sqrt(off) > 1e-12 * anorm) throw NumericalError("sym_eigen: Jacobi did not converge in 30 sweeps");
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return A(i, i) < A(j, j); });
  es.values.resize(n);
  es.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    es.values(k) = A(idx[k], idx[k]);
    es.vectors.col(k) = V.col(idx[k]);
  }
  return es;
}

EigenSystem sym_eigen(const DiscreteOperator& op) { return sym_eigen(op.matrix); }

}  // namespace cspec
