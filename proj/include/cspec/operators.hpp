#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "cspec/kernels.hpp"
#include "cspec/quadrature.hpp"

namespace cspec {

// ---------------------------------------------------------------------------
// Oscillator basis per angular sector.
//
// Sector ell of dimension d holds phi_k(r) Y_ell with
//   phi_k(r) = sqrt(2) r^ell e^{-r^2/2} l_k(r^2),  l_k normalized Laguerre L_k^{(a)}, a = ell + d/2 - 1,
// normalized against r^{d-1} dr. In d = 1 the "sectors" are the parities ell = 0, 1.
// A basis of scale b uses phi_k(sqrt(b) r) b^{d/4}.

void radial_functions(int d, int ell, int count, double r, double* out);

// Normalized angular factor of the m = 0 member of sector ell at a direction.
// d = 1: sign of x; d = 2: polar angle; d = 3: cos(theta).
double angular_factor(int d, int ell, double angle_or_cos);

int sector_degeneracy(int d, int ell);

struct SectorSpec {
  int d = 1;
  int ell = 0;
  int size = 24;
  double scale = 1.0;  // basis scale b
  bool fourier = false;
};

// Slice matrix of exp(-r (P (x^2 + x'^2) - 2 B x.x')) (r = omega / b) in the unit sector basis,
// including its Gaussian normalization; cached per node.
const Eigen::MatrixXd& slice_matrix(const SectorSpec& s, double ratio, const NuNode& node);

// Uncached evaluation from explicit Mehler parameters.
Eigen::MatrixXd slice_matrix_direct(int d, int ell, int size, double beta, double z, double one_minus_z,
                                    double tau);

// Number of cached slice matrices (diagnostics).
std::size_t slice_cache_size();
void clear_slice_cache();

using WeightFn = std::function<double(double t)>;

// int dt phi(t) pref(t) M(t) over the nu-rule (unit-omega variable t), scaled to
// the physical operator; with `subtract`, the renormalization c_d + int s_d is
// added and the kernel part subtracted (Gamma in d = 2, 3).
Eigen::MatrixXd weighted_sector_matrix(const SectorSpec& s, double omega, const WeightFn& phi, const NuRule& rule,
                                       bool subtract);

// Basis-representation operators.
Eigen::MatrixXd k_sector_matrix(const ModelSpec& spec, int parity, int size, double scale);
Eigen::MatrixXd gamma_sector_matrix(const ModelSpec& spec, int ell, int size, double scale);

// -d/d lambda of K (or Gamma): kernel with weight t e^{-lambda t}; equals G*G on charges.
Eigen::MatrixXd t0_sector_matrix(const ModelSpec& spec, int ell, int size, double scale);

// <G^a p, G^b q> Gram block: kernel with weight (e^{-a t} - e^{-b t}) / (b - a).
Eigen::MatrixXd cross_sector_matrix(const ModelSpec& spec, double lambda_a, double lambda_b, int ell, int size,
                                    double scale);

NuRule operator_rule(int d, double p, bool subtract);

// ---------------------------------------------------------------------------
// Grids and discrete operators.

struct Grid1D {
  enum class Kind { Hermite, Legendre };
  Kind kind = Kind::Hermite;
  double L = 0.0;        // half width (Legendre) or outermost node (Hermite)
  int N = 0;
  double scale = 1.0;    // Hermite basis scale
  int panel_order = 10;  // Legendre
  std::vector<double> nodes;
  std::vector<double> weights;

  static Grid1D hermite(int N, double scale);
  static Grid1D legendre(double L, int N, int panel_order = 10);
  std::string describe() const;
};

Grid1D default_grid_1d(const ModelSpec& spec);

struct RadialSector {
  int d = 2;
  int m = 0;
  int N = 24;
  double scale = 1.0;
  int angular_order = 64;
  std::vector<double> nodes;    // radial DVR nodes
  std::vector<double> weights;  // includes the r^{d-1} measure

  static RadialSector make(int d, int m, int N, double scale, int angular_order = 64);
  int degeneracy() const { return sector_degeneracy(d, m); }
  std::string describe() const;
};

enum class AssemblyPath { Galerkin, Nystrom, Regularized, Position, Fourier };
std::string to_string(AssemblyPath p);

struct DiscreteOperator {
  Eigen::MatrixXd matrix;
  ModelSpec spec;
  AssemblyPath path = AssemblyPath::Galerkin;
  std::string grid;
  int sector = -1;
};

DiscreteOperator discretize_k_1d(const ModelSpec& spec, const Grid1D& grid);

// Angular moment A_m(r, r') = int_0^{2pi} dgamma K(x, x') cos(m gamma) (d = 2) or
// 2 pi int_{-1}^{1} dc K P_m(c) (d = 3); `difference` returns A_0 - A_m.
double angular_moment(const ModelSpec& spec, int m, double r, double rp, bool difference = false);

DiscreteOperator assemble_gamma_sector(const ModelSpec& spec, const RadialSector& sector,
                                       AssemblyPath path = AssemblyPath::Regularized);
DiscreteOperator assemble_gamma_fourier(const ModelSpec& spec, const RadialSector& sector);

// Radial-quadrature matrix of multiplication by f(r) in the unit sector basis.
Eigen::MatrixXd multiplication_matrix(int d, int ell, int size, const std::function<double(double)>& f,
                                      int extra_nodes = 40);

// DVR transform of a sector basis: rows = nodes, cols = basis functions.
Eigen::MatrixXd sector_dvr_transform(int d, int ell, int size);

// ---------------------------------------------------------------------------

struct EigenSystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
  int sweeps = 0;
};

EigenSystem sym_eigen(const Eigen::MatrixXd& a);
EigenSystem sym_eigen(const DiscreteOperator& op);

}  // namespace cspec
