#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cspec/kernels.hpp"
#include "cspec/operators.hpp"

namespace cspec {

struct SolverBudgets {
  int basis_1d = 60;           // functions per parity
  int basis_radial = 24;       // functions per sector (d = 2, 3)
  int max_sector = 12;         // sectors ell = 0..max_sector
  int branches_per_sector = 4; // in-sector branches searched (d = 2, 3)
  int branches_1d = 16;        // merged branches searched (d = 1)
  double e_min_factor = 1e-14; // E_min = e_min_factor * omega
  double e_max_factor = 1e40;  // window growth stops at e_max_factor * omega
  double root_tol = 1e-8;      // |dE| / E
  int max_iterations = 200;
  double basis_scale = 0.0;    // 0: use omega
  int jobs = 1;

  double scale_for(double omega) const { return basis_scale > 0.0 ? basis_scale : omega; }
};

// Merged descending eigenvalues of the physical K^lambda_omega (both parities).
std::vector<double> mu_spectrum(const ModelSpec& spec, int count, const SolverBudgets& budgets = {});
// Same on an explicit grid (DVR or Nystrom).
std::vector<double> mu_spectrum(const ModelSpec& spec, const Grid1D& grid, int count);

struct GammaBranch {
  int sector = 0;
  int index = 0;  // in-sector index
  double value = 0.0;
  int degeneracy = 1;
};

// Lowest in-sector eigenvalues of Gamma^lambda_omega, merged ascending.
std::vector<GammaBranch> gamma_spectrum(const ModelSpec& spec, const SolverBudgets& budgets = {});

struct RootResult {
  std::optional<double> energy;  // E > 0; the eigenvalue of H is -E
  int iterations = 0;
  bool converged = false;
  std::string diagnostic;
  std::vector<std::pair<double, double>> curve;  // sampled (E, secular value)
};

// 1 + alpha mu_n(E) = 0 on the merged 1D branch n.
RootResult solve_secular_1d(double alpha, double omega, int branch, const SolverBudgets& budgets = {});
// gamma_{ell,index}(E) + alpha = 0.
RootResult solve_secular_hd(int d, double alpha, double omega, int ell, int index,
                            const SolverBudgets& budgets = {});

struct BoundState {
  double energy = 0.0;  // E > 0
  int branch = 0;       // merged index (1D) or position in the sorted report
  int sector = 0;       // parity (1D) or ell
  int index = 0;        // in-sector index
  int degeneracy = 1;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double norm = 0.0;  // ||u|| after normalization
  double scale = 1.0;
  Eigen::VectorXd charge;  // sector-basis coefficients of q
};

struct SpectrumReport {
  int d = 1;
  double alpha = 0.0;
  double omega = 1.0;
  std::vector<BoundState> states;  // sorted by decreasing E
  int count = 0;                   // N_omega(alpha), degeneracies included
  bool partial = false;
  std::vector<std::string> diagnostics;
  SolverBudgets budgets;
};

SpectrumReport bound_states(int d, double alpha, double omega, const SolverBudgets& budgets = {});

struct StateCount {
  int count = 0;                  // degeneracies included
  std::vector<int> per_sector;    // branches with a root, per parity (1D) or ell
  bool partial = false;           // basis or sector budget saturated
};

// N_omega(alpha) from the operator spectrum at E_min, without solving the roots.
StateCount count_states(int d, double alpha, double omega, const SolverBudgets& budgets = {});

// Charge eigenvector at the root, normalized so ||G q|| = 1, sign fixed, residual recorded.
BoundState build_eigenfunction(int d, double alpha, double omega, int sector, int index, double energy,
                               const SolverBudgets& budgets = {});

inline constexpr double kResidualFlag = 1e-4;

// Charge q(s) at a point of the coincidence set from sector coefficients.
double charge_value(int d, int sector, double scale, const Eigen::VectorXd& coeffs, Point s);

// u = G^lambda q at (x, y); on the coincidence set for d = 2, 3 the value diverges.
double potential_value(int d, double omega, double lambda, int sector, double scale, const Eigen::VectorXd& coeffs,
                       Point x, Point y, double rel_tol = 1e-9);

struct SampleGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  Eigen::MatrixXd values;  // values(i, j) = u(xs[i], ys[j]) on the first axis
};

// Product-grid samples along the first coordinate axis.
SampleGrid sample_eigenfunction(const BoundState& state, int d, double omega, const std::vector<double>& xs,
                                const std::vector<double>& ys);

// ---------------------------------------------------------------------------
// d = 1 reduced density matrix via the oscillator-channel expansion.

struct DensityMatrix {
  std::vector<double> k_nodes;  // momentum grid
  std::vector<double> k_weights;
  Eigen::MatrixXd factor;  // rho = F F^T on the weighted momentum grid, one column per channel
  int channels = 0;
  double trace = 0.0;
  double min_eigenvalue = 0.0;
  double max_asymmetry = 0.0;
  bool adequate = true;  // |trace - 1| <= 1e-4
};

struct DensityOptions {
  int max_channels = 2000;
  double capture = 1e-6;
  double k_spacing = 0.125;
};

DensityMatrix reduced_density(const BoundState& state, double alpha, double omega, const DensityOptions& opts = {});

struct FixedCenter {
  double energy = 0.0;  // -alpha^2 / 2
  double kappa = 0.0;   // |alpha|
  double value(double x) const;
};

FixedCenter fixed_center_reference(double alpha);

// Quadratic form of the fixed-center operator on a smooth trial function (f, f').
double fixed_center_form(double alpha, const std::function<double(double)>& f,
                         const std::function<double(double)>& df, double half_width = 60.0, int panels = 240);

// Trace norm of rho - |xi_alpha><xi_alpha|.
double trace_distance_to_fixed_center(const DensityMatrix& rho, double alpha);

// |<u, w>| with w = xi_k(x) Psi_0(y), k = sqrt(2E), the normalized large-omega profile.
double overlap_with_product_state(const BoundState& state, double alpha, double omega,
                                  const DensityOptions& opts = {});

// Threshold |alpha| beyond which d = 1 has a second state: 1 / mu_1(E_min).
double measure_alpha0_1d(double omega, const SolverBudgets& budgets = {});

}  // namespace cspec
