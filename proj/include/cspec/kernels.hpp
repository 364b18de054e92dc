#pragma once

#include <span>
#include <string>
#include <vector>

#include "cspec/quadrature.hpp"

namespace cspec {

struct ModelSpec {
  int d = 1;
  double omega = 1.0;
  double alpha = 0.0;
  double lambda = 1.0;

  void validate() const;
  ModelSpec with_lambda(double l) const {
    ModelSpec s = *this;
    s.lambda = l;
    return s;
  }
};

using Point = std::span<const double>;

constexpr int kHermiteMaxLevel = 200;

// Orthonormal oscillator eigenfunction Psi_n^{(omega)}(x).
double hermite_psi(int n, double omega, double x);

// Psi_0 .. Psi_nmax at x, no level cap; used internally for long series.
void hermite_psi_all(int nmax, double omega, double x, double* out);

// Oscillator heat kernel e^{-t H_osc}(y; y'), H_osc = -Delta/2 + omega^2 y^2/2 - omega d/2.
double mehler(const ModelSpec& spec, double t, Point y, Point yp);

// Free heat kernel e^{t Delta/2}(x; x') in d dimensions.
double heat(int d, double t, Point x, Point xp);

// Resolvent kernel G^lambda_omega(x, y; x', y') by nu-quadrature.
double green(const ModelSpec& spec, Point x, Point y, Point xp, Point yp, double rel_tol = 1e-11);

struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  int terms = 0;
};

// 1D oscillator-level series of G with certified tail.
SeriesValue green_series_1d(double omega, double lambda, int n_max, double x, double y, double xp, double yp,
                            double rel_tol = 1e-12);

// K^lambda_omega(x; x') = G(x, x; x', x').
double k_kernel(const ModelSpec& spec, Point x, Point xp, double rel_tol = 1e-11);

// 1D kernel in the regrouped form int dnu m^lambda(nu) k_nu(x, x') (omega = 1 variables).
double k_kernel_regrouped_1d(double lambda, double x, double xp, double rel_tol = 1e-11);

// C in the 2D renormalized coefficient; evaluated once by quadrature.
double constant_C();
double constant_C_with_panels(int panels);

// a^lambda_omega(r), d in {2,3}.
double a_lambda(const ModelSpec& spec, double r);

// Fourier-side 2D coefficient and kernel.
double a_tilde(const ModelSpec& spec, double k);
double g_tilde(const ModelSpec& spec, double k, double kp, double angle);

// Parameters of one nu-slice Gaussian exp(-P(x^2+x'^2) + 2B x.x') in t = ln(1/nu)
// (omega = 1 units). Delta = P^2 - B^2, all formed without cancellation.
struct SliceParams {
  double t, A, B, P, Delta, beta, one_minus_z, z, tau;
};
SliceParams slice_params(double t);

// Gaussian prefactor of the position-space slice in t-measure, without e^{-p t}:
// 1 / (2^{d/2} pi^d ((1 - e^{-2t}) t)^{d/2}).
double slice_prefactor(int d, double t);

// Subtraction density (t-measure) and constant of the renormalized form, omega = 1.
double renorm_density(int d, const NuNode& nd);
double renorm_constant(int d);

}  // namespace cspec
