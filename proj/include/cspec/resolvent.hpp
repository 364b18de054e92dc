#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "cspec/kernels.hpp"
#include "cspec/operators.hpp"
#include "cspec/spectra.hpp"

namespace cspec {

// f(x, y) = exp(-ax |x|^2 - ay |y|^2): jointly rotation invariant, so its charges live in sector 0.
struct GaussianSource {
  double ax = 0.5;
  double ay = 0.5;
};

struct ChargeTerm {
  double lambda = 1.0;
  int sector = 0;
  Eigen::VectorXd coeffs;  // G^lambda q, q in the sector basis
};

// Element of span{ f, G^a f, G^c q }: closed under the free and the perturbed resolvent.
struct KreinVector {
  int d = 1;
  double omega = 1.0;
  double scale = 1.0;
  int size = 60;
  GaussianSource source;
  double bare = 0.0;                                  // coefficient of f
  std::vector<std::pair<double, double>> free_terms;  // (a, c): c G^a f
  std::vector<ChargeTerm> charges;

  double value(Point x, Point y) const;
};

KreinVector make_source(int d, double omega, const GaussianSource& src, const SolverBudgets& budgets = {});
KreinVector from_state(const BoundState& state, int d, double omega, const SolverBudgets& budgets = {});

// a u + b v (same model and source).
KreinVector combine(double a, const KreinVector& u, double b, const KreinVector& v);

double inner(const KreinVector& u, const KreinVector& v);
double norm(const KreinVector& u);

// (H_alpha + lambda)^{-1} v. Throws NumericalError when lambda is below the solvability threshold.
KreinVector apply_resolvent(const ModelSpec& spec, const KreinVector& v);

// Closed-form pieces, exposed for tests. phi is the physical t-weight evaluated at t = tau / omega
// (the weighted_sector_matrix convention); `rate` is its slowest exponential decay.
double source_form(const KreinVector& v, const WeightFn& phi, double rate);  // <f, int phi G_t f>
Eigen::VectorXd source_projection(const KreinVector& v, const WeightFn& phi, double rate);  // <phi_k, P int phi G_t f>

}  // namespace cspec
