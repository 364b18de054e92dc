#include <cmath>
#include <numbers>

#include "doctest.h"

#include "cspec/error.hpp"
#include "cspec/resolvent.hpp"
#include "cspec/spectra.hpp"

using namespace cspec;

namespace {

ModelSpec spec(int d, double omega, double alpha, double lambda) { return ModelSpec{d, omega, alpha, lambda}; }

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("mu spectrum: positive, decreasing in lambda, converged value") {
    const std::vector<double> mu1 = mu_spectrum(spec(1, 1.0, 0.0, 1.0), 16);
    const std::vector<double> mu4 = mu_spectrum(spec(1, 1.0, 0.0, 4.0), 16);
    for (double m : mu1) CHECK(m > 0.0);
    for (std::size_t i = 0; i < mu1.size(); ++i) CHECK(mu4[i] < mu1[i]);
    for (std::size_t i = 1; i < mu1.size(); ++i) CHECK(mu1[i] <= mu1[i - 1]);
    // Converged top eigenvalue (basis and Nystrom extrapolation agree).
    CHECK(mu1[0] == doctest::Approx(0.52759402).epsilon(2e-8));
    CHECK_THROWS_AS(mu_spectrum(spec(1, 1.0, 0.0, 1.0), 1000), InvalidArgument);
  }

  TEST_CASE("gamma spectrum: ground branch decreases as lambda -> 0") {
    double prev = 1e300;
    for (double l : {1.0, 0.1, 0.01, 0.001}) {
      SolverBudgets b;
      b.max_sector = 0;
      const std::vector<GammaBranch> g = gamma_spectrum(spec(2, 1.0, 0.0, l), b);
      REQUIRE(!g.empty());
      CHECK(g[0].value < prev);
      prev = g[0].value;
    }
  }

  TEST_CASE("1D ground state at alpha = -1 matches the scan oracle") {
    const SpectrumReport r = bound_states(1, -1.0, 1.0);
    REQUIRE(r.states.size() == 1);
    CHECK(r.count == 1);
    CHECK(r.states[0].energy == doctest::Approx(0.312502156429).epsilon(1e-8));
    CHECK(r.states[0].residual <= 1e-6);
    CHECK(std::abs(r.states[0].norm - 1.0) <= 1e-6);
    CHECK(r.states[0].converged);
  }

  TEST_CASE("1D: no states for alpha >= 0, one for small |alpha|, small-alpha asymptotics") {
    CHECK(bound_states(1, 1.0, 1.0).states.empty());
    CHECK(bound_states(1, 0.0, 1.0).count == 0);
    CHECK(bound_states(1, -0.1, 1.0).count == 1);
    const SpectrumReport r = bound_states(1, -0.05, 1.0);
    REQUIRE(r.states.size() == 1);
    CHECK(std::abs(2.0 * r.states[0].energy / (0.05 * 0.05) - 1.0) <= 0.05);
    const RootResult none = solve_secular_1d(1.0, 1.0, 0);
    CHECK(!none.energy.has_value());
  }

  TEST_CASE("2D ground state at alpha = -2 matches the scan oracle") {
    SolverBudgets b;
    b.max_sector = 0;
    b.branches_per_sector = 1;
    const RootResult r = solve_secular_hd(2, -2.0, 1.0, 0, 0, b);
    REQUIRE(r.energy.has_value());
    CHECK(*r.energy == doctest::Approx(2.5920756713e10).epsilon(1e-8));
  }

  TEST_CASE("2D alpha = 0 has a sector-0 root; counts grow as alpha decreases") {
    SolverBudgets b;
    b.max_sector = 0;
    b.branches_per_sector = 1;
    CHECK(solve_secular_hd(2, 0.0, 1.0, 0, 0, b).energy.has_value());
    CHECK(count_states(2, -4.0, 1.0).count >= count_states(2, -2.0, 1.0).count);
    CHECK(count_states(1, -4.0, 1.0).count >= count_states(1, -2.0, 1.0).count);
  }

  TEST_CASE("residuals and normalization of reported states") {
    SolverBudgets b;
    b.max_sector = 2;
    for (auto [d, alpha] : {std::pair{1, -3.0}, std::pair{2, 0.0}, std::pair{3, -1.0}}) {
      const SpectrumReport r = bound_states(d, alpha, 1.0, b);
      REQUIRE(!r.states.empty());
      for (const BoundState& s : r.states) {
        CHECK(s.residual <= 1e-6);
        CHECK(std::abs(s.norm - 1.0) <= 1e-6);
      }
    }
  }

  TEST_CASE("fixed-center reference") {
    const FixedCenter fc = fixed_center_reference(-1.0);
    CHECK(fc.energy == doctest::Approx(-0.5));
    CHECK(fc.value(0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(fixed_center_reference(0.5), InvalidArgument);
  }

  TEST_CASE("reduced density matrix: trace, positivity, symmetry, large-omega convergence") {
    double prev = 1e300;
    for (double omega : {10.0, 100.0}) {
      const SpectrumReport r = bound_states(1, -1.0, omega);
      REQUIRE(!r.states.empty());
      const DensityMatrix rho = reduced_density(r.states[0], -1.0, omega);
      CHECK(std::abs(rho.trace - 1.0) <= 1e-6);
      CHECK(rho.min_eigenvalue >= -1e-8);
      CHECK(rho.max_asymmetry <= 1e-12);
      const double td = trace_distance_to_fixed_center(rho, -1.0);
      CHECK(td < prev);
      prev = td;
    }
  }

  TEST_CASE("large-omega shape: overlap with the product profile") {
    const SpectrumReport r = bound_states(1, -1.0, 100.0);
    REQUIRE(!r.states.empty());
    CHECK(overlap_with_product_state(r.states[0], -1.0, 100.0) >= 0.99);
  }
}

TEST_SUITE("resolvent") {
  TEST_CASE("closed-form source pieces") {
    const KreinVector f = make_source(1, 1.0, {0.5, 0.5});
    const auto phi = [](double t) { return std::exp(-t); };
    // <f, G^1 f> = sqrt(2) pi^{3/2} e^2 erfc(sqrt 2) for f = e^{-(x^2+y^2)/2}.
    const double pi = std::numbers::pi;
    CHECK(source_form(f, phi, 1.0) ==
          doctest::Approx(std::sqrt(2.0) * std::pow(pi, 1.5) * std::exp(2.0) * std::erfc(std::sqrt(2.0))).epsilon(1e-12));
    // <Psi_2k, P G^1 f> by direct quadrature of the closed-form charge profile.
    const Eigen::VectorXd p = source_projection(f, phi, 1.0);
    const double ref[4] = {0.8805704203163243, 0.1459895151538623, 0.03181953283021561, 0.00769432303983119};
    for (int k = 0; k < 4; ++k) CHECK(std::abs(p(k)) == doctest::Approx(ref[k]).epsilon(1e-9));
  }

  TEST_CASE("resolvent identity, eigenvector check, alpha -> infinity") {
    for (auto [d, alpha] : {std::pair{1, -1.0}, std::pair{2, 0.0}, std::pair{3, 0.0}}) {
      SolverBudgets b;
      b.max_sector = 0;
      const KreinVector f = make_source(d, 1.0, {0.5, 0.7}, b);
      const SpectrumReport rep = bound_states(d, alpha, 1.0, b);
      REQUIRE(!rep.states.empty());
      const double e0 = rep.states[0].energy;
      const double l1 = e0 + 1.0, l2 = e0 + 2.0;
      const ModelSpec s1 = spec(d, 1.0, alpha, l1), s2 = spec(d, 1.0, alpha, l2);
      const KreinVector r1 = apply_resolvent(s1, f), r2 = apply_resolvent(s2, f);
      const KreinVector lhs = combine(1.0, r1, -1.0, r2);
      const KreinVector diff = combine(1.0, lhs, -(l2 - l1), apply_resolvent(s1, r2));
      CHECK(norm(diff) <= 1e-5 * norm(lhs));

      const KreinVector u = from_state(rep.states[0], d, 1.0, b);
      const double lam = 2.0 * e0;
      const KreinVector ru = apply_resolvent(spec(d, 1.0, alpha, lam), u);
      CHECK(norm(combine(1.0, ru, -1.0 / (lam - e0), u)) <= 1e-4 * norm(u) / (lam - e0));

      if (d > 1) {
        const KreinVector rb = apply_resolvent(spec(d, 1.0, 1e8, 1.0), f);
        KreinVector g = f;
        g.bare = 0.0;
        g.free_terms = {{1.0, 1.0}};
        CHECK(norm(combine(1.0, rb, -1.0, g)) <= 1e-6 * norm(g));
      }
    }
  }

  TEST_CASE("resolvent below the solvability threshold is rejected") {
    const KreinVector f = make_source(1, 1.0, {0.5, 0.5});
    const double e0 = bound_states(1, -1.0, 1.0).states[0].energy;
    CHECK_THROWS_AS(apply_resolvent(spec(1, 1.0, -1.0, 0.5 * e0), f), NumericalError);
  }
}
