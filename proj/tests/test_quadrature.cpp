#include <cmath>
#include <numbers>

#include "doctest.h"

#include "cspec/error.hpp"
#include "cspec/quadrature.hpp"

using namespace cspec;

namespace {

double nu_integral(double p, EndpointClass c, const std::function<double(const NuNode&)>& f, double tol = 1e-12) {
  NuProfile pr;
  pr.p = p;
  pr.endpoint_class = c;
  pr.relative_tolerance = tol;
  return integrate(f, nu_rule(pr));
}

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("gauss_legendre small rules") {
    const QuadRule r1 = gauss_legendre(1, 0.0, 1.0);
    REQUIRE(r1.size() == 1);
    CHECK(r1.nodes[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(integrate([](double x) { return x * x; }, gauss_legendre(2, 0.0, 1.0)) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(integrate([](double) { return 1.0; }, r1) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("gauss_legendre n = 16 on exp") {
    const double v = integrate([](double x) { return std::exp(x); }, gauss_legendre(16, -1.0, 1.0));
    CHECK(std::abs(v - (std::exp(1.0) - std::exp(-1.0))) <= 1e-14);
  }

  TEST_CASE("gauss_legendre rejects bad input") {
    CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(gauss_legendre(4, 1.0, 1.0), InvalidArgument);
  }

  TEST_CASE("Gauss-Hermite and Gauss-Laguerre rules are exact and orthogonal at n = 24") {
    const QuadRule h = gauss_hermite(24);
    // int x^{2k} e^{-x^2} = Gamma(k + 1/2)
    for (int k = 0; k <= 20; ++k) {
      const double v = integrate([k](double x) { return std::pow(x, 2 * k); }, h);
      CHECK(v == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-12));
    }
    const QuadRule l = gauss_laguerre(24, 0.5);
    for (int k = 0; k <= 20; ++k) {
      const double v = integrate([k](double x) { return std::pow(x, k); }, l);
      CHECK(v == doctest::Approx(std::tgamma(k + 1.5)).epsilon(1e-12));
    }
    for (double w : h.weights) CHECK(w > 0.0);
    for (double w : l.weights) CHECK(w > 0.0);
  }

  TEST_CASE("nu_rule closed forms") {
    CHECK(nu_integral(0.7, EndpointClass::D1, [](const NuNode& n) { return std::pow(n.nu, -0.3); }) ==
          doctest::Approx(1.0 / 0.7).epsilon(1e-10));
    CHECK(nu_integral(2.0, EndpointClass::D1, [](const NuNode& n) { return n.nu / std::sqrt(n.t); }) ==
          doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-10));
    CHECK(nu_integral(3.0, EndpointClass::D1, [](const NuNode& n) { return n.nu * n.nu * n.t; }) ==
          doctest::Approx(1.0 / 9.0).epsilon(1e-10));
    CHECK(nu_integral(1.5, EndpointClass::D1, [](const NuNode& n) { return std::sqrt(n.nu); }) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  }

  TEST_CASE("nu_rule nodes keep 1 - nu accurate near nu = 1") {
    NuProfile pr;
    pr.p = 1.0;
    const NuRule r = nu_rule(pr);
    for (const NuNode& n : r.nodes) {
      CHECK(n.one_minus_nu > 0.0);
      CHECK(n.one_minus_nu == doctest::Approx(-std::expm1(-n.t)).epsilon(1e-14));
      CHECK(n.weight_t > 0.0);
    }
  }

  TEST_CASE("nu_rule converges for every endpoint class") {
    for (EndpointClass c : {EndpointClass::D1, EndpointClass::D2a, EndpointClass::D2G, EndpointClass::D3a,
                            EndpointClass::D3G}) {
      for (double p : {0.01, 1.0, 50.0}) {
        NuProfile pr;
        pr.p = p;
        pr.endpoint_class = c;
        pr.relative_tolerance = 1e-10;
        const NuRule r = nu_rule(pr);
        const auto f = [&](const NuNode& n) { return model_density_t(pr, n); };
        const double a = integrate_t(f, r);
        const double b = integrate_t(f, refine(refine(r)));
        CHECK(std::isfinite(a));
        CHECK(std::abs(a - b) <= 1e-9 * std::abs(b));
      }
    }
  }

  TEST_CASE("endpoint class names round trip") {
    for (EndpointClass c : {EndpointClass::D1, EndpointClass::D2a, EndpointClass::D2G, EndpointClass::D3a,
                            EndpointClass::D3G})
      CHECK(endpoint_class_from_string(to_string(c)) == c);
    CHECK_THROWS_AS(endpoint_class_from_string("4D"), InvalidArgument);
  }
}
