#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"

#include "cspec/error.hpp"
#include "cspec/operators.hpp"
#include "cspec/spectra.hpp"

using namespace cspec;

namespace {

ModelSpec spec(int d, double omega, double lambda) { return ModelSpec{d, omega, 0.0, lambda}; }

double asym(const Eigen::MatrixXd& m) { return (m - m.transpose()).cwiseAbs().maxCoeff() / m.cwiseAbs().maxCoeff(); }

Eigen::VectorXd descending(const Eigen::VectorXd& v) { return v.reverse(); }

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("sym_eigen small cases and reconstruction") {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    const EigenSystem e = sym_eigen(a);
    CHECK(e.values(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.values(1) == doctest::Approx(3.0).epsilon(1e-14));
    const EigenSystem id = sym_eigen(Eigen::MatrixXd::Identity(7, 7));
    for (int i = 0; i < 7; ++i) CHECK(id.values(i) == doctest::Approx(1.0).epsilon(1e-15));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd r(50, 50);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j <= i; ++j) r(i, j) = r(j, i) = n01(rng);
    const EigenSystem es = sym_eigen(r);
    const Eigen::MatrixXd rec = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
    CHECK((r - rec).norm() <= 1e-9 * r.norm());
    CHECK((es.vectors.transpose() * es.vectors - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(r);
    CHECK((es.values - ref.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12 * r.norm());
    for (int i = 0; i < 50; ++i)
      CHECK((r * es.vectors.col(i) - es.values(i) * es.vectors.col(i)).norm() <= 1e-10 * r.norm());
    Eigen::MatrixXd bad = r;
    bad(0, 1) += 1.0;
    CHECK_THROWS_AS(sym_eigen(bad), InvalidArgument);
  }

  TEST_CASE("DVR transforms are orthogonal at N = 24") {
    for (int d : {1, 2, 3})
      for (int ell : {0, 1, 5}) {
        if (d == 1 && ell > 1) continue;
        const Eigen::MatrixXd t = sector_dvr_transform(d, ell, 24);
        CHECK((t.transpose() * t - Eigen::MatrixXd::Identity(24, 24)).cwiseAbs().maxCoeff() <= 1e-12);
      }
  }

  TEST_CASE("discretize_k_1d: symmetric, positive, Nystrom and DVR agree") {
    const ModelSpec s = spec(1, 1.0, 1.0);
    const DiscreteOperator ny = discretize_k_1d(s, Grid1D::legendre(10.0, 300));
    const DiscreteOperator dvr = discretize_k_1d(s, Grid1D::hermite(120, 1.0));
    CHECK(asym(ny.matrix) <= 1e-12);
    CHECK(asym(dvr.matrix) <= 1e-12);
    const Eigen::VectorXd a = descending(sym_eigen(ny).values);
    const Eigen::VectorXd b = descending(sym_eigen(dvr).values);
    for (int i = 0; i < b.size(); ++i) CHECK(b(i) > 0.0);
    // Nystrom on the log-singular kernel converges O(h^2): doubling N cuts the gap about 4x.
    const Eigen::VectorXd c = descending(sym_eigen(discretize_k_1d(s, Grid1D::legendre(10.0, 600))).values);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(a(i) - b(i)) <= 1e-4 * b(0));
      CHECK(std::abs(c(i) - b(i)) * 3.0 <= std::abs(a(i) - b(i)));
    }
  }

  TEST_CASE("K and Gamma eigenvalues are monotone in lambda") {
    Eigen::VectorXd prev;
    for (double l : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const Eigen::VectorXd mu = descending(sym_eigen(discretize_k_1d(spec(1, 1.0, l), Grid1D::hermite(80, 1.0))).values);
      if (prev.size()) {
        for (int i = 0; i < 10; ++i) CHECK(mu(i) <= prev(i) + 1e-12);
      }
      prev = mu;
    }
    for (int d : {2, 3}) {
      Eigen::VectorXd g_prev;
      for (double l : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const Eigen::VectorXd g =
            sym_eigen(assemble_gamma_sector(spec(d, 1.0, l), RadialSector::make(d, 0, 24, 1.0))).values;
        if (g_prev.size()) {
          for (int i = 0; i < 8; ++i) CHECK(g(i) >= g_prev(i) - 1e-12);
        }
        g_prev = g;
      }
    }
  }

  TEST_CASE("basis refinement moves the leading eigenvalues by <= 1e-5") {
    const ModelSpec s = spec(1, 1.0, 1.0);
    const Eigen::VectorXd a = descending(sym_eigen(k_sector_matrix(s, 0, 40, 1.0)).values);
    const Eigen::VectorXd b = descending(sym_eigen(k_sector_matrix(s, 0, 80, 1.0)).values);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(a(i) - b(i)) <= 1e-5 * std::abs(b(i)));
    for (int d : {2, 3}) {
      const ModelSpec sd = spec(d, 1.0, 1.0);
      const Eigen::VectorXd g = sym_eigen(gamma_sector_matrix(sd, 0, 24, 1.0)).values;
      const Eigen::VectorXd h = sym_eigen(gamma_sector_matrix(sd, 0, 48, 1.0)).values;
      for (int i = 0; i < 5; ++i) CHECK(std::abs(g(i) - h(i)) <= 1e-5 * std::abs(h(i)));
    }
  }

  TEST_CASE("Gamma sector 0: position, regularized and Fourier assemblies agree") {
    const ModelSpec s = spec(2, 1.0, 1.0);
    const RadialSector sec = RadialSector::make(2, 0, 24, 1.0);
    const DiscreteOperator reg = assemble_gamma_sector(s, sec, AssemblyPath::Regularized);
    const DiscreteOperator pos = assemble_gamma_sector(s, sec, AssemblyPath::Position);
    const DiscreteOperator four = assemble_gamma_fourier(s, sec);
    CHECK(asym(reg.matrix) <= 1e-12);
    CHECK(asym(pos.matrix) <= 1e-12);
    CHECK(asym(four.matrix) <= 1e-12);
    const double e_reg = sym_eigen(reg).values(0);
    const double e_pos = sym_eigen(pos).values(0);
    const double e_four = sym_eigen(four).values(0);
    CHECK(std::abs(e_pos - e_four) <= 1e-3 * std::abs(e_pos));
    CHECK(std::abs(e_pos - e_reg) <= 1e-10 * std::abs(e_pos));
    CHECK(e_pos == doctest::Approx(0.0717523315).epsilon(1e-9));
    CHECK_THROWS_AS(assemble_gamma_fourier(spec(3, 1.0, 1.0), RadialSector::make(3, 0, 24, 1.0)), InvalidArgument);
  }

  TEST_CASE("difference part of Gamma is positive semidefinite") {
    for (int d : {2, 3}) {
      const ModelSpec s = spec(d, 1.0, 1.0);
      const int n = 24;
      const DiscreteOperator pos = assemble_gamma_sector(s, RadialSector::make(d, 0, n, 1.0), AssemblyPath::Position);
      const Eigen::MatrixXd t = sector_dvr_transform(d, 0, n);
      const Eigen::MatrixXd basis = t.transpose() * pos.matrix * t;
      const Eigen::MatrixXd a = multiplication_matrix(d, 0, n, [&](double r) { return a_lambda(s, r); });
      const Eigen::MatrixXd diff = basis - a;
      const Eigen::VectorXd ev = sym_eigen(Eigen::MatrixXd(0.5 * (diff + diff.transpose()))).values;
      CHECK(ev(0) >= -1e-10 * ev.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("angular moments") {
    for (int d : {2, 3}) {
      const ModelSpec s = spec(d, 1.0, 1.0);
      for (auto [r, rp] : {std::pair{0.4, 1.1}, std::pair{1.5, 0.7}}) {
        const double a0 = angular_moment(s, 0, r, rp);
        for (int m = 1; m <= 3; ++m) CHECK(a0 >= std::abs(angular_moment(s, m, r, rp)));
        CHECK(angular_moment(s, 2, r, rp) == doctest::Approx(angular_moment(s, 2, rp, r)).epsilon(1e-9));
      }
    }
    const ModelSpec s2 = spec(2, 1.0, 1.0);
    std::vector<double> v;
    for (double h : {1e-2, 1e-3, 1e-4}) v.push_back(angular_moment(s2, 1, 0.8, 0.8 + h, true));
    CHECK(std::abs(v[2] - v[1]) < std::abs(v[1] - v[0]));
    CHECK(std::abs(v[2] - v[1]) <= 1e-2 * std::abs(v[2]));
  }

  TEST_CASE("assembly cost of a doubled basis stays within 5x") {
    const ModelSpec s = spec(2, 1.0, 1.0);
    auto time_it = [&](int n) {
      double best = 1e300;
      for (int rep = 0; rep < 3; ++rep) {
        clear_slice_cache();
        const auto t0 = std::chrono::steady_clock::now();
        (void)gamma_sector_matrix(s, 0, n, 1.0);
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
      return best;
    };
    CHECK(time_it(48) <= 5.0 * time_it(24));
  }
}
