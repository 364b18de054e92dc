#include "cspec/resolvent.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "cspec/error.hpp"
#include "cspec/quadrature.hpp"

namespace cspec {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_area(int d) { return d == 1 ? 2.0 : (d == 2 ? 2.0 * kPi : 4.0 * kPi); }

// Per-t Gaussian data of G_t f (physical time t).
struct SourceSlice {
  double pre;     // amplitude of G_t f at the origin
  double gx, gy;  // G_t f (x, y) = pre exp(-gx |x|^2 - gy |y|^2)
  double ff;      // <f, G_t f>
};

SourceSlice source_slice(int d, double w, const GaussianSource& src, double t) {
  const double u = 0.5 / t;
  const double th = std::tanh(0.5 * w * t);
  const double v = 0.25 * w * (th + 1.0 / th);
  const double ax = src.ax, ay = src.ay;
  const double base = std::pow(2.0 * kPi * t, -0.5 * d) * std::pow(w / (kPi * (-std::expm1(-2.0 * w * t))), 0.5 * d);
  SourceSlice s;
  s.pre = base * std::pow(kPi * kPi / ((ax + u) * (ay + v)), 0.5 * d);
  s.gx = u * ax / (ax + u);
  s.gy = (ay * v + 0.25 * w * w) / (ay + v);
  const double det_x = ax * ax + 2.0 * ax * u;
  const double det_y = ay * ay + 2.0 * ay * v + 0.25 * w * w;
  s.ff = base * std::pow(kPi * kPi / det_x, 0.5 * d) * std::pow(kPi * kPi / det_y, 0.5 * d);
  return s;
}

// <phi_k Y_0, exp(-g |s|^2)> in the sector-0 basis of scale b.
void gaussian_projection(int d, double b, double g, Eigen::VectorXd& out) {
  const double a = 0.5 * d - 1.0;
  const double p = 0.5 + g / b;
  const double r = (p - 1.0) / p;
  double term = std::exp(0.5 * std::lgamma(a + 1.0) - (a + 1.0) * std::log(p));
  const double c = std::pow(b, -0.25 * d) * std::sqrt(0.5 * sphere_area(d));
  for (int k = 0; k < out.size(); ++k) {
    if (k > 0) term *= r * std::sqrt((k + a) / k);
    out(k) = c * term;
  }
}

NuProfile source_profile(const KreinVector& v, double rate) {
  NuProfile prof;
  prof.p = rate / v.omega;
  prof.endpoint_class = EndpointClass::D1;
  prof.relative_tolerance = 1e-12;
  const double amax = std::max(v.source.ax, v.source.ay);
  prof.feature_scale = std::min(1.0, std::sqrt(v.omega / amax));
  return prof;
}

template <class Acc>
Acc converged_sum(const NuProfile& prof, const std::function<Acc(const NuRule&)>& sum, const char* what) {
  Acc prev = sum(nu_rule_fixed(prof, 0));
  for (int level = 1; level <= 6; ++level) {
    Acc val = sum(nu_rule_fixed(prof, level));
    double diff, mag;
    if constexpr (std::is_same_v<Acc, double>) {
      diff = std::abs(val - prev);
      mag = std::abs(val);
    } else {
      diff = (val - prev).norm();
      mag = val.norm();
    }
    if (diff <= 1e-11 * mag + 1e-300) return val;
    prev = std::move(val);
  }
  throw NumericalError(std::string(what) + ": t-quadrature did not converge");
}

// Physical weight (e^{-a t} - e^{-b t}) / (b - a), t e^{-a t} at a = b, in the tau convention.
WeightFn pair_weight(double a, double b, double w) {
  const double plo = std::min(a, b) / w, dp = std::abs(b - a) / w;
  return [plo, dp, w](double tau) {
    if (dp * tau < 1e-300) return tau / w * std::exp(-plo * tau);
    return std::exp(-plo * tau) * (-std::expm1(-dp * tau)) / (dp * w);
  };
}

WeightFn exp_weight(double a, double w) {
  const double p = a / w;
  return [p](double tau) { return std::exp(-p * tau); };
}

void check_compatible(const KreinVector& u, const KreinVector& v) {
  require(u.d == v.d && u.omega == v.omega && u.scale == v.scale && u.size == v.size &&
              u.source.ax == v.source.ax && u.source.ay == v.source.ay,
          "KreinVector: incompatible operands");
}

ModelSpec base_spec(const KreinVector& v, double lambda) {
  ModelSpec s;
  s.d = v.d;
  s.omega = v.omega;
  s.lambda = lambda;
  return s;
}

void compact(KreinVector& v) {
  std::map<double, double> fr;
  for (const auto& [a, c] : v.free_terms) fr[a] += c;
  v.free_terms.assign(fr.begin(), fr.end());
  std::map<std::pair<double, int>, Eigen::VectorXd> ch;
  for (const auto& t : v.charges) {
    auto key = std::make_pair(t.lambda, t.sector);
    auto it = ch.find(key);
    if (it == ch.end())
      ch.emplace(key, t.coeffs);
    else
      it->second += t.coeffs;
  }
  v.charges.clear();
  for (auto& [k, c] : ch) v.charges.push_back({k.first, k.second, c});
}

}  // namespace

double source_form(const KreinVector& v, const WeightFn& phi, double rate) {
  const NuProfile prof = source_profile(v, rate);
  const double w = v.omega;
  return converged_sum<double>(
      prof,
      [&](const NuRule& rule) {
        double s = 0.0;
        for (const NuNode& nd : rule.nodes) {
          if (nd.t == 0.0) continue;
          const double f = phi(nd.t);
          if (f == 0.0) continue;
          s += nd.weight_t * f * source_slice(v.d, w, v.source, nd.t / w).ff / w;
        }
        return s;
      },
      "source_form");
}

Eigen::VectorXd source_projection(const KreinVector& v, const WeightFn& phi, double rate) {
  const NuProfile prof = source_profile(v, rate);
  const double w = v.omega;
  return converged_sum<Eigen::VectorXd>(
      prof,
      [&](const NuRule& rule) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(v.size), g(v.size);
        for (const NuNode& nd : rule.nodes) {
          if (nd.t == 0.0) continue;
          const double f = phi(nd.t);
          if (f == 0.0) continue;
          const SourceSlice s = source_slice(v.d, w, v.source, nd.t / w);
          gaussian_projection(v.d, v.scale, s.gx + s.gy, g);
          acc += (nd.weight_t * f * s.pre / w) * g;
        }
        return acc;
      },
      "source_projection");
}

double KreinVector::value(Point x, Point y) const {
  require(static_cast<int>(x.size()) == d && static_cast<int>(y.size()) == d, "KreinVector: point dimension mismatch");
  double xx = 0.0, yy = 0.0;
  for (int i = 0; i < d; ++i) {
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  double out = bare * std::exp(-source.ax * xx - source.ay * yy);
  for (const auto& [a, c] : free_terms) {
    const double p = a / omega;
    NuProfile prof;
    prof.p = p;
    prof.endpoint_class = EndpointClass::D1;
    prof.relative_tolerance = 1e-12;
    prof.feature_scale = std::min(1.0, std::sqrt(omega / std::max(source.ax, source.ay)));
    const double val = converged_sum<double>(
        prof,
        [&](const NuRule& rule) {
          double s = 0.0;
          for (const NuNode& nd : rule.nodes) {
            if (nd.t == 0.0) continue;
            const SourceSlice sl = source_slice(d, omega, source, nd.t / omega);
            s += nd.weight_t * std::exp(-p * nd.t) * sl.pre * std::exp(-sl.gx * xx - sl.gy * yy) / omega;
          }
          return s;
        },
        "KreinVector::value");
    out += c * val;
  }
  for (const auto& t : charges) out += potential_value(d, omega, t.lambda, t.sector, scale, t.coeffs, x, y);
  return out;
}

KreinVector make_source(int d, double omega, const GaussianSource& src, const SolverBudgets& budgets) {
  require(d >= 1 && d <= 3, "make_source: d must be 1, 2 or 3");
  require(omega > 0.0, "make_source: omega must be positive");
  require(src.ax > 0.0 && src.ay > 0.0, "make_source: Gaussian exponents must be positive");
  KreinVector v;
  v.d = d;
  v.omega = omega;
  v.scale = budgets.scale_for(omega);
  v.size = d == 1 ? budgets.basis_1d : budgets.basis_radial;
  v.source = src;
  v.bare = 1.0;
  return v;
}

KreinVector from_state(const BoundState& state, int d, double omega, const SolverBudgets& budgets) {
  KreinVector v = make_source(d, omega, GaussianSource{}, budgets);
  require(state.charge.size() == v.size && state.scale == v.scale, "from_state: basis mismatch with budgets");
  v.bare = 0.0;
  v.charges.push_back({state.energy, state.sector, state.charge});
  return v;
}

KreinVector combine(double a, const KreinVector& u, double b, const KreinVector& v) {
  check_compatible(u, v);
  KreinVector out = u;
  out.bare = a * u.bare + b * v.bare;
  out.free_terms.clear();
  out.charges.clear();
  for (const auto& [l, c] : u.free_terms) out.free_terms.emplace_back(l, a * c);
  for (const auto& [l, c] : v.free_terms) out.free_terms.emplace_back(l, b * c);
  for (const auto& t : u.charges) out.charges.push_back({t.lambda, t.sector, a * t.coeffs});
  for (const auto& t : v.charges) out.charges.push_back({t.lambda, t.sector, b * t.coeffs});
  compact(out);
  return out;
}

double inner(const KreinVector& u, const KreinVector& v) {
  check_compatible(u, v);
  const double w = u.omega;
  const int d = u.d;
  double s = 0.0;
  // f - f, f - G f, G f - G f
  const double ff = std::pow(kPi / (2.0 * u.source.ax), 0.5 * d) * std::pow(kPi / (2.0 * u.source.ay), 0.5 * d);
  s += u.bare * v.bare * ff;
  for (const auto& [a, c] : v.free_terms)
    if (u.bare != 0.0) s += u.bare * c * source_form(u, exp_weight(a, w), a);
  for (const auto& [a, c] : u.free_terms)
    if (v.bare != 0.0) s += v.bare * c * source_form(u, exp_weight(a, w), a);
  for (const auto& [a, ca] : u.free_terms)
    for (const auto& [b, cb] : v.free_terms) s += ca * cb * source_form(u, pair_weight(a, b, w), std::min(a, b));
  // f / G f against charges (sector 0 only)
  auto cross_fq = [&](const KreinVector& x, const KreinVector& y) {
    double r = 0.0;
    for (const auto& t : y.charges) {
      if (t.sector != 0) continue;
      if (x.bare != 0.0) r += x.bare * source_projection(x, exp_weight(t.lambda, w), t.lambda).dot(t.coeffs);
      for (const auto& [a, c] : x.free_terms)
        r += c * source_projection(x, pair_weight(a, t.lambda, w), std::min(a, t.lambda)).dot(t.coeffs);
    }
    return r;
  };
  s += cross_fq(u, v) + cross_fq(v, u);
  // charge - charge
  for (const auto& p : u.charges)
    for (const auto& q : v.charges) {
      if (p.sector != q.sector) continue;
      const Eigen::MatrixXd c = cross_sector_matrix(base_spec(u, p.lambda), p.lambda, q.lambda, p.sector, u.size, u.scale);
      s += p.coeffs.dot(c * q.coeffs);
    }
  return s;
}

double norm(const KreinVector& u) { return std::sqrt(std::max(0.0, inner(u, u))); }

KreinVector apply_resolvent(const ModelSpec& spec, const KreinVector& v) {
  spec.validate();
  require(spec.d == v.d && spec.omega == v.omega, "apply_resolvent: model mismatch");
  const double lam = spec.lambda, al = spec.alpha, w = spec.omega;
  const int n = v.size;

  std::map<int, Eigen::VectorXd> rhs;
  auto slot = [&](int s) -> Eigen::VectorXd& {
    auto it = rhs.find(s);
    if (it == rhs.end()) it = rhs.emplace(s, Eigen::VectorXd::Zero(n)).first;
    return it->second;
  };
  if (v.bare != 0.0) slot(0) += v.bare * source_projection(v, exp_weight(lam, w), lam);
  for (const auto& [a, c] : v.free_terms) slot(0) += c * source_projection(v, pair_weight(lam, a, w), std::min(lam, a));
  for (const auto& t : v.charges)
    slot(t.sector) += cross_sector_matrix(spec, lam, t.lambda, t.sector, n, v.scale) * t.coeffs;

  KreinVector out = v;
  out.bare = 0.0;
  out.free_terms.clear();
  out.charges.clear();
  if (v.bare != 0.0) out.free_terms.emplace_back(lam, v.bare);
  for (const auto& [a, c] : v.free_terms) {
    require(std::abs(a - lam) > 1e-12 * std::max(a, lam), "apply_resolvent: repeated shift");
    out.free_terms.emplace_back(lam, c / (a - lam));
    out.free_terms.emplace_back(a, -c / (a - lam));
  }
  for (const auto& t : v.charges) {
    require(std::abs(t.lambda - lam) > 1e-12 * std::max(t.lambda, lam), "apply_resolvent: repeated shift");
    out.charges.push_back({lam, t.sector, t.coeffs / (t.lambda - lam)});
    out.charges.push_back({t.lambda, t.sector, -t.coeffs / (t.lambda - lam)});
  }

  for (auto& [sector, r] : rhs) {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    if (spec.d == 1) {
      a = al * k_sector_matrix(spec, sector, n, v.scale);
      a.diagonal().array() += 1.0;
      b = -al * r;
    } else {
      a = gamma_sector_matrix(spec, sector, n, v.scale);
      a.diagonal().array() += al;
      b = r;
    }
    const EigenSystem es = sym_eigen(a);
    const double lo = es.values(0);
    if (!(lo > 0.0)) {
      nlohmann::json j;
      j["error"] = "below solvability threshold";
      j["lambda"] = lam;
      j["sector"] = sector;
      j["lowest_eigenvalue"] = lo;
      throw NumericalError("apply_resolvent: lambda below the solvability threshold (lowest eigenvalue " +
                               std::to_string(lo) + ")",
                           j.dump());
    }
    const Eigen::VectorXd q = es.vectors * ((es.vectors.transpose() * b).array() / es.values.array()).matrix();
    out.charges.push_back({lam, sector, q});
  }
  compact(out);
  return out;
}

}  // namespace cspec
