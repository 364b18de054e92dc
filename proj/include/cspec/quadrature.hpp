#pragma once

#include <functional>
#include <string>
#include <vector>

namespace cspec {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = 0.0;
  double b = 1.0;

  std::size_t size() const { return nodes.size(); }
};

QuadRule gauss_legendre(int n, double a, double b);

// Weight e^{-x^2} on the real line; interval stored as (-inf, inf).
QuadRule gauss_hermite(int n);

// Weight x^alpha e^{-x} on (0, inf).
QuadRule gauss_laguerre(int n, double alpha);

double integrate(const std::function<double(double)>& f, const QuadRule& rule);

// nu -> 1 singularity structure of the integrands over nu in (0,1).
enum class EndpointClass { D1, D2a, D2G, D3a, D3G };

EndpointClass endpoint_class_from_string(const std::string& s);
std::string to_string(EndpointClass c);

struct NuProfile {
  double p = 1.0;  // nu^{p-1} behaviour at nu -> 0, p = lambda/omega
  EndpointClass endpoint_class = EndpointClass::D1;
  double relative_tolerance = 1e-10;
  // Smallest length scale of the integrand in sqrt(t) units (e.g. a point
  // separation); the graded panels reach below it.
  double feature_scale = 1.0;
};

// One node of a rule over nu in (0,1), kept in the log variable
// t = ln(1/nu) = u^2 so that 1 - nu stays accurate near nu = 1.
struct NuNode {
  double u;
  double t;
  double nu;
  double one_minus_nu;
  double weight_t;  // weight for the measure dt
  int panel_key;    // identifies the u-panel, stable across profiles
  int index;        // node index inside the panel
};

struct NuRule {
  std::vector<NuNode> nodes;  // increasing in t (decreasing in nu)
  NuProfile profile;
  int subdivision = 0;
  double u_lo = 0.0;
  double u_max = 0.0;

  std::size_t size() const { return nodes.size(); }
};

constexpr int kNuPanelOrder = 16;
constexpr int kDefaultNodeBudget = 4096;

// Rule with geometrically graded panels in u = sqrt(t), refined until
// the model integrand of the endpoint class is converged to tolerance.
NuRule nu_rule(const NuProfile& profile, int node_budget = kDefaultNodeBudget);

// Fixed rule at a given subdivision level, no convergence check.
NuRule nu_rule_fixed(const NuProfile& profile, int subdivision);

// Panel doubling of an existing rule.
NuRule refine(const NuRule& rule);

// Sum of weight * f(nu) * nu over the nodes, i.e. int_0^1 f(nu) dnu.
// f sees the whole node so it can use t and 1 - nu directly. Throws when nu underflows
// at a node where nu^p is not negligible; integrate_t covers that case.
double integrate(const std::function<double(const NuNode&)>& f, const NuRule& rule);

// Same, for integrands already written as densities in t.
double integrate_t(const std::function<double(const NuNode&)>& g, const NuRule& rule);

// Model integrand of an endpoint class, as a density in t (used to converge the rule)
// and as a density in nu (nu > 0).
double model_density_t(const NuProfile& profile, const NuNode& node);
double model_integrand(const NuProfile& profile, const NuNode& node);

}  // namespace cspec
