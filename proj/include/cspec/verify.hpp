#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspec/spectra.hpp"

namespace cspec {

// Where a reference value comes from. Measured marks values that are reported, never asserted.
enum class Provenance { Paper, Derived, Measured };
std::string to_string(Provenance p);

enum class Comparison {
  AbsDiff,  // |computed - reference| <= tol
  RelDiff,  // |computed - reference| <= tol |reference|
  AtMost,   // computed <= reference + tol
  AtLeast,  // computed >= reference - tol
  Report    // no assertion
};
std::string to_string(Comparison c);

struct Reference {
  double value;
  Provenance provenance;
  std::string source;  // how the value was obtained; required

  Reference(double v, Provenance p, std::string src);
};

struct CheckItem {
  std::string label;
  double computed = 0.0;
  Reference reference;
  double tolerance = 0.0;
  Comparison comparison = Comparison::Report;
  bool pass = false;
  nlohmann::json inputs;

  CheckItem(std::string label, double computed, Reference ref, double tol, Comparison cmp,
            nlohmann::json inputs = nlohmann::json::object());
};

bool evaluate(double computed, const Reference& ref, double tol, Comparison cmp);

struct VerificationReport {
  std::string check;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<CheckItem> items;
  nlohmann::json extra = nlohmann::json::object();
  std::vector<std::string> notes;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  bool pass = true;

  CheckItem& add(CheckItem item);
  void note(std::string s) { notes.push_back(std::move(s)); }
  bool asserted_pass() const;  // every non-Report item passes
};

nlohmann::json to_json(const VerificationReport& r);

struct VerifyOptions {
  SolverBudgets budgets;
  std::uint64_t seed = 20240611;
  int jobs = 1;
};

inline constexpr double kCarloneConstant = 0.47873076;  // (3/5) sqrt(2/pi)
inline constexpr double kCarloneSlack = 5e-3;

VerificationReport check_carlone(const std::vector<double>& lambdas, int n_max, double omega = 1.0,
                                 const VerifyOptions& o = {});

// E_n(alpha, omega) against omega E_n(alpha', 1), alpha' = alpha / sqrt(omega) (d = 1, 3) or alpha (d = 2).
VerificationReport check_scaling(int d, const std::vector<double>& alphas, const std::vector<double>& omegas,
                                 const VerifyOptions& o = {});

// regime: 1d-small-alpha, 1d-large-omega, 2d-alpha-plus, 2d-alpha-minus, 3d-alpha-plus, 3d-alpha-minus.
VerificationReport check_asymptotics(const std::string& regime, const VerifyOptions& o = {});
std::vector<std::string> asymptotic_regimes();

VerificationReport check_existence_2d3d(const std::vector<double>& alphas, double omega = 1.0,
                                        const VerifyOptions& o = {});

// Counts along a decreasing alpha sequence; d = 1 also checks N > 1 beyond the measured alpha_0.
VerificationReport check_count_trends(int d, const std::vector<double>& alphas, const VerifyOptions& o = {});

// Gaussian factor t_nu (trace and norm trends) and partial sums of the singular values of G^lambda.
VerificationReport check_schatten(const std::vector<double>& nus, int d = 2, const VerifyOptions& o = {});

// Lowest branches of Gamma^lambda (d = 2) as lambda -> 0.
VerificationReport check_ground_branch(const std::vector<double>& lambdas, const VerifyOptions& o = {});

// Series vs integral Green function, position vs Fourier Gamma, resolvent identity.
VerificationReport cross_validate(const VerifyOptions& o = {});

// Always-runnable property suite.
VerificationReport check_properties(const VerifyOptions& o = {});

// Slope and coefficient of determination of a least-squares line.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

std::vector<std::string> suite_names();
// Runs a named suite (carlone, scaling, asymptotics, existence, counts, schatten, crossval, all).
std::vector<VerificationReport> run_suite(const std::string& name, const VerifyOptions& o = {});

}  // namespace cspec
