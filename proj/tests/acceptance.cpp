// Acceptance criteria 1-10: one pass/fail line each; exit status 1 when any criterion fails.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "cspec/cli.hpp"
#include "cspec/verify.hpp"

using namespace cspec;

namespace {

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<std::vector<VerificationReport>(const VerifyOptions&)> run;
};

std::vector<Criterion> criteria() {
  auto one = [](auto f) {
    return [f](const VerifyOptions& o) { return std::vector<VerificationReport>{f(o)}; };
  };
  return {
      {1, "1D bound |mu_n - 1/sqrt(2(n+lambda))| <= 0.47873 + 5e-3", 60,
       one([](const VerifyOptions& o) { return check_carlone({0.1, 0.5, 1.0, 2.0, 5.0, 10.0}, 15, 1.0, o); })},
      {2, "1D scaling law, alpha = -1, omega in {0.5, 2, 4}, 1e-4", 120,
       one([](const VerifyOptions& o) { return check_scaling(1, {-1.0}, {0.5, 2.0, 4.0}, o); })},
      {3, "1D small alpha, |2E_0/alpha^2 - 1| <= 0.05", 30,
       one([](const VerifyOptions& o) { return check_asymptotics("1d-small-alpha", o); })},
      {4, "1D large omega: bounded |E_0 - 1/2| omega, decreasing trace distance", 180,
       one([](const VerifyOptions& o) { return check_asymptotics("1d-large-omega", o); })},
      {5, "2D/3D existence for alpha in {-2, 0, 2}; 1D alpha = 1 has none", 300,
       one([](const VerifyOptions& o) { return check_existence_2d3d({-2.0, 0.0, 2.0}, 1.0, o); })},
      {6, "2D and 3D scaling laws, 1e-3", 300,
       [](const VerifyOptions& o) {
         return std::vector<VerificationReport>{check_scaling(2, {-1.0}, {0.5, 2.0}, o),
                                                check_scaling(3, {-1.0}, {4.0}, o)};
       }},
      {7, "2D ground branch: gamma_0 decreasing, lambda gamma_0 within 20%, gamma_1 within 50%", 180,
       one([](const VerifyOptions& o) { return check_ground_branch({1.0, 1e-1, 1e-2, 1e-3}, o); })},
      {8, "2D/3D asymptotic slopes in alpha", 600,
       [](const VerifyOptions& o) {
         std::vector<VerificationReport> r;
         for (const char* regime : {"2d-alpha-plus", "2d-alpha-minus", "3d-alpha-plus", "3d-alpha-minus"})
           r.push_back(check_asymptotics(regime, o));
         return r;
       }},
      {9, "oracle equivalences: Green series, position vs Fourier, resolvent identity", 180,
       one([](const VerifyOptions& o) { return cross_validate(o); })},
      {10, "property suites and monotone counts", 180,
       [](const VerifyOptions& o) {
         return std::vector<VerificationReport>{
             check_properties(o), check_count_trends(2, {-1.0, -2.0, -3.0, -4.0}, o),
             check_count_trends(3, {-1.0, -2.0, -4.0}, o), check_count_trends(1, {-0.5, -1.0, -2.0, -4.0}, o)};
       }},
  };
}

}  // namespace

int main(int argc, char** argv) {
  VerifyOptions o;
  o.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  o.budgets.jobs = o.jobs;

  nlohmann::json all = nlohmann::json::array();
  std::vector<std::string> failures;
  bool ok = true;
  for (const Criterion& c : criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<VerificationReport> reps;
    std::string error;
    try {
      reps = c.run(o);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = error.empty() && secs <= c.limit_seconds;
    nlohmann::json entry = {{"criterion", c.id}, {"title", c.title}, {"seconds", secs}, {"limit_seconds", c.limit_seconds}};
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : reps) {
      pass = pass && r.pass;
      reports.push_back(to_json(r));
      for (const auto& item : r.items)
        if (item.comparison != Comparison::Report && !item.pass)
          failures.push_back("  " + std::to_string(c.id) + " " + r.check + ": " + item.label + " = " +
                             cli::dump(item.computed) + " " + cli::dump(item.inputs.empty() ? r.inputs : item.inputs, -1));
    }
    if (!error.empty()) failures.push_back("  " + std::to_string(c.id) + " error: " + error);
    if (secs > c.limit_seconds) failures.push_back("  " + std::to_string(c.id) + " over runtime limit");
    entry["pass"] = pass;
    entry["reports"] = reports;
    all.push_back(entry);
    ok = ok && pass;
    std::printf("criterion %2d %s  %-86s %7.2fs / %.0fs\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str(), secs,
                c.limit_seconds);
    std::fflush(stdout);
  }
  if (!failures.empty()) {
    std::printf("failed items:\n");
    for (const auto& f : failures) std::printf("%s\n", f.c_str());
  }
  const std::string path = argc > 1 ? argv[1] : "acceptance_report.json";
  std::ofstream(path) << cli::dump(all) << "\n";
  return ok ? 0 : 1;
}
