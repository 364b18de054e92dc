#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspec/spectra.hpp"

namespace cspec::cli {

inline constexpr const char* kCsvSchema = "# contact-spectra scan v1: d,alpha,omega,n,sector,E_n,residual,N";

struct RunConfig {
  std::string command;  // kernel, spectrum, scan, verify
  int d = 1;
  double omega = 1.0;
  double alpha = 0.0;
  double lambda = 1.0;
  std::string kind = "green";  // kernel: green (x, y, x', y') or k (x, x')
  std::vector<double> at;      // d entries per point
  std::vector<double> alpha_list;
  std::vector<double> omega_list;
  std::string suite = "all";
  std::string format;  // json (default) or csv (default for scan)
  std::string output;  // empty: stdout
  std::uint64_t seed = 20240611;
  int jobs = 1;
  int basis = 0;       // 0: default; functions per parity (d = 1) or per sector
  int sectors = -1;    // -1: default max sector
  int branches = -1;   // -1: default branch budget
  double scale = 0.0;  // 0: basis scale omega
  bool timings = false;

  SolverBudgets budgets() const;
  void validate() const;  // range checks; throws InvalidArgument
};

// Config keys meaningful for a command; anything else set from a file or a flag is rejected.
const std::vector<std::string>& command_keys(const std::string& command);

// Keys accepted in a JSON config file.
const std::vector<std::string>& config_keys();
// Fill `cfg` from a JSON object; unknown keys or wrong types throw InvalidArgument. Returns the keys set.
std::vector<std::string> apply_config(RunConfig& cfg, const nlohmann::json& j);

// JSON text with every floating-point number written with 17 significant digits.
std::string dump(const nlohmann::json& j, int indent = 2);

nlohmann::json to_json(const SpectrumReport& r);

// Exit codes: 0 success, 1 numerical failure or failed verification, 2 invalid configuration.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cspec::cli
