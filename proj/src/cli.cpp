#include "cspec/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"

#include "cspec/error.hpp"
#include "cspec/kernels.hpp"
#include "cspec/parallel.hpp"
#include "cspec/verify.hpp"

namespace cspec::cli {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump_to(std::ostringstream& os, const json& j, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (pretty) os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? fmt17(v) : std::string("null"));
      break;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        dump_to(os, e, indent, depth + 1);
      }
      newline(depth);
      os << ']';
      break;
    }
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        os << json(it.key()).dump() << (pretty ? ": " : ":");
        dump_to(os, it.value(), indent, depth + 1);
      }
      newline(depth);
      os << '}';
      break;
    }
    default:
      os << j.dump();
  }
}

template <class T>
T take(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config key '" + key + "' has the wrong type");
  }
}

double take_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw InvalidArgument("config key '" + key + "' must be a number");
  return v.get<double>();
}

int take_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw InvalidArgument("config key '" + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> take_numbers(const json& v, const std::string& key) {
  if (!v.is_array()) throw InvalidArgument("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(take_number(e, key));
  return out;
}

const std::map<std::string, std::function<void(RunConfig&, const json&)>>& setters() {
  static const std::map<std::string, std::function<void(RunConfig&, const json&)>> m = {
      {"command", [](RunConfig& c, const json& v) { c.command = take<std::string>(v, "command"); }},
      {"d", [](RunConfig& c, const json& v) { c.d = take_int(v, "d"); }},
      {"omega", [](RunConfig& c, const json& v) { c.omega = take_number(v, "omega"); }},
      {"alpha", [](RunConfig& c, const json& v) { c.alpha = take_number(v, "alpha"); }},
      {"lambda", [](RunConfig& c, const json& v) { c.lambda = take_number(v, "lambda"); }},
      {"kind", [](RunConfig& c, const json& v) { c.kind = take<std::string>(v, "kind"); }},
      {"at", [](RunConfig& c, const json& v) { c.at = take_numbers(v, "at"); }},
      {"alpha_list", [](RunConfig& c, const json& v) { c.alpha_list = take_numbers(v, "alpha_list"); }},
      {"omega_list", [](RunConfig& c, const json& v) { c.omega_list = take_numbers(v, "omega_list"); }},
      {"suite", [](RunConfig& c, const json& v) { c.suite = take<std::string>(v, "suite"); }},
      {"format", [](RunConfig& c, const json& v) { c.format = take<std::string>(v, "format"); }},
      {"output", [](RunConfig& c, const json& v) { c.output = take<std::string>(v, "output"); }},
      {"seed",
       [](RunConfig& c, const json& v) {
         if (!v.is_number_unsigned()) throw InvalidArgument("config key 'seed' must be a non-negative integer");
         c.seed = v.get<std::uint64_t>();
       }},
      {"jobs", [](RunConfig& c, const json& v) { c.jobs = take_int(v, "jobs"); }},
      {"basis", [](RunConfig& c, const json& v) { c.basis = take_int(v, "basis"); }},
      {"sectors", [](RunConfig& c, const json& v) { c.sectors = take_int(v, "sectors"); }},
      {"branches", [](RunConfig& c, const json& v) { c.branches = take_int(v, "branches"); }},
      {"scale", [](RunConfig& c, const json& v) { c.scale = take_number(v, "scale"); }},
      {"timings", [](RunConfig& c, const json& v) { c.timings = take<bool>(v, "timings"); }},
  };
  return m;
}

void copy_field(RunConfig& dst, const RunConfig& src, const std::string& key) {
  static const std::map<std::string, std::function<void(RunConfig&, const RunConfig&)>> m = {
      {"d", [](RunConfig& a, const RunConfig& b) { a.d = b.d; }},
      {"omega", [](RunConfig& a, const RunConfig& b) { a.omega = b.omega; }},
      {"alpha", [](RunConfig& a, const RunConfig& b) { a.alpha = b.alpha; }},
      {"lambda", [](RunConfig& a, const RunConfig& b) { a.lambda = b.lambda; }},
      {"kind", [](RunConfig& a, const RunConfig& b) { a.kind = b.kind; }},
      {"at", [](RunConfig& a, const RunConfig& b) { a.at = b.at; }},
      {"alpha_list", [](RunConfig& a, const RunConfig& b) { a.alpha_list = b.alpha_list; }},
      {"omega_list", [](RunConfig& a, const RunConfig& b) { a.omega_list = b.omega_list; }},
      {"suite", [](RunConfig& a, const RunConfig& b) { a.suite = b.suite; }},
      {"format", [](RunConfig& a, const RunConfig& b) { a.format = b.format; }},
      {"output", [](RunConfig& a, const RunConfig& b) { a.output = b.output; }},
      {"seed", [](RunConfig& a, const RunConfig& b) { a.seed = b.seed; }},
      {"jobs", [](RunConfig& a, const RunConfig& b) { a.jobs = b.jobs; }},
      {"basis", [](RunConfig& a, const RunConfig& b) { a.basis = b.basis; }},
      {"sectors", [](RunConfig& a, const RunConfig& b) { a.sectors = b.sectors; }},
      {"branches", [](RunConfig& a, const RunConfig& b) { a.branches = b.branches; }},
      {"scale", [](RunConfig& a, const RunConfig& b) { a.scale = b.scale; }},
      {"timings", [](RunConfig& a, const RunConfig& b) { a.timings = b.timings; }},
  };
  m.at(key)(dst, src);
}

const std::vector<std::string> kCommands = {"kernel", "spectrum", "scan", "verify"};

json state_json(const BoundState& s, int d) {
  return {{"n", s.branch},
          {"energy", s.energy},
          {"eigenvalue", -s.energy},
          {"sector", s.sector},
          {"sector_kind", d == 1 ? "parity" : "angular"},
          {"index", s.index},
          {"degeneracy", s.degeneracy},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"residual", s.residual},
          {"norm", s.norm}};
}

json budgets_json(const SolverBudgets& b) {
  return {{"basis_1d", b.basis_1d},
          {"basis_radial", b.basis_radial},
          {"max_sector", b.max_sector},
          {"branches_per_sector", b.branches_per_sector},
          {"branches_1d", b.branches_1d},
          {"e_min_factor", b.e_min_factor},
          {"e_max_factor", b.e_max_factor},
          {"root_tol", b.root_tol},
          {"max_iterations", b.max_iterations},
          {"basis_scale", b.basis_scale}};
}

std::vector<std::string> csv_rows(const SpectrumReport& r) {
  std::vector<std::string> rows;
  const std::string head = std::to_string(r.d) + "," + fmt17(r.alpha) + "," + fmt17(r.omega) + ",";
  if (r.states.empty()) {
    rows.push_back(head + ",,,," + std::to_string(r.count));
    return rows;
  }
  for (const BoundState& s : r.states) {
    rows.push_back(head + std::to_string(s.branch) + "," + std::to_string(s.sector) + "," + fmt17(s.energy) + "," +
                   fmt17(s.residual) + "," + std::to_string(r.count));
  }
  return rows;
}

std::string csv_table(const std::vector<SpectrumReport>& reports) {
  std::string s = std::string(kCsvSchema) + "\nd,alpha,omega,n,sector,E_n,residual,N\n";
  for (const auto& r : reports)
    for (const auto& row : csv_rows(r)) s += row + "\n";
  return s;
}

std::vector<double> points_of(const RunConfig& c, int index) {
  return {c.at.begin() + static_cast<long>(index) * c.d, c.at.begin() + static_cast<long>(index + 1) * c.d};
}

json kernel_command(const RunConfig& c) {
  ModelSpec spec{c.d, c.omega, 0.0, c.lambda};
  spec.validate();
  const int npts = c.kind == "k" ? 2 : 4;
  require(static_cast<int>(c.at.size()) == npts * c.d,
          "--at needs " + std::to_string(npts * c.d) + " numbers for kind " + c.kind + " in d = " +
              std::to_string(c.d));
  std::vector<std::vector<double>> p;
  for (int i = 0; i < npts; ++i) p.push_back(points_of(c, i));
  double value;
  json at;
  if (c.kind == "k") {
    value = k_kernel(spec, p[0], p[1]);
    at = {{"x", p[0]}, {"xp", p[1]}};
  } else {
    value = green(spec, p[0], p[1], p[2], p[3]);
    at = {{"x", p[0]}, {"y", p[1]}, {"xp", p[2]}, {"yp", p[3]}};
  }
  return {{"kind", c.kind}, {"d", c.d}, {"omega", c.omega}, {"lambda", c.lambda}, {"at", at}, {"value", value}};
}

}  // namespace

SolverBudgets RunConfig::budgets() const {
  SolverBudgets b;
  const bool all_d = command == "verify";
  if (basis > 0) {
    if (d == 1 || all_d) b.basis_1d = basis;
    if (d > 1 || all_d) b.basis_radial = basis;
  }
  if (sectors >= 0) b.max_sector = sectors;
  if (branches > 0) {
    if (d == 1 || all_d) b.branches_1d = branches;
    if (d > 1 || all_d) b.branches_per_sector = branches;
  }
  b.basis_scale = scale;
  b.jobs = jobs;
  return b;
}

void RunConfig::validate() const {
  require(std::find(kCommands.begin(), kCommands.end(), command) != kCommands.end(),
          "unknown command '" + command + "'");
  require(d >= 1 && d <= 3, "d must be 1, 2 or 3");
  require(std::isfinite(omega) && omega > 0.0, "omega must be positive");
  require(std::isfinite(alpha), "alpha must be finite");
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
  require(kind == "green" || kind == "k", "kind must be green or k");
  require(jobs >= 1, "jobs must be >= 1");
  require(basis >= 0 && basis <= 400, "basis must be in [1, 400]");
  require(sectors >= -1 && sectors <= 200, "sectors must be in [0, 200]");
  require(branches == -1 || (branches >= 1 && branches <= 200), "branches must be in [1, 200]");
  require(std::isfinite(scale) && scale >= 0.0, "scale must be positive");
  require(format.empty() || format == "json" || format == "csv", "format must be json or csv");
  if (command == "kernel" || command == "verify") require(format != "csv", command + " emits JSON only");
  if (command == "scan") require(!alpha_list.empty() && !omega_list.empty(), "scan needs --alpha-list and --omega-list");
  for (double v : alpha_list) require(std::isfinite(v), "alpha-list entries must be finite");
  for (double v : omega_list) require(std::isfinite(v) && v > 0.0, "omega-list entries must be positive");
  for (double v : at) require(std::isfinite(v), "--at entries must be finite");
  if (command == "verify") {
    const auto names = suite_names();
    require(std::find(names.begin(), names.end(), suite) != names.end(), "unknown suite '" + suite + "'");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

const std::vector<std::string>& command_keys(const std::string& command) {
  static const std::vector<std::string> common = {"command", "format", "output"};
  static const std::vector<std::string> solver = {"jobs", "basis", "sectors", "branches", "scale"};
  static const std::map<std::string, std::vector<std::string>> m = [] {
    auto join = [](std::vector<std::string> a, const std::vector<std::string>& b) {
      a.insert(a.end(), b.begin(), b.end());
      std::sort(a.begin(), a.end());
      return a;
    };
    std::map<std::string, std::vector<std::string>> r;
    r["kernel"] = join(common, {"d", "omega", "lambda", "kind", "at"});
    r["spectrum"] = join(join(common, solver), {"d", "alpha", "omega"});
    r["scan"] = join(join(common, solver), {"d", "alpha_list", "omega_list"});
    r["verify"] = join(join(common, solver), {"suite", "seed", "timings"});
    return r;
  }();
  auto it = m.find(command);
  if (it == m.end()) throw InvalidArgument("unknown command '" + command + "'");
  return it->second;
}

std::vector<std::string> apply_config(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw InvalidArgument("config file must hold a JSON object");
  std::vector<std::string> set;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto s = setters().find(it.key());
    if (s == setters().end()) throw InvalidArgument("unknown config key '" + it.key() + "'");
    s->second(cfg, it.value());
    set.push_back(it.key());
  }
  return set;
}

std::string dump(const json& j, int indent) {
  std::ostringstream os;
  dump_to(os, j, indent, 0);
  return os.str();
}

json to_json(const SpectrumReport& r) {
  json states = json::array();
  for (const BoundState& s : r.states) states.push_back(state_json(s, r.d));
  return {{"d", r.d},
          {"alpha", r.alpha},
          {"omega", r.omega},
          {"count", r.count},
          {"partial", r.partial},
          {"states", states},
          {"diagnostics", r.diagnostics},
          {"budgets", budgets_json(r.budgets)}};
}

namespace {

int default_jobs() {
  const char* env = std::getenv("CONTACT_SPECTRA_JOBS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw InvalidArgument("CONTACT_SPECTRA_JOBS must be a positive integer");
  return static_cast<int>(v);
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open output file '" + c.output + "'");
  f << text;
  if (!f) throw NumericalError("writing '" + c.output + "' failed");
}

int execute(const RunConfig& c, std::ostream& out) {
  if (c.command == "kernel") {
    emit(c, dump(kernel_command(c)) + "\n", out);
    return 0;
  }
  const SolverBudgets b = c.budgets();
  if (c.command == "spectrum") {
    const SpectrumReport r = bound_states(c.d, c.alpha, c.omega, b);
    emit(c, c.format == "csv" ? csv_table({r}) : dump(to_json(r)) + "\n", out);
    return 0;
  }
  if (c.command == "scan") {
    std::vector<std::pair<double, double>> pts;
    for (double a : c.alpha_list)
      for (double w : c.omega_list) pts.emplace_back(a, w);
    std::sort(pts.begin(), pts.end());
    std::vector<SpectrumReport> reps(pts.size());
    std::vector<std::string> errors(pts.size());
    std::vector<std::string> payloads(pts.size());
    SolverBudgets inner = b;
    inner.jobs = pts.size() > 1 ? 1 : b.jobs;
    parallel_for(static_cast<int>(pts.size()), c.jobs, [&](int i) {
      try {
        reps[i] = bound_states(c.d, pts[i].first, pts[i].second, inner);
      } catch (const NumericalError& e) {
        errors[i] = e.what();
        payloads[i] = e.payload();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!errors[i].empty()) {
        throw NumericalError("scan point alpha = " + fmt17(pts[i].first) + ", omega = " + fmt17(pts[i].second) +
                                 ": " + errors[i],
                             payloads[i]);
      }
    }
    if (c.format == "json") {
      json arr = json::array();
      for (const auto& r : reps) arr.push_back(to_json(r));
      emit(c, dump(arr) + "\n", out);
    } else {
      emit(c, csv_table(reps), out);
    }
    return 0;
  }
  VerifyOptions o;
  o.budgets = b;
  o.seed = c.seed;
  o.jobs = c.jobs;
  const std::vector<VerificationReport> reps = run_suite(c.suite, o);
  json arr = json::array();
  bool pass = true;
  for (const auto& r : reps) {
    json j = to_json(r);
    if (!c.timings) j.erase("wall_seconds");
    arr.push_back(j);
    pass = pass && r.pass;
  }
  emit(c, dump(json{{"suite", c.suite}, {"pass", pass}, {"reports", arr}}) + "\n", out);
  return pass ? 0 : 1;
}

json error_json(const std::string& kind, const std::string& message, const std::string& payload) {
  json e = {{"kind", kind}, {"message", message}};
  if (!payload.empty()) {
    json p = json::parse(payload, nullptr, false);
    e["payload"] = p.is_discarded() ? json(payload) : p;
  }
  return {{"error", e}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bound states of a particle with a contact interaction to a harmonically trapped partner"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig flags;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::string>> opts;
  auto add = [&](CLI::Option* o, const std::string& key) { opts.emplace_back(o, key); };

  app.add_option("--config", config_path, "JSON config file; flags override its keys");
  add(app.add_option("--d", flags.d, "Dimension (1, 2, 3)"), "d");
  add(app.add_option("--omega", flags.omega, "Trap frequency"), "omega");
  add(app.add_option("--alpha", flags.alpha, "Coupling"), "alpha");
  add(app.add_option("--lambda", flags.lambda, "Spectral parameter"), "lambda");
  add(app.add_option("--kind", flags.kind, "Kernel: green or k"), "kind");
  add(app.add_option("--at", flags.at, "Evaluation point, comma separated")->delimiter(','), "at");
  add(app.add_option("--alpha-list", flags.alpha_list, "Couplings, comma separated")->delimiter(','), "alpha_list");
  add(app.add_option("--omega-list", flags.omega_list, "Frequencies, comma separated")->delimiter(','), "omega_list");
  add(app.add_option("--suite", flags.suite, "Verification suite"), "suite");
  add(app.add_option("--format", flags.format, "json or csv"), "format");
  add(app.add_option("--output", flags.output, "Output file (default stdout)"), "output");
  add(app.add_option("--seed", flags.seed, "Random seed"), "seed");
  add(app.add_option("--jobs", flags.jobs, "Worker threads (default $CONTACT_SPECTRA_JOBS or 1)"), "jobs");
  add(app.add_option("--basis", flags.basis, "Basis functions per parity (d = 1) or per sector"), "basis");
  add(app.add_option("--sectors", flags.sectors, "Highest sector searched"), "sectors");
  add(app.add_option("--branches", flags.branches, "Branches searched per sector (d = 1: merged)"), "branches");
  add(app.add_option("--scale", flags.scale, "Basis scale (default omega)"), "scale");
  add(app.add_flag("--timings", flags.timings, "Include wall times in verification reports"), "timings");

  app.add_subcommand("kernel", "Evaluate G^lambda or K^lambda at points (--kind, --at)");
  app.add_subcommand("spectrum", "Bound states below the threshold for one (d, alpha, omega)");
  app.add_subcommand("scan", "Spectra over --alpha-list x --omega-list (CSV by default)");
  app.add_subcommand("verify", "Run a verification suite; exit 1 if any check fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    out << dump(error_json("invalid_argument", e.what(), {})) << "\n";
    return 2;
  }

  try {
    RunConfig cfg;
    cfg.jobs = default_jobs();
    std::vector<std::string> set;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw InvalidArgument("cannot read config file '" + config_path + "'");
      json j = json::parse(f, nullptr, false);
      if (j.is_discarded()) throw InvalidArgument("config file '" + config_path + "' is not valid JSON");
      set = apply_config(cfg, j);
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (!cfg.command.empty() && cfg.command != command)
      throw InvalidArgument("config file is for command '" + cfg.command + "', not '" + command + "'");
    cfg.command = command;
    for (const auto& [o, key] : opts) {
      if (o->count() == 0) continue;
      copy_field(cfg, flags, key);
      set.push_back(key);
    }
    const auto& allowed = command_keys(cfg.command);
    for (const std::string& key : set) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw InvalidArgument("'" + key + "' does not apply to command '" + cfg.command + "'");
    }
    if (cfg.format.empty()) cfg.format = cfg.command == "scan" ? "csv" : "json";
    cfg.validate();
    return execute(cfg, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    out << dump(error_json("invalid_argument", e.what(), {})) << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    out << dump(error_json("numerical", e.what(), e.payload())) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    out << dump(error_json("internal", e.what(), {})) << "\n";
    return 1;
  }
}

}  // namespace cspec::cli
