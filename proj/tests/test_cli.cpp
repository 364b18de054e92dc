#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cspec/cli.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "contact_spectra");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cspec::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << content;
  return p.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("numbers carry 17 significant digits") {
    CHECK(cspec::cli::dump(json(0.1), -1) == "0.10000000000000001");
    CHECK(cspec::cli::dump(json{{"b", 1}, {"a", 2.5}}, -1) == "{\"a\":2.5,\"b\":1}");
  }

  TEST_CASE("spectrum: no states for a repulsive 1D contact") {
    const Result r = run({"spectrum", "--d", "1", "--alpha", "1", "--omega", "1"});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["states"].empty());
    CHECK(j["count"] == 0);
  }

  TEST_CASE("spectrum: weak attraction gives E_0 near alpha^2 / 2") {
    const Result r = run({"spectrum", "--d", "1", "--alpha", "-0.05", "--omega", "1"});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j["states"].size() == 1);
    const double e = j["states"][0]["energy"];
    CHECK(std::abs(e / 0.00125 - 1.0) <= 0.05);
    CHECK(j["states"][0]["eigenvalue"].get<double>() == -e);
  }

  TEST_CASE("verify carlone passes and output is reproducible") {
    const Result a = run({"verify", "--suite", "carlone"});
    CHECK(a.code == 0);
    const json j = json::parse(a.out);
    CHECK(j["pass"] == true);
    CHECK(!j["reports"][0].contains("wall_seconds"));
    const Result b = run({"verify", "--suite", "carlone"});
    CHECK(a.out == b.out);
  }

  TEST_CASE("failed verification exits 1") {
    const Result r = run({"verify", "--suite", "ground"});
    CHECK(r.code == 1);
    CHECK(json::parse(r.out)["pass"] == false);
  }

  TEST_CASE("kernel value and argument checks") {
    const Result r = run({"kernel", "--d", "1", "--omega", "1", "--lambda", "1", "--at", "0.1,0.2,0.3,0.4"});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["value"].get<double>() > 0.0);
    CHECK(run({"kernel", "--d", "1", "--at", "0.1,0.2"}).code == 2);
    CHECK(run({"kernel", "--d", "1", "--at", "0,0,0,0"}).code == 2);
    CHECK(run({"kernel", "--d", "1", "--alpha", "-1", "--at", "0.1,0.2,0.3,0.4"}).code == 2);
    const Result k = run({"kernel", "--d", "2", "--kind", "k", "--at", "0,0,0.5,0"});
    CHECK(k.code == 0);
  }

  TEST_CASE("scan: versioned CSV, rows sorted by input tuple") {
    const Result r = run({"scan", "--d", "1", "--alpha-list", "-1,-2", "--omega-list", "4,1", "--jobs", "3"});
    CHECK(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == cspec::cli::kCsvSchema);
    std::getline(in, line);
    CHECK(line == "d,alpha,omega,n,sector,E_n,residual,N");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].rfind("1,-2,1,0,", 0) == 0);
    CHECK(rows[4].rfind("1,-1,4,0,", 0) == 0);
    const Result serial = run({"scan", "--d", "1", "--alpha-list", "-1,-2", "--omega-list", "4,1", "--jobs", "1"});
    CHECK(serial.out == r.out);
    const Result js = run({"scan", "--d", "1", "--alpha-list", "1", "--omega-list", "1", "--format", "json"});
    CHECK(json::parse(js.out).size() == 1);
  }

  TEST_CASE("config file: flags override, unknown keys rejected") {
    const std::string good = temp_file("cs_good.json", R"({"command": "spectrum", "d": 1, "alpha": 1.0, "omega": 2.0})");
    const Result a = run({"spectrum", "--config", good});
    CHECK(a.code == 0);
    CHECK(json::parse(a.out)["omega"] == 2.0);
    const Result b = run({"spectrum", "--config", good, "--alpha", "-1"});
    CHECK(json::parse(b.out)["count"] == 1);
    CHECK(run({"spectrum", "--config", temp_file("cs_bad.json", R"({"d": 1, "grid": 3})")}).code == 2);
    CHECK(run({"spectrum", "--config", temp_file("cs_type.json", R"({"d": "one"})")}).code == 2);
    CHECK(run({"verify", "--config", good}).code == 2);
    CHECK(run({"spectrum", "--config", temp_file("cs_syntax.json", "{")}).code == 2);
  }

  TEST_CASE("invalid configurations exit 2 with a JSON error") {
    for (const auto& args : std::vector<std::vector<std::string>>{{"spectrum", "--d", "4"},
                                                                  {"spectrum", "--omega", "-1"},
                                                                  {"verify", "--suite", "nope"},
                                                                  {"spectrum", "--bogus"},
                                                                  {},
                                                                  {"spectrum", "--format", "xml"},
                                                                  {"verify", "--format", "csv"}}) {
      const Result r = run(args);
      CHECK(r.code == 2);
      CHECK(json::parse(r.out)["error"]["kind"] == "invalid_argument");
    }
  }

  TEST_CASE("jobs default comes from the environment") {
    ::setenv("CONTACT_SPECTRA_JOBS", "zero", 1);
    CHECK(run({"spectrum", "--alpha", "-1"}).code == 2);
    ::setenv("CONTACT_SPECTRA_JOBS", "2", 1);
    CHECK(run({"spectrum", "--alpha", "-1"}).code == 0);
    ::unsetenv("CONTACT_SPECTRA_JOBS");
  }

  TEST_CASE("output file") {
    const auto p = (std::filesystem::temp_directory_path() / "cs_out.json").string();
    const Result r = run({"spectrum", "--alpha", "-1", "--output", p});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(p);
    CHECK(json::parse(f)["count"] == 1);
  }
}
