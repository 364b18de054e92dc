#include <cmath>

#include "doctest.h"

#include "cspec/error.hpp"
#include "cspec/verify.hpp"

using namespace cspec;

namespace {

nlohmann::json without_time(const VerificationReport& r) {
  nlohmann::json j = to_json(r);
  j.erase("wall_seconds");
  return j;
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("references need provenance and finite values") {
    CHECK_THROWS_AS(Reference(1.0, Provenance::Paper, ""), InvalidArgument);
    CHECK_THROWS_AS(Reference(std::nan(""), Provenance::Derived, "x"), InvalidArgument);
    CHECK_NOTHROW(Reference(std::nan(""), Provenance::Measured, "reported"));
    CHECK_THROWS_AS(CheckItem("x", 1.0, Reference(1.0, Provenance::Measured, "m"), 0.1, Comparison::AbsDiff),
                    InvalidArgument);
    CHECK(to_string(Provenance::Paper) == "PAPER");
  }

  TEST_CASE("comparison semantics") {
    const Reference r(2.0, Provenance::Derived, "test");
    CHECK(evaluate(2.05, r, 0.1, Comparison::AbsDiff));
    CHECK(!evaluate(2.5, r, 0.1, Comparison::AbsDiff));
    CHECK(evaluate(2.1, r, 0.06, Comparison::RelDiff));
    CHECK(!evaluate(2.2, r, 0.06, Comparison::RelDiff));
    CHECK(evaluate(2.05, r, 0.1, Comparison::AtMost));
    CHECK(!evaluate(2.2, r, 0.1, Comparison::AtMost));
    CHECK(evaluate(1.95, r, 0.1, Comparison::AtLeast));
    CHECK(!evaluate(1.8, r, 0.1, Comparison::AtLeast));
    CHECK(!evaluate(std::nan(""), r, 0.1, Comparison::AbsDiff));
  }

  TEST_CASE("report pass flag follows its asserted items") {
    VerificationReport rep;
    rep.add(CheckItem("ok", 1.0, Reference(1.0, Provenance::Derived, "t"), 1e-12, Comparison::AbsDiff));
    CHECK(rep.pass);
    rep.add(CheckItem("shown", 5.0, Reference(0.0, Provenance::Measured, "t"), 0.0, Comparison::Report));
    CHECK(rep.pass);
    rep.add(CheckItem("bad", 2.0, Reference(1.0, Provenance::Derived, "t"), 1e-12, Comparison::AbsDiff));
    CHECK(!rep.pass);
    CHECK(!rep.asserted_pass());
    const nlohmann::json j = to_json(rep);
    CHECK(j["items"].size() == 3);
    CHECK(j["items"][0]["reference"]["provenance"] == "DERIVED");
  }

  TEST_CASE("line fit") {
    const LineFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
  }

  TEST_CASE("scaling examples") {
    CHECK(check_scaling(1, {-1.0}, {4.0}).pass);
    CHECK(check_scaling(2, {-1.0}, {0.5, 2.0}).pass);
    CHECK(check_scaling(3, {-1.0}, {4.0}).pass);
  }

  TEST_CASE("Schatten and cross-validation suites") {
    CHECK(check_schatten({0.5, 0.9, 0.99}, 2).pass);
    const VerificationReport a = cross_validate();
    CHECK(a.pass);
    CHECK(a.seed == VerifyOptions{}.seed);
    CHECK(without_time(a) == without_time(cross_validate()));
  }

  TEST_CASE("existence report covers every case; 1D contrast and 2D pass") {
    const VerificationReport r = check_existence_2d3d({-2.0, 0.0, 2.0});
    int seen = 0;
    for (const CheckItem& i : r.items) {
      if (i.comparison == Comparison::Report) continue;
      ++seen;
      const int d = i.inputs.value("d", 0);
      if (d == 1 || d == 2) CHECK_MESSAGE(i.pass, i.label << " " << i.inputs.dump());
    }
    CHECK(seen == 7);
  }

  TEST_CASE("suite names and unknown suites") {
    const auto names = suite_names();
    CHECK(std::find(names.begin(), names.end(), "all") != names.end());
    CHECK_THROWS_AS(run_suite("nope"), InvalidArgument);
    const auto reps = run_suite("scaling");
    CHECK(reps.size() == 3);
    for (const auto& r : reps) CHECK(r.pass);
  }
}
