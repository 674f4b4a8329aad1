#include <doctest.h>

#include <sstream>

#include "abstain/verify.hpp"

using namespace abstain::verify;

TEST_CASE("quick property suite passes") {
  VerifyOptions options;
  options.quick = true;
  const auto results = run_property_suite(options);
  CHECK(results.size() == 7);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CHECK(r.passed);
    CHECK(r.violations == 0);
    CHECK(r.cases > 0);
  }
}

TEST_CASE("property CSV layout") {
  std::vector<PropertyResult> results{{"a", 10, 0, 0.5, true}, {"b", 3, 1, -2.0, false}};
  std::ostringstream out;
  write_property_csv(out, results);
  CHECK(out.str() ==
        "property,cases,violations,worst,status\n"
        "a,10,0,0.5,pass\n"
        "b,3,1,-2,fail\n");
}

TEST_CASE("individual checks honour the seed") {
  VerifyOptions a;
  a.quick = true;
  a.seed = 1;
  VerifyOptions b = a;
  const auto x = check_dominance(a);
  const auto y = check_dominance(b);
  CHECK(x.worst == y.worst);
  CHECK(x.cases == y.cases);
}
