#pragma once

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace divdiv {

using Json = nlohmann::ordered_json;

// source is "formula" (closed-form count), "oracle" (independent computation)
// or "identity" (residual of an algebraic identity).
struct Check {
  std::string name;
  Json expected;
  Json computed;
  double tolerance = 0.0;
  bool pass = false;
  std::string source;
};

struct Report {
  std::string command;
  Json inputs = Json::object();
  Json data = Json::object();
  std::vector<Check> checks;

  bool ok() const;
  int failures() const;
  // Integer equality.
  Check& expect_eq(const std::string& name, long long expected, long long computed, const std::string& source);
  // computed <= tol.
  Check& expect_le(const std::string& name, double computed, double tol, const std::string& source = "identity");
  // computed >= bound.
  Check& expect_ge(const std::string& name, double computed, double bound, const std::string& source = "oracle");
  Check& expect_in(const std::string& name, double computed, double lo, double hi, const std::string& source);
  Check& expect_true(const std::string& name, bool ok, const std::string& detail, const std::string& source = "oracle");
  // Appends the other report's checks with a name prefix and nests its data.
  void absorb(const Report& other, const std::string& prefix);
};

Json to_json(const Report& r);
std::string dump_json(const Report& r);
void print_table(std::ostream& out, const Report& r);

}  // namespace divdiv
