#include "divdiv/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace divdiv {

namespace {

Check& push(Report& r, Check c) {
  r.checks.push_back(std::move(c));
  return r.checks.back();
}

std::string show(const Json& j) {
  if (j.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", j.get<double>());
    return buf;
  }
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

// JSON has no representation for inf/nan.
Json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

bool Report::ok() const { return failures() == 0; }

int Report::failures() const {
  int n = 0;
  for (const auto& c : checks)
    if (!c.pass) ++n;
  return n;
}

Check& Report::expect_eq(const std::string& name, long long expected, long long computed, const std::string& source) {
  return push(*this, {name, expected, computed, 0.0, expected == computed, source});
}

Check& Report::expect_le(const std::string& name, double computed, double tol, const std::string& source) {
  return push(*this, {name, "<= tol", num(computed), tol, computed <= tol, source});
}

Check& Report::expect_ge(const std::string& name, double computed, double bound, const std::string& source) {
  return push(*this, {name, ">= " + show(bound), num(computed), bound, computed >= bound, source});
}

Check& Report::expect_in(const std::string& name, double computed, double lo, double hi, const std::string& source) {
  return push(*this, {name, "[" + show(lo) + ", " + show(hi) + "]", num(computed), hi - lo,
                      computed >= lo && computed <= hi, source});
}

Check& Report::expect_true(const std::string& name, bool ok, const std::string& detail, const std::string& source) {
  return push(*this, {name, true, detail, 0.0, ok, source});
}

void Report::absorb(const Report& other, const std::string& prefix) {
  for (Check c : other.checks) {
    c.name = prefix + "." + c.name;
    checks.push_back(std::move(c));
  }
  if (!other.data.empty()) data[prefix] = other.data;
}

Json to_json(const Report& r) {
  Json j;
  j["command"] = r.command;
  j["inputs"] = r.inputs;
  j["pass"] = r.ok();
  j["failures"] = r.failures();
  Json cs = Json::array();
  for (const auto& c : r.checks) {
    Json e;
    e["name"] = c.name;
    e["expected"] = c.expected;
    e["computed"] = c.computed;
    e["tolerance"] = c.tolerance;
    e["source"] = c.source;
    e["pass"] = c.pass;
    cs.push_back(e);
  }
  j["checks"] = cs;
  j["data"] = r.data;
  return j;
}

std::string dump_json(const Report& r) { return to_json(r).dump(2) + "\n"; }

void print_table(std::ostream& out, const Report& r) {
  size_t w = 5;
  for (const auto& c : r.checks) w = std::max(w, c.name.size());
  out << r.command << "\n";
  char line[512];
  for (const auto& c : r.checks) {
    std::snprintf(line, sizeof line, "  %-4s  %-*s  computed %-14s expected %-14s [%s]\n", c.pass ? "PASS" : "FAIL",
                  static_cast<int>(w), c.name.c_str(), show(c.computed).c_str(), show(c.expected).c_str(),
                  c.source.c_str());
    out << line;
  }
  out << (r.ok() ? "all checks passed" : std::to_string(r.failures()) + " check(s) failed") << "\n";
}

}  // namespace divdiv
