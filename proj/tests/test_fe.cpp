#include "divdiv/fe2d.hpp"
#include "divdiv/fe3d.hpp"

#include "doctest.h"

#include <map>

using namespace divdiv;

namespace {

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Shape space dimensions from the polynomial degree and value range.
long long shape_dim(const std::string& f, int k) {
  static const std::map<std::string, std::pair<int, int>> m{
      {"h1_scalar", {2, 1}}, {"hrot_vec", {1, 2}}, {"l2_lagrange", {0, 1}}, {"h1_vec", {2, 2}},
      {"hrotrot_s2", {1, 3}}};
  static const std::map<std::string, std::pair<int, int>> m3{
      {"hsymcurl_T", {1, 8}}, {"hdivdiv_S", {0, 6}}, {"h1_vec3", {2, 3}}, {"dg_scalar", {-2, 1}}};
  if (auto it = m.find(f); it != m.end()) return it->second.second * binom(k + it->second.first + 2, 2);
  auto [d, c] = m3.at(f);
  return c * binom(k + d + 3, 3);
}

}  // namespace

TEST_CASE("DOF counts at k = 3") {
  const std::map<std::string, int> expect{{"h1_scalar", 21},  {"hrot_vec", 30},  {"l2_lagrange", 10},
                                          {"h1_vec", 42},     {"hrotrot_s2", 45}, {"hsymcurl_T", 280},
                                          {"hdivdiv_S", 120}, {"h1_vec3", 168},   {"dg_scalar", 4}};
  for (const auto& f : families_2d()) CHECK(element_2d(f, 3).ndofs() == expect.at(f));
  for (const auto& f : families_3d()) CHECK(element_3d(f, 3).ndofs() == expect.at(f));
}

TEST_CASE("DOF counts equal shape dimensions") {
  for (int k = 3; k <= 5; ++k) {
    for (const auto& f : families_2d()) CHECK(tally_2d(f, k).total() == shape_dim(f, k));
    for (const auto& f : families_3d()) CHECK(tally_3d(f, k).total() == shape_dim(f, k));
  }
}

TEST_CASE("3-D DOF counts per attachment at k = 3") {
  // counted from the functionals: vertex values and gradients, edge and face
  // moments against the listed test spaces, interior moments
  struct Row {
    const char* family;
    int vertex, edge, face, interior;
  };
  const Row rows[] = {
      {"hsymcurl_T", 4 * 32, 6 * 10, 4 * 12, 44},
      {"hdivdiv_S", 4 * 6, 6 * 6, 4 * 7, 32},
      {"h1_vec3", 4 * 30, 0, 4 * 9, 12},
      {"dg_scalar", 0, 0, 0, 4},
  };
  for (const auto& r : rows) {
    CAPTURE(r.family);
    FiniteElement e = element_3d(r.family, 3);
    CHECK(e.count(Attach::vertex) == r.vertex);
    CHECK(e.count(Attach::edge) == r.edge);
    CHECK(e.count(Attach::face) == r.face);
    CHECK(e.count(Attach::interior) == r.interior);
  }
}

TEST_CASE("nodal basis is dual to the DOFs") {
  for (const auto& f : families_3d()) {
    FiniteElement e = element_3d(f, 3);
    MatrixXd id = e.dofs_of(poly_fields([&] {
      std::vector<PolyField> fs;
      for (int i = 0; i < e.ndofs(); ++i) fs.push_back(e.shape.combination(e.nodal.col(i)));
      return fs;
    }()));
    CHECK((id - MatrixXd::Identity(e.ndofs(), e.ndofs())).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("unisolvence on random cells") {
  for (int k : {3, 4}) {
    for (const auto& f : families_2d()) CHECK(unisolvence_audit_2d(f, k, 2, 1).ok());
    for (const auto& f : families_3d()) CHECK(unisolvence_audit_3d(f, k, 2, 1).ok());
  }
}

TEST_CASE("bubble audits") {
  for (int k : {3, 4}) {
    CAPTURE(k);
    Report b2 = bubble_audit_2d(k);
    CHECK(b2.ok());
    Report b3 = bubble_audit_3d(k);
    CHECK(b3.ok());
    CHECK(b3.data["divdiv_tail_degree"].get<int>() == k - 2);
  }
  CHECK(bubble_audit_2d(3).data["strain"]["rank_rotrot_f"].get<int>() == 3);
  CHECK(bubble_audit_3d(3).data["rank_symcurl"].get<int>() == 32);
}

TEST_CASE("trace and product identities") {
  Report r = trace_identity_audit(3, 20, 3);
  CHECK(r.ok());
  CHECK(r.data["max_relative_residual"].size() == 13);
}

TEST_CASE("inter-element continuity") {
  Report r = conformity_audit_3d(3, 2);
  CHECK(r.ok());
}
