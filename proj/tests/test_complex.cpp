#include "divdiv/complex_asm.hpp"

#include "doctest.h"

#include <random>

using namespace divdiv;

namespace {

// Per-entity DOF counts at k = 3 (vertex, edge, face, cell), read off the
// element functionals.
struct Counts {
  int v, e, f, t;
};
const Counts kV{30, 0, 9, 12};
const Counts kL{32, 10, 12, 44};
const Counts kS{6, 6, 7, 32};
const Counts kQ{0, 0, 0, 4};

long long dim_of(const TetMesh& m, const Counts& c) {
  return 1LL * c.v * m.nv() + 1LL * c.e * m.ne() + 1LL * c.f * m.nf() + 1LL * c.t * m.nt();
}

PolyField random_poly(int degree, int ncomp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  PolyField f = PolyField::zero(
      Simplex::make({Vec3(-0.1, -0.1, -0.1), Vec3(3.2, -0.1, -0.1), Vec3(-0.1, 3.2, -0.1), Vec3(-0.1, -0.1, 3.2)}),
      degree, ncomp);
  for (Index i = 0; i < f.coef.size(); ++i) f.coef.data()[i] = u(rng);
  if (ncomp == 9)
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) f.coef.col(3 * j + i) = f.coef.col(3 * i + j);
  return f;
}

FieldJets jets_of(const PolyField& f) {
  return [f](const Vec3& x, int order) { return f.jet(x, order); };
}

}  // namespace

TEST_CASE("global dimensions") {
  for (const auto& name : {"single_tet", "two_tets", "kuhn_cube(1)", "kuhn_cube(2)"}) {
    CAPTURE(name);
    TetMesh m = load_mesh(name);
    GlobalSpace v = global_space(m, "h1_vec3", 3);
    GlobalSpace l = global_space(m, "hsymcurl_T", 3);
    GlobalSpace s = global_space(m, "hdivdiv_S", 3);
    GlobalSpace q = global_space(m, "dg_scalar", 3);
    CHECK(v.ndofs == dim_of(m, kV));
    CHECK(l.ndofs == dim_of(m, kL));
    CHECK(s.ndofs == dim_of(m, kS));
    CHECK(q.ndofs == dim_of(m, kQ));
    // exact sequence RT -> V -> Lambda -> Sigma -> Q on a contractible domain
    CHECK(v.ndofs - l.ndofs + s.ndofs - q.ndofs == 4);
  }
  TetMesh k1 = kuhn_cube(1);
  CHECK(dim_of(k1, kV) == 474);
  CHECK(dim_of(k1, kL) == 926);
  CHECK(dim_of(k1, kS) == 480);
}

TEST_CASE("complex audit on small meshes") {
  for (const auto& name : {"single_tet", "two_tets"}) {
    Report r = complex_audit(load_mesh(name), 3);
    CHECK(r.ok());
  }
}

TEST_CASE("interpolation reproduces global polynomials") {
  TetMesh m = kuhn_cube(1);
  GlobalSpace s = global_space(m, "hdivdiv_S", 3);
  PolyField e = random_poly(3, 9, 3);
  VectorXd c = interpolate(s, jets_of(e));
  CellQuadrature q(s, 6);
  double err = 0;
  for (int cell = 0; cell < m.nt(); ++cell) {
    MatrixXd vals = q.values(cell, c);
    const auto& pts = q.points(cell);
    for (size_t p = 0; p < pts.size(); ++p) err = std::max(err, (vals.row(p).transpose() - e.value_at(pts[p])).norm());
  }
  CHECK(err < 1e-10);
}

TEST_CASE("interpolation commutes with divdiv and symcurl") {
  TetMesh m = two_tets();
  GlobalSpace l = global_space(m, "hsymcurl_T", 3);
  GlobalSpace s = global_space(m, "hdivdiv_S", 3);
  GlobalSpace q = global_space(m, "dg_scalar", 3);
  SparseOperator dd = assemble_diff(DiffOp::divdiv, s, q);
  SparseOperator sc = assemble_diff(DiffOp::symcurl, l, s);
  CHECK(dd.mismatch < 1e-10);
  CHECK(sc.mismatch < 1e-10);
  PolyField e = random_poly(3, 9, 5);
  PolyField dde = apply_diff(DiffOp::divdiv, e);
  VectorXd lhs = dd.mat * interpolate(s, jets_of(e));
  VectorXd rhs = interpolate(q, jets_of(dde));
  CHECK((lhs - rhs).norm() < 1e-9 * rhs.norm());

  PolyField b = random_poly(4, 9, 6);
  b.coef.col(8) = -b.coef.col(0) - b.coef.col(4);
  PolyField scb = apply_diff(DiffOp::symcurl, b);
  VectorXd l2 = sc.mat * interpolate(l, jets_of(b));
  VectorXd r2 = interpolate(s, jets_of(scb));
  CHECK((l2 - r2).norm() < 1e-9 * r2.norm());
}

TEST_CASE("mass matrix integrates constants") {
  TetMesh m = kuhn_cube(2);
  GlobalSpace q = global_space(m, "dg_scalar", 3);
  VectorXd one = interpolate(q, [](const Vec3&, int order) {
    Jet j(1, order, 1);
    j.value()(0, 0) = 1.0;
    return j;
  });
  SpMat mass = mass_matrix(q);
  CHECK(one.dot(mass * one) == doctest::Approx(1.0).epsilon(1e-13));
}
