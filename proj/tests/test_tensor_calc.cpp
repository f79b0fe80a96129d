#include "divdiv/tensor_calc.hpp"

#include "doctest.h"

#include <random>

using namespace divdiv;

namespace {

int levi(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

// Component c is sin(a_c . x + b_c); derivatives in closed form.
struct TrigField {
  int nc;
  std::vector<Vec3> a;
  std::vector<double> b;

  TrigField(int ncomp, unsigned seed) : nc(ncomp) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int c = 0; c < nc; ++c) {
      a.emplace_back(u(rng), u(rng), u(rng));
      b.push_back(u(rng));
    }
  }
  double v(int c, const Vec3& x) const { return std::sin(a[c].dot(x) + b[c]); }
  double d(int c, int q, const Vec3& x) const { return a[c](q) * std::cos(a[c].dot(x) + b[c]); }
  double dd(int c, int r, int q, const Vec3& x) const { return -a[c](r) * a[c](q) * std::sin(a[c].dot(x) + b[c]); }
  Jet jet(const Vec3& x) const {
    Jet j(nc, 2, 1);
    for (int c = 0; c < nc; ++c) {
      j.value()(c, 0) = v(c, x);
      for (int q = 0; q < 3; ++q) j.grad(q)(c, 0) = d(c, q, x);
      for (int r = 0; r < 3; ++r)
        for (int q = 0; q < 3; ++q) j.hess(r, q)(c, 0) = dd(c, r, q, x);
    }
    return j;
  }
};

const Vec3 kPoint(0.3, -0.7, 0.45);

}  // namespace

TEST_CASE("algebraic matrix operations") {
  Mat3 a;
  a << 1, 2, 3, 4, 5, 6, 7, 8, 10;
  CHECK((sym(a) + skw(a) - a).norm() < 1e-15);
  CHECK(std::abs(tr(dev(a))) < 1e-15);
  CHECK(tr(a) == doctest::Approx(16));
  Vec3 v(1, -2, 0.5), w(0.3, 0.7, -1.1);
  CHECK((mspn(v) * w - v.cross(w)).norm() < 1e-15);
  Vec3 n = Vec3(1, 2, 2) / 3.0;
  CHECK((tangential_projector(n) * n).norm() < 1e-15);
}

TEST_CASE("edge and face frames") {
  Vec3 p(0.1, 0.2, 0.3), q(1.0, -0.5, 0.7), r(0.2, 0.9, -0.4);
  EdgeFrame e = make_edge_frame(p, q);
  CHECK((e.t - (q - p).normalized()).norm() < 1e-14);
  CHECK(std::abs(e.t.dot(e.n1)) < 1e-14);
  CHECK(std::abs(e.t.dot(e.n2)) < 1e-14);
  CHECK(std::abs(e.n1.dot(e.n2)) < 1e-14);
  CHECK(e.n1.norm() == doctest::Approx(1.0));
  FaceFrame f = make_face_frame(p, q, r);
  CHECK(std::abs(f.n.dot(q - p)) < 1e-14);
  CHECK(std::abs(f.n.dot(r - p)) < 1e-14);
  CHECK(std::abs(f.t1.dot(f.n)) < 1e-14);
  CHECK(std::abs(f.t2.dot(f.n)) < 1e-14);
  CHECK(std::abs(f.t1.dot(f.t2)) < 1e-14);
}

TEST_CASE("first and second order operators against index formulas") {
  TrigField tau(9, 1), v(3, 2), p(1, 3);
  const Vec3& x = kPoint;

  Jet c = curl(tau.jet(x));
  Jet sc = sym_curl(tau.jet(x));
  Jet dv = div(tau.jet(x));
  for (int i = 0; i < 3; ++i) {
    double divi = 0;
    for (int j = 0; j < 3; ++j) divi += tau.d(3 * i + j, j, x);
    CHECK(dv.value()(i, 0) == doctest::Approx(divi).epsilon(1e-13));
    for (int j = 0; j < 3; ++j) {
      auto cij = [&](int a, int b) {
        double s = 0;
        for (int m = 0; m < 3; ++m)
          for (int l = 0; l < 3; ++l) s += levi(b, m, l) * tau.d(3 * a + l, m, x);
        return s;
      };
      CHECK(c.value()(3 * i + j, 0) == doctest::Approx(cij(i, j)).epsilon(1e-13));
      CHECK(sc.value()(3 * i + j, 0) == doctest::Approx(0.5 * (cij(i, j) + cij(j, i))).epsilon(1e-13));
    }
  }

  // gradient level of the symcurl jet
  for (int q = 0; q < 3; ++q)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int m = 0; m < 3; ++m)
          for (int l = 0; l < 3; ++l)
            s += 0.5 * levi(j, m, l) * tau.dd(3 * i + l, q, m, x) + 0.5 * levi(i, m, l) * tau.dd(3 * j + l, q, m, x);
        CHECK(sc.grad(q)(3 * i + j, 0) == doctest::Approx(s).epsilon(1e-12));
      }

  double ddv = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ddv += tau.dd(3 * i + j, i, j, x);
  CHECK(div_div(tau.jet(x)).value()(0, 0) == doctest::Approx(ddv).epsilon(1e-13));

  Jet g = dev_grad(v.jet(x));
  double trace = v.d(0, 0, x) + v.d(1, 1, x) + v.d(2, 2, x);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(g.value()(3 * i + j, 0) ==
            doctest::Approx(v.d(i, j, x) - (i == j ? trace / 3 : 0.0)).epsilon(1e-13));

  Jet h = hess_op(p.jet(x));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(h.value()(3 * i + j, 0) == doctest::Approx(p.dd(0, i, j, x)).epsilon(1e-13));
}

TEST_CASE("symcurl of devgrad vanishes pointwise") {
  TrigField v(3, 7);
  Jet s = sym_curl(dev_grad(v.jet(kPoint)));
  CHECK(s.data().norm() < 1e-13);
}

TEST_CASE("operator component counts") {
  CHECK(op_ncomp_out(DiffOp::devgrad, 3) == 9);
  CHECK(op_ncomp_out(DiffOp::symcurl, 9) == 9);
  CHECK(op_ncomp_out(DiffOp::divdiv, 9) == 1);
  CHECK(parse_op("symcurl") == DiffOp::symcurl);
  CHECK(std::string(op_name(DiffOp::divdiv)) == "divdiv");
}

TEST_CASE("surface projections") {
  TrigField v(3, 11);
  Vec3 n = Vec3(0.2, -0.4, 0.9).normalized();
  Jet j = v.jet(kPoint);
  Jet pj = proj_f(j, n);
  Vec3 val(j.value()(0, 0), j.value()(1, 0), j.value()(2, 0));
  Vec3 expect = val - val.dot(n) * n;
  for (int c = 0; c < 3; ++c) CHECK(pj.value()(c, 0) == doctest::Approx(expect(c)).epsilon(1e-13));
  Jet cj = vec_cross_n(j, n);
  Vec3 cr = val.cross(n);
  for (int c = 0; c < 3; ++c) CHECK(cj.value()(c, 0) == doctest::Approx(cr(c)).epsilon(1e-13));
}
