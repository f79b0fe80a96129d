#include "divdiv/poly.hpp"

#include "doctest.h"
#include "exact_oracle.hpp"

#include <random>

using namespace divdiv;

namespace {

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

PolyField random_field(const Simplex& s, int degree, int ncomp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  PolyField f = PolyField::zero(s, degree, ncomp);
  for (Index i = 0; i < f.coef.size(); ++i) f.coef.data()[i] = u(rng);
  return f;
}

std::vector<exact::Field> images(const std::vector<exact::Field>& b, exact::Field (*op)(const exact::Field&)) {
  std::vector<exact::Field> out;
  for (const auto& f : b) out.push_back(op(f));
  return out;
}

}  // namespace

TEST_CASE("exact ranks of the polynomial complex match the library audit") {
  for (int k : {3, 4}) {
    CAPTURE(k);
    const int r_dg = exact::rank(images(exact::basis(k + 2, "R3"), exact::devgrad));
    const int r_sc = exact::rank(images(exact::basis(k + 1, "T"), exact::symcurl));
    const int r_dd = exact::rank(images(exact::basis(k, "S"), exact::divdiv));
    // kernel of devgrad on P_{k+2}(R^3) is RT of dimension 4
    CHECK(r_dg == 3 * binom(k + 5, 3) - 4);
    CHECK(r_dg + r_sc == 8 * binom(k + 4, 3));
    CHECK(r_sc + r_dd == 6 * binom(k + 3, 3));
    CHECK(r_dd == binom(k + 1, 3));

    Report rep = poly_complex_audit(3, k);
    CHECK(rep.ok());
    const auto& ranks = rep.data["3d"];
    CHECK(ranks[0]["rank"].get<int>() == r_dg);
    CHECK(ranks[1]["rank"].get<int>() == r_sc);
    CHECK(ranks[2]["rank"].get<int>() == r_dd);
  }
}

TEST_CASE("exact compositions vanish") {
  for (const auto& v : exact::basis(4, "R3")) CHECK(exact::is_zero(exact::symcurl(exact::devgrad(v))));
  for (const auto& t : exact::basis(4, "T")) CHECK(exact::is_zero(exact::divdiv(exact::symcurl(t))));
}

TEST_CASE("Bernstein basis partition of unity") {
  for (int n : {0, 1, 3, 6}) {
    Bary lam(0.1, 0.2, 0.3, 0.4);
    CHECK(bernstein_values(4, n, lam).sum() == doctest::Approx(1.0));
    CHECK(bernstein_values(4, n, lam).size() == binom(n + 3, 3));
  }
}

TEST_CASE("integration of monomials on the reference tetrahedron") {
  Simplex s = reference_simplex(3);
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 2; ++b)
      for (int c = 0; c <= 2; ++c) {
        const int deg = a + b + c;
        PolyField f = interpolate_poly(s, deg, 1, [&](const Vec3& x) {
          VectorXd v(1);
          v(0) = std::pow(x(0), a) * std::pow(x(1), b) * std::pow(x(2), c);
          return v;
        });
        const double exact = factorial(a) * factorial(b) * factorial(c) / factorial(deg + 3);
        CHECK(integrate(f)(0) == doctest::Approx(exact).epsilon(1e-12));
      }
}

TEST_CASE("polynomial compositions on a random cell") {
  std::mt19937_64 rng(5);
  Simplex s = random_simplex(3, rng);
  PolyField v = random_field(s, 5, 3, 1);
  PolyField t = random_field(s, 4, 9, 2);
  t.coef.col(8) = -t.coef.col(0) - t.coef.col(4);
  PolyField a = apply_diff(DiffOp::symcurl, apply_diff(DiffOp::devgrad, v));
  PolyField b = apply_diff(DiffOp::divdiv, apply_diff(DiffOp::symcurl, t));
  CHECK(a.coef.norm() < 1e-8 * v.coef.norm());
  CHECK(b.coef.norm() < 1e-8 * t.coef.norm());
}

TEST_CASE("degree elevation and restriction preserve values") {
  std::mt19937_64 rng(9);
  Simplex s = random_simplex(3, rng);
  PolyField f = random_field(s, 3, 2, 4);
  PolyField g = elevate(f, 5);
  Bary lam(0.15, 0.25, 0.35, 0.25);
  CHECK((f.value(lam) - g.value(lam)).norm() < 1e-12);
  Simplex face = Simplex::make({s.x[1], s.x[2], s.x[3]});
  PolyField r = restrict_to(f, face);
  Vec3 p = face.point(Bary(0.2, 0.3, 0.5, 0));
  CHECK((r.value_at(p) - f.value_at(p)).norm() < 1e-12);
}

TEST_CASE("space dimension formulas") {
  for (int k = 0; k <= 5; ++k) {
    CHECK(space_dim_formula(3, k, Range::scalar) == binom(k + 3, 3));
    CHECK(space_dim_formula(3, k, Range::S) == 6 * binom(k + 3, 3));
    CHECK(space_dim_formula(3, k, Range::T) == 8 * binom(k + 3, 3));
    CHECK(space_dim_formula(2, k, Range::S2) == 3 * binom(k + 2, 2));
  }
}
