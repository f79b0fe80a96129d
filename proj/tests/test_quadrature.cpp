#include "divdiv/poly.hpp"
#include "divdiv/quadrature.hpp"

#include "doctest.h"

#include <cmath>

using namespace divdiv;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("rules integrate barycentric monomials exactly") {
  // int lambda^alpha = alpha! d! / (|alpha| + d)! times the measure
  for (int dim = 1; dim <= 3; ++dim)
    for (int deg = 0; deg <= 14; ++deg) {
      const QuadRule& q = rule(dim, deg);
      CHECK(q.degree >= deg);
      CHECK(q.weights.sum() == doctest::Approx(reference_measure(dim)).epsilon(1e-14));
      for (const auto& a : multi_indices(dim + 1, deg)) {
        double s = 0;
        for (Index p = 0; p < q.size(); ++p) {
          double v = 1;
          for (int i = 0; i <= dim; ++i) v *= std::pow(q.bary(p, i), a[i]);
          s += q.weights(p) * v;
        }
        double num = factorial(dim);
        for (int i = 0; i <= dim; ++i) num *= factorial(a[i]);
        const double exact = num / factorial(deg + dim) * reference_measure(dim);
        CAPTURE(dim);
        CAPTURE(deg);
        CHECK(s == doctest::Approx(exact).epsilon(1e-12));
      }
    }
}

TEST_CASE("points lie in the simplex") {
  const QuadRule& q = rule(3, 10);
  for (Index p = 0; p < q.size(); ++p) {
    CHECK(q.bary.row(p).sum() == doctest::Approx(1.0));
    CHECK(q.bary.row(p).minCoeff() > 0);
    CHECK(q.weights(p) > 0);
  }
}

TEST_CASE("Gauss-Legendre nodes") {
  VectorXd x, w;
  gauss_jacobi(3, 0, 0, x, w);
  CHECK(w.sum() == doctest::Approx(2.0));
  CHECK(std::abs(x.cwiseAbs().maxCoeff() - std::sqrt(0.6)) < 1e-14);
}

TEST_CASE("reference measures") {
  CHECK(reference_measure(1) == 1.0);
  CHECK(reference_measure(2) == doctest::Approx(0.5));
  CHECK(reference_measure(3) == doctest::Approx(1.0 / 6));
}
