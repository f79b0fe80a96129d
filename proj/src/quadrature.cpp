#include "divdiv/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace divdiv {

double reference_measure(int dim) {
  switch (dim) {
    case 1: return 1.0;
    case 2: return 0.5;
    case 3: return 1.0 / 6.0;
  }
  throw std::invalid_argument("reference_measure: dim must be 1, 2 or 3");
}

void gauss_jacobi(int n, double a, double b, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: n >= 1 required");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 2.0 * i + a + b;
    jac(i, i) = (i == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (i + 1 < n) {
      double k = i + 1.0;
      double t = 2.0 * k + a + b;
      double beta = 4.0 * k * (k + a) * (k + b) * (k + a + b) / (t * t * (t + 1.0) * (t - 1.0));
      jac(i, i + 1) = jac(i + 1, i) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
               std::tgamma(a + b + 2.0);
  x = es.eigenvalues();
  w.resize(n);
  for (int i = 0; i < n; ++i) w(i) = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
}

namespace {

// Nodes/weights on [0,1] for weight (1-u)^a.
void collapsed_1d(int n, int a, Eigen::VectorXd& u, Eigen::VectorXd& w) {
  Eigen::VectorXd x;
  gauss_jacobi(n, a, 0.0, x, w);
  u = 0.5 * (x.array() + 1.0);
  w /= std::pow(2.0, a + 1);
}

QuadRule build(int dim, int degree) {
  QuadRule r;
  r.dim = dim;
  r.degree = degree;
  int n = degree / 2 + 1;
  if (dim == 1) {
    Eigen::VectorXd u, w;
    collapsed_1d(n, 0, u, w);
    r.bary.resize(n, 2);
    r.weights = w;
    for (int i = 0; i < n; ++i) r.bary.row(i) << 1.0 - u(i), u(i);
  } else if (dim == 2) {
    Eigen::VectorXd u, wu, v, wv;
    collapsed_1d(n, 1, u, wu);
    collapsed_1d(n, 0, v, wv);
    r.bary.resize(n * n, 3);
    r.weights.resize(n * n);
    int p = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j, ++p) {
        double x = u(i), y = v(j) * (1.0 - u(i));
        r.bary.row(p) << 1.0 - x - y, x, y;
        r.weights(p) = wu(i) * wv(j);
      }
  } else if (dim == 3) {
    Eigen::VectorXd u, wu, v, wv, s, ws;
    collapsed_1d(n, 2, u, wu);
    collapsed_1d(n, 1, v, wv);
    collapsed_1d(n, 0, s, ws);
    r.bary.resize(n * n * n, 4);
    r.weights.resize(n * n * n);
    int p = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l, ++p) {
          double x = u(i), y = v(j) * (1.0 - u(i)), z = s(l) * (1.0 - u(i)) * (1.0 - v(j));
          r.bary.row(p) << 1.0 - x - y - z, x, y, z;
          r.weights(p) = wu(i) * wv(j) * ws(l);
        }
  } else {
    throw std::invalid_argument("rule: dim must be 1, 2 or 3");
  }
  return r;
}

}  // namespace

const QuadRule& rule(int dim, int degree) {
  if (degree < 0 || degree > 40) throw std::invalid_argument("rule: unsupported degree");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<QuadRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{dim, degree}];
  if (!slot) slot = std::make_unique<QuadRule>(build(dim, degree));
  return *slot;
}

}  // namespace divdiv
