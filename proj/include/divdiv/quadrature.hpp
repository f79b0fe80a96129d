#pragma once

#include <Eigen/Dense>

namespace divdiv {

// Rule on the reference simplex of the given dimension (1 edge, 2 triangle,
// 3 tetrahedron). Points are barycentric coordinates (one row per point),
// weights are in reference-measure units (1, 1/2, 1/6).
struct QuadRule {
  int dim = 0;
  int degree = 0;
  Eigen::MatrixXd bary;
  Eigen::VectorXd weights;
  Eigen::Index size() const { return weights.size(); }
};

const QuadRule& rule(int dim, int degree);

// Gauss-Jacobi nodes/weights on [-1,1] for weight (1-x)^a (1+x)^b.
void gauss_jacobi(int n, double a, double b, Eigen::VectorXd& x, Eigen::VectorXd& w);

double reference_measure(int dim);

}  // namespace divdiv
