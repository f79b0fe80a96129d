#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace divdiv {

using SpMat = Eigen::SparseMatrix<double>;

// Dense rank, nullspace (columns) and row space (rows) by SVD with
// threshold tol * largest singular value.
int numerical_rank(const Eigen::MatrixXd& a, double tol = 1e-10);
Eigen::MatrixXd nullspace(const Eigen::MatrixXd& a, double tol = 1e-10);
Eigen::MatrixXd row_space(const Eigen::MatrixXd& a, double tol = 1e-10);
Eigen::VectorXd singular_values(const Eigen::MatrixXd& a);
// Rank counting singular values above tol * scale (scale > 0 is an external
// reference size, e.g. the norm of the operator producing a).
int rank_scaled(const Eigen::MatrixXd& a, double scale, double tol = 1e-10);

// Sparse rank via QR of the row/column equilibrated matrix; diagonal entries
// of R below tol * max |R_ii| count as zero.
int sparse_rank(const SpMat& a, double tol = 1e-9);
// Rank via dense SVD of the equilibrated matrix (cross-check for small sizes).
int dense_rank_equilibrated(const SpMat& a, double tol = 1e-9);
// Drops entries below 1e-11 * max |entry|, then alternately normalizes rows
// and columns.
SpMat equilibrate(const SpMat& a, int sweeps = 3);

double frobenius(const SpMat& a);

}  // namespace divdiv
