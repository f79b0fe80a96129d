#include "divdiv/linalg.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseQR>

#include <algorithm>
#include <cmath>

namespace divdiv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd singular_values(const MatrixXd& a) {
  if (a.size() == 0) return VectorXd();
  Eigen::BDCSVD<MatrixXd> svd(a);
  return svd.singularValues();
}

namespace {

// Entries below this fraction of the largest entry are roundoff and are
// dropped before scaling, which would otherwise amplify them.
constexpr double kNoiseFloor = 1e-11;

int rank_from(const VectorXd& s, double tol) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

}  // namespace

int numerical_rank(const MatrixXd& a, double tol) { return rank_from(singular_values(a), tol); }

int rank_scaled(const MatrixXd& a, double scale, double tol) {
  VectorXd s = singular_values(a);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++r;
  return r;
}

MatrixXd nullspace(const MatrixXd& a, double tol) {
  if (a.rows() == 0) return MatrixXd::Identity(a.cols(), a.cols());
  Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  int r = rank_from(svd.singularValues(), tol);
  return svd.matrixV().rightCols(a.cols() - r);
}

MatrixXd row_space(const MatrixXd& a, double tol) {
  if (a.rows() == 0) return MatrixXd(0, a.cols());
  Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeThinV);
  int r = rank_from(svd.singularValues(), tol);
  return svd.matrixV().leftCols(r).transpose();
}

SpMat equilibrate(const SpMat& a, int sweeps) {
  SpMat m = a;
  double amax = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
  m.prune(kNoiseFloor * amax, 1.0);
  for (int s = 0; s < sweeps; ++s) {
    VectorXd rn = VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it) rn(it.row()) += it.value() * it.value();
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        if (rn(it.row()) > 0) it.valueRef() /= std::sqrt(rn(it.row()));
    for (int k = 0; k < m.outerSize(); ++k) {
      double cn = 0.0;
      for (SpMat::InnerIterator it(m, k); it; ++it) cn += it.value() * it.value();
      if (cn > 0)
        for (SpMat::InnerIterator it(m, k); it; ++it) it.valueRef() /= std::sqrt(cn);
    }
  }
  return m;
}

int sparse_rank(const SpMat& a, double tol) {
  if (a.nonZeros() == 0) return 0;
  SpMat m = equilibrate(a);
  m.prune(0.0);
  m.makeCompressed();
  Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(tol);
  qr.compute(m);
  if (qr.info() != Eigen::Success) return -1;
  return static_cast<int>(qr.rank());
}

int dense_rank_equilibrated(const SpMat& a, double tol) {
  MatrixXd d = MatrixXd(equilibrate(a));
  return numerical_rank(d, tol);
}

double frobenius(const SpMat& a) { return a.norm(); }

}  // namespace divdiv
