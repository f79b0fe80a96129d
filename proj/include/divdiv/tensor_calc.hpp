#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>

namespace divdiv {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Matrix-valued fields are flattened row-major: entry (i,j) has component 3*i+j.
inline int mat_index(int i, int j) { return 3 * i + j; }

Mat3 sym(const Mat3& a);
Mat3 skw(const Mat3& a);
Mat3 dev(const Mat3& a);
double tr(const Mat3& a);
Mat3 mspn(const Vec3& v);
Mat3 tangential_projector(const Vec3& n);

struct EdgeFrame {
  Vec3 t, n1, n2;
};

struct FaceFrame {
  Vec3 n, t1, t2;
  // Boundary edge i is the edge opposite local vertex i of the face.
  std::array<Vec3, 3> n_bdy, t_bdy;
};

// Coordinates are given in ascending global vertex ID order.
EdgeFrame make_edge_frame(const Vec3& a, const Vec3& b);
FaceFrame make_face_frame(const Vec3& x0, const Vec3& x1, const Vec3& x2);

// Batched second-order jet of a field with ncomp Cartesian components.
// Rows: value block [c], gradient block [q*ncomp + c] = d_q f_c,
// Hessian block [(r*3 + q)*ncomp + c] = d_r d_q f_c. One column per field.
// order tracks how many derivative levels are valid.
class Jet {
 public:
  Jet() = default;
  Jet(int ncomp, int order, Index batch);

  int ncomp() const { return ncomp_; }
  int order() const { return order_; }
  Index batch() const { return data_.cols(); }

  auto value() { return data_.topRows(ncomp_); }
  auto value() const { return data_.topRows(ncomp_); }
  auto grad(int q) { return data_.middleRows(ncomp_ * (1 + q), ncomp_); }
  auto grad(int q) const { return data_.middleRows(ncomp_ * (1 + q), ncomp_); }
  auto hess(int r, int q) { return data_.middleRows(ncomp_ * (4 + 3 * r + q), ncomp_); }
  auto hess(int r, int q) const { return data_.middleRows(ncomp_ * (4 + 3 * r + q), ncomp_); }

  MatrixXd& data() { return data_; }
  const MatrixXd& data() const { return data_; }

  static int levels_rows(int ncomp, int order);

 private:
  int ncomp_ = 0;
  int order_ = 0;
  MatrixXd data_;
};

// Pointwise constant-coefficient linear map applied at every derivative level.
Jet linear(const MatrixXd& l, const Jet& f);
// Jet of the gradient; component q*ncomp + c is d_q f_c.
Jet gradient(const Jet& f);
Jet directional(const Jet& f, const Vec3& d);
Jet add(const Jet& a, const Jet& b, double sb = 1.0);

// Linear maps on flattened components.
MatrixXd lin_sym();
MatrixXd lin_dev();
MatrixXd lin_transpose();
MatrixXd lin_trace();
MatrixXd lin_mat_vec(const Vec3& n);      // A -> A n
MatrixXd lin_mat_t_vec(const Vec3& n);    // A -> A^T n
MatrixXd lin_vec_dot(const Vec3& n);      // v -> v.n
MatrixXd lin_left_mul(const Mat3& m);     // A -> m A
MatrixXd lin_right_mul(const Mat3& m);    // A -> A m
MatrixXd lin_vec_mul(const Mat3& m);      // v -> m v
MatrixXd lin_bilinear(const Vec3& a, const Vec3& b);  // A -> a^T A b

// Differential operators. Gradient of a vector field is (grad v)_{ij} = d_j v_i;
// curl, div, rot_f, div_f act row-wise on matrix fields. Surface operators use
// the plane with unit normal n.
enum class DiffOp {
  grad, devgrad, symcurl, divdiv, curl, div, hess,
  grad_f, curl_f, rot_f, div_f, eps_f, rotrot_f
};

// Every operator is a constant linear map applied to the order-th gradient
// (component index of the m-th gradient: q_m*...*ncomp + c).
struct OpSpec {
  int order = 1;
  int ncomp_in = 1;
  MatrixXd map;
};

OpSpec op_spec(DiffOp op, int ncomp_in, const Vec3& n = Vec3::UnitZ());
int op_ncomp_out(DiffOp op, int ncomp_in);
const char* op_name(DiffOp op);
DiffOp parse_op(const std::string& name);

Jet apply_op(DiffOp op, const Jet& f, const Vec3& n = Vec3::UnitZ());

Jet grad_op(const Jet& f);
Jet dev_grad(const Jet& v);
Jet curl(const Jet& f);
Jet div(const Jet& f);
Jet sym_curl(const Jet& tau);
Jet div_div(const Jet& tau);
Jet hess_op(const Jet& p);

enum class SurfaceOp { proj_f, proj_f_sym, grad_f, curl_f, rot_f, div_f, eps_f };
Jet surface_op(SurfaceOp op, const Jet& f, const Vec3& n);
Jet proj_f(const Jet& f, const Vec3& n);       // vector: P v ; matrix: A P
Jet proj_f_sym(const Jet& f, const Vec3& n);   // sym(A P)
Jet grad_f(const Jet& f, const Vec3& n);
Jet curl_f(const Jet& f, const Vec3& n);
Jet rot_f(const Jet& f, const Vec3& n);
Jet div_f(const Jet& f, const Vec3& n);
Jet eps_f(const Jet& v, const Vec3& n);
Jet cross_n_right(const Jet& tau, const Vec3& n);  // tau x n, column-wise
Jet cross_n_left(const Jet& tau, const Vec3& n);   // n x tau, row-wise
Jet vec_cross_n(const Jet& v, const Vec3& n);      // v x n

Mat3 to_mat3(const Eigen::Ref<const VectorXd>& c);
VectorXd from_mat3(const Mat3& m);

}  // namespace divdiv
