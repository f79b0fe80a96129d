#include "divdiv/tensor_calc.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace divdiv {

Mat3 sym(const Mat3& a) { return 0.5 * (a + a.transpose()); }
Mat3 skw(const Mat3& a) { return 0.5 * (a - a.transpose()); }
double tr(const Mat3& a) { return a.trace(); }
Mat3 dev(const Mat3& a) { return a - (a.trace() / 3.0) * Mat3::Identity(); }

Mat3 mspn(const Vec3& v) {
  Mat3 m;
  m << 0, -v(2), v(1),
       v(2), 0, -v(0),
       -v(1), v(0), 0;
  return m;
}

Mat3 tangential_projector(const Vec3& n) { return Mat3::Identity() - n * n.transpose(); }

Mat3 to_mat3(const Eigen::Ref<const VectorXd>& c) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = c(mat_index(i, j));
  return m;
}

VectorXd from_mat3(const Mat3& m) {
  VectorXd c(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(mat_index(i, j)) = m(i, j);
  return c;
}

EdgeFrame make_edge_frame(const Vec3& a, const Vec3& b) {
  Vec3 d = b - a;
  double len = d.norm();
  if (!(len > 0.0)) throw std::invalid_argument("degenerate edge (zero length)");
  EdgeFrame fr;
  fr.t = d / len;
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(fr.t(i)) < std::abs(fr.t(axis))) axis = i;
  Vec3 e = Vec3::Unit(axis);
  Vec3 r = e - e.dot(fr.t) * fr.t;
  fr.n1 = r / r.norm();
  fr.n2 = fr.t.cross(fr.n1);
  return fr;
}

FaceFrame make_face_frame(const Vec3& x0, const Vec3& x1, const Vec3& x2) {
  Vec3 c = (x1 - x0).cross(x2 - x0);
  double area2 = c.norm();
  double scale = (x1 - x0).norm() * (x2 - x0).norm();
  if (!(area2 > 1e-14 * scale) || !(scale > 0.0))
    throw std::invalid_argument("degenerate face (zero area)");
  FaceFrame fr;
  fr.n = c / area2;
  fr.t1 = (x1 - x0).normalized();
  fr.t2 = fr.n.cross(fr.t1);
  const std::array<Vec3, 3> x{x0, x1, x2};
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = x[(i + 1) % 3];
    const Vec3& b = x[(i + 2) % 3];
    Vec3 t = (b - a).normalized();
    Vec3 nb = t.cross(fr.n);
    if (nb.dot(a - x[i]) < 0) nb = -nb;
    fr.n_bdy[i] = nb;
    fr.t_bdy[i] = fr.n.cross(nb);
  }
  return fr;
}

int Jet::levels_rows(int ncomp, int order) {
  static const int blocks[3] = {1, 4, 13};
  return ncomp * blocks[order];
}

Jet::Jet(int ncomp, int order, Index batch)
    : ncomp_(ncomp), order_(order), data_(MatrixXd::Zero(levels_rows(ncomp, order), batch)) {}

Jet linear(const MatrixXd& l, const Jet& f) {
  if (l.cols() != f.ncomp()) throw std::invalid_argument("linear: component mismatch");
  const int nout = static_cast<int>(l.rows());
  Jet out(nout, f.order(), f.batch());
  const int nblocks = Jet::levels_rows(1, f.order());
  for (int b = 0; b < nblocks; ++b)
    out.data().middleRows(b * nout, nout).noalias() = l * f.data().middleRows(b * f.ncomp(), f.ncomp());
  return out;
}

Jet gradient(const Jet& f) {
  if (f.order() < 1) throw std::invalid_argument("gradient: jet order exhausted");
  Jet out(3 * f.ncomp(), f.order() - 1, f.batch());
  out.data() = f.data().middleRows(f.ncomp(), out.data().rows());
  return out;
}

Jet add(const Jet& a, const Jet& b, double sb) {
  if (a.ncomp() != b.ncomp() || a.batch() != b.batch())
    throw std::invalid_argument("add: shape mismatch");
  int order = std::min(a.order(), b.order());
  Jet out(a.ncomp(), order, a.batch());
  Index rows = out.data().rows();
  out.data() = a.data().topRows(rows) + sb * b.data().topRows(rows);
  return out;
}

Jet directional(const Jet& f, const Vec3& d) {
  const int nc = f.ncomp();
  MatrixXd l = MatrixXd::Zero(nc, 3 * nc);
  for (int q = 0; q < 3; ++q) l.block(0, q * nc, nc, nc) = d(q) * MatrixXd::Identity(nc, nc);
  return linear(l, gradient(f));
}

namespace {

MatrixXd mat_map(const std::function<Mat3(const Mat3&)>& fn) {
  MatrixXd l(9, 9);
  for (int c = 0; c < 9; ++c) {
    Mat3 e = Mat3::Zero();
    e(c / 3, c % 3) = 1.0;
    l.col(c) = from_mat3(fn(e));
  }
  return l;
}

double levi(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0.0;
  return ((i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0)) ? 1.0 : -1.0;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

MatrixXd lin_sym() { return mat_map([](const Mat3& a) { return sym(a); }); }
MatrixXd lin_dev() { return mat_map([](const Mat3& a) { return dev(a); }); }
MatrixXd lin_transpose() { return mat_map([](const Mat3& a) { return Mat3(a.transpose()); }); }
MatrixXd lin_left_mul(const Mat3& m) { return mat_map([&](const Mat3& a) { return Mat3(m * a); }); }
MatrixXd lin_right_mul(const Mat3& m) { return mat_map([&](const Mat3& a) { return Mat3(a * m); }); }

MatrixXd lin_trace() {
  MatrixXd l = MatrixXd::Zero(1, 9);
  for (int i = 0; i < 3; ++i) l(0, mat_index(i, i)) = 1.0;
  return l;
}

MatrixXd lin_mat_vec(const Vec3& n) {
  MatrixXd l = MatrixXd::Zero(3, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) l(i, mat_index(i, j)) = n(j);
  return l;
}

MatrixXd lin_mat_t_vec(const Vec3& n) {
  MatrixXd l = MatrixXd::Zero(3, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) l(j, mat_index(i, j)) = n(i);
  return l;
}

MatrixXd lin_vec_dot(const Vec3& n) { return n.transpose(); }
MatrixXd lin_vec_mul(const Mat3& m) { return m; }

MatrixXd lin_bilinear(const Vec3& a, const Vec3& b) {
  MatrixXd l(1, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) l(0, mat_index(i, j)) = a(i) * b(j);
  return l;
}

namespace {

MatrixXd grad_perm() {
  MatrixXd l = MatrixXd::Zero(9, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) l(mat_index(i, j), j * 3 + i) = 1.0;
  return l;
}

MatrixXd curl_map(int nc) {
  if (nc == 3) {
    MatrixXd l = MatrixXd::Zero(3, 9);
    for (int p = 0; p < 3; ++p)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) l(p, j * 3 + k) += levi(p, j, k);
    return l;
  }
  require(nc == 9, "curl: vector or matrix field expected");
  MatrixXd l = MatrixXd::Zero(9, 27);
  for (int i = 0; i < 3; ++i)
    for (int p = 0; p < 3; ++p)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) l(mat_index(i, p), j * 9 + mat_index(i, k)) += levi(p, j, k);
  return l;
}

// Contracts gradient direction with the column index: out_i = sum_{k,j} m_kj d_j A_ik.
MatrixXd contract_map(int nc, const Mat3& m) {
  if (nc == 3) {
    MatrixXd l = MatrixXd::Zero(1, 9);
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) l(0, j * 3 + k) = m(k, j);
    return l;
  }
  require(nc == 9, "div: vector or matrix field expected");
  MatrixXd l = MatrixXd::Zero(3, 27);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) l(i, j * 9 + mat_index(i, k)) = m(k, j);
  return l;
}

}  // namespace

int op_ncomp_out(DiffOp op, int nc) {
  switch (op) {
    case DiffOp::grad: return nc == 1 ? 3 : 9;
    case DiffOp::devgrad: return 9;
    case DiffOp::symcurl: return 9;
    case DiffOp::divdiv: return 1;
    case DiffOp::curl: return nc;
    case DiffOp::div: return nc / 3;
    case DiffOp::hess: return 9;
    case DiffOp::grad_f: return nc == 1 ? 3 : 9;
    case DiffOp::curl_f: return nc == 1 ? 3 : 9;
    case DiffOp::rot_f: return nc / 3;
    case DiffOp::div_f: return nc / 3;
    case DiffOp::eps_f: return 9;
    case DiffOp::rotrot_f: return 1;
  }
  return 0;
}

const char* op_name(DiffOp op) {
  switch (op) {
    case DiffOp::grad: return "grad";
    case DiffOp::devgrad: return "devgrad";
    case DiffOp::symcurl: return "symcurl";
    case DiffOp::divdiv: return "divdiv";
    case DiffOp::curl: return "curl";
    case DiffOp::div: return "div";
    case DiffOp::hess: return "hess";
    case DiffOp::grad_f: return "grad_f";
    case DiffOp::curl_f: return "curl_f";
    case DiffOp::rot_f: return "rot_f";
    case DiffOp::div_f: return "div_f";
    case DiffOp::eps_f: return "eps_f";
    case DiffOp::rotrot_f: return "rotrot_f";
  }
  return "?";
}

DiffOp parse_op(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(DiffOp::rotrot_f); ++i)
    if (name == op_name(static_cast<DiffOp>(i))) return static_cast<DiffOp>(i);
  throw std::invalid_argument("unknown operator: " + name);
}

OpSpec op_spec(DiffOp op, int nc, const Vec3& n) {
  OpSpec s;
  s.ncomp_in = nc;
  const Mat3 pr = tangential_projector(n);
  switch (op) {
    case DiffOp::grad:
      require(nc == 1 || nc == 3, "grad: scalar or vector field expected");
      s.map = nc == 1 ? MatrixXd(MatrixXd::Identity(3, 3)) : grad_perm();
      break;
    case DiffOp::devgrad:
      require(nc == 3, "devgrad: vector field expected");
      s.map = lin_dev() * grad_perm();
      break;
    case DiffOp::symcurl:
      require(nc == 9, "symcurl: matrix field expected");
      s.map = lin_sym() * curl_map(9);
      break;
    case DiffOp::divdiv: {
      require(nc == 9, "divdiv: matrix field expected");
      s.order = 2;
      s.map = MatrixXd::Zero(1, 81);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s.map(0, i * 27 + j * 9 + mat_index(i, j)) = 1.0;
      break;
    }
    case DiffOp::curl:
      s.map = curl_map(nc);
      break;
    case DiffOp::div:
      s.map = contract_map(nc, Mat3::Identity());
      break;
    case DiffOp::hess:
      require(nc == 1, "hess: scalar field expected");
      s.order = 2;
      s.map = MatrixXd::Identity(9, 9);
      break;
    case DiffOp::grad_f:
      require(nc == 1 || nc == 3, "grad_f: scalar or vector field expected");
      s.map = nc == 1 ? MatrixXd(pr) : MatrixXd(lin_right_mul(pr) * grad_perm());
      break;
    case DiffOp::curl_f:
      require(nc == 1 || nc == 3, "curl_f: scalar or vector field expected");
      s.map = nc == 1 ? MatrixXd(mspn(n)) : MatrixXd(lin_right_mul(Mat3(mspn(n).transpose())) * grad_perm());
      break;
    case DiffOp::rot_f:
      require(nc == 3 || nc == 9, "rot_f: vector or matrix field expected");
      s.map = (nc == 3 ? lin_vec_dot(n) : lin_mat_vec(n)) * curl_map(nc);
      break;
    case DiffOp::div_f:
      s.map = contract_map(nc, pr);
      break;
    case DiffOp::eps_f:
      require(nc == 3, "eps_f: vector field expected");
      s.map = lin_sym() * lin_left_mul(pr) * lin_right_mul(pr) * grad_perm();
      break;
    case DiffOp::rotrot_f: {
      require(nc == 9, "rotrot_f: matrix field expected");
      // rot_f of the row-wise rot_f: second-gradient index r*27 + q*9 + c.
      s.order = 2;
      MatrixXd inner = lin_mat_vec(n) * curl_map(9);  // 3 x 27 on first gradient
      MatrixXd outer = lin_vec_dot(n) * curl_map(3);  // 1 x 9 on gradient of a vector
      s.map = MatrixXd::Zero(1, 81);
      for (int r = 0; r < 3; ++r)
        for (int i = 0; i < 3; ++i)
          s.map.block(0, r * 27, 1, 27) += outer(0, r * 3 + i) * inner.row(i);
      break;
    }
  }
  return s;
}

Jet apply_op(DiffOp op, const Jet& f, const Vec3& n) {
  OpSpec s = op_spec(op, f.ncomp(), n);
  Jet g = gradient(f);
  if (s.order == 2) g = gradient(g);
  return linear(s.map, g);
}

Jet grad_op(const Jet& f) { return apply_op(DiffOp::grad, f); }
Jet dev_grad(const Jet& v) { return apply_op(DiffOp::devgrad, v); }
Jet curl(const Jet& f) { return apply_op(DiffOp::curl, f); }
Jet div(const Jet& f) { return apply_op(DiffOp::div, f); }
Jet sym_curl(const Jet& tau) { return apply_op(DiffOp::symcurl, tau); }
Jet div_div(const Jet& tau) { return apply_op(DiffOp::divdiv, tau); }
Jet hess_op(const Jet& p) { return apply_op(DiffOp::hess, p); }

Jet proj_f(const Jet& f, const Vec3& n) {
  Mat3 pr = tangential_projector(n);
  if (f.ncomp() == 3) return linear(pr, f);
  require(f.ncomp() == 9, "proj_f: vector or matrix field expected");
  return linear(lin_right_mul(pr), f);
}

Jet proj_f_sym(const Jet& f, const Vec3& n) {
  require(f.ncomp() == 9, "proj_f_sym: matrix field expected");
  return linear(lin_sym(), proj_f(f, n));
}

Jet grad_f(const Jet& f, const Vec3& n) { return apply_op(DiffOp::grad_f, f, n); }
Jet curl_f(const Jet& f, const Vec3& n) { return apply_op(DiffOp::curl_f, f, n); }
Jet rot_f(const Jet& f, const Vec3& n) { return apply_op(DiffOp::rot_f, f, n); }
Jet div_f(const Jet& f, const Vec3& n) { return apply_op(DiffOp::div_f, f, n); }
Jet eps_f(const Jet& v, const Vec3& n) { return apply_op(DiffOp::eps_f, v, n); }

Jet surface_op(SurfaceOp op, const Jet& f, const Vec3& n) {
  switch (op) {
    case SurfaceOp::proj_f: return proj_f(f, n);
    case SurfaceOp::proj_f_sym: return proj_f_sym(f, n);
    case SurfaceOp::grad_f: return grad_f(f, n);
    case SurfaceOp::curl_f: return curl_f(f, n);
    case SurfaceOp::rot_f: return rot_f(f, n);
    case SurfaceOp::div_f: return div_f(f, n);
    case SurfaceOp::eps_f: return eps_f(f, n);
  }
  throw std::invalid_argument("unknown surface operator");
}

Jet cross_n_right(const Jet& tau, const Vec3& n) {
  require(tau.ncomp() == 9, "tau x n: matrix field expected");
  return linear(lin_left_mul(Mat3(-mspn(n))), tau);
}

Jet cross_n_left(const Jet& tau, const Vec3& n) {
  require(tau.ncomp() == 9, "n x tau: matrix field expected");
  return linear(lin_right_mul(Mat3(-mspn(n))), tau);
}

Jet vec_cross_n(const Jet& v, const Vec3& n) {
  require(v.ncomp() == 3, "v x n: vector field expected");
  return linear(Mat3(-mspn(n)), v);
}

}  // namespace divdiv
