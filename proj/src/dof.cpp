#include "divdiv/dof.hpp"

#include "divdiv/linalg.hpp"
#include "divdiv/quadrature.hpp"

#include <stdexcept>

namespace divdiv {

const char* attach_name(Attach a) {
  switch (a) {
    case Attach::vertex: return "vertex";
    case Attach::edge: return "edge";
    case Attach::face: return "face";
    case Attach::interior: return "interior";
  }
  return "?";
}

MatrixXd eval_dofs(const std::vector<DofBlock>& blocks, const FieldJets& fields) {
  int total = 0;
  for (const auto& b : blocks) total += b.ndofs();
  MatrixXd out;
  int off = 0;
  for (const auto& b : blocks) {
    for (size_t p = 0; p < b.points.size(); ++p) {
      Jet j = fields(b.points[p], b.order);
      MatrixXd o = b.trace(j);
      if (o.rows() != b.m) throw std::logic_error("dof block " + b.label + ": trace size mismatch");
      if (out.size() == 0) out = MatrixXd::Zero(total, o.cols());
      out.middleRows(off, b.ndofs()).noalias() += b.weights(p) * (b.tests.middleCols(p * b.m, b.m) * o);
    }
    off += b.ndofs();
  }
  return out;
}

int FiniteElement::ndofs() const {
  int n = 0;
  for (const auto& b : blocks) n += b.ndofs();
  return n;
}

int FiniteElement::count(Attach a) const {
  int n = 0;
  for (const auto& b : blocks)
    if (b.attach == a) n += b.ndofs();
  return n;
}

int FiniteElement::count(Attach a, int entity) const {
  int n = 0;
  for (const auto& b : blocks)
    if (b.attach == a && b.entity == entity) n += b.ndofs();
  return n;
}

double FiniteElement::condition_ratio() const {
  VectorXd s = singular_values(vandermonde);
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

FieldJets FiniteElement::shape_jets() const {
  return [s = shape](const Vec3& x, int order) { return s.jets(x, order); };
}

Jet FiniteElement::nodal_jets(const Vec3& p, int order) const {
  Jet j = shape.jets(p, order);
  j.data() = j.data() * nodal;
  return j;
}

void finalize(FiniteElement& e) {
  e.vandermonde = eval_dofs(e.blocks, e.shape_jets());
  if (e.vandermonde.rows() != e.vandermonde.cols())
    throw std::logic_error(e.family + ": DOF count " + std::to_string(e.vandermonde.rows()) +
                           " differs from shape dimension " + std::to_string(e.vandermonde.cols()));
  e.nodal = e.vandermonde.fullPivLu().inverse();
}

DofBlock point_block(std::string label, Attach a, int entity, const Vec3& x, int order, int m, TraceFn trace) {
  DofBlock b;
  b.label = std::move(label);
  b.attach = a;
  b.entity = entity;
  b.order = order;
  b.m = m;
  b.trace = std::move(trace);
  b.points = {x};
  b.weights = VectorXd::Ones(1);
  b.tests = MatrixXd::Identity(m, m);
  return b;
}

DofBlock moment_block(std::string label, Attach a, int entity, const Simplex& where, int qdeg, int order, int m,
                      TraceFn trace, const std::vector<PolyField>& tests) {
  DofBlock b;
  b.label = std::move(label);
  b.attach = a;
  b.entity = entity;
  b.order = order;
  b.m = m;
  b.trace = std::move(trace);
  const QuadRule& q = rule(where.dim, qdeg);
  const double scale = where.measure / reference_measure(where.dim);
  b.weights = q.weights * scale;
  b.tests = MatrixXd::Zero(tests.size(), q.size() * m);
  for (Index p = 0; p < q.size(); ++p) {
    Bary lam = Bary::Zero();
    lam.head(where.nvert()) = q.bary.row(p).transpose();
    b.points.push_back(where.point(lam));
    for (size_t i = 0; i < tests.size(); ++i) {
      if (tests[i].ncomp != m) throw std::logic_error("moment block " + b.label + ": test component mismatch");
      b.tests.block(i, p * m, 1, m) = tests[i].value(lam).transpose();
    }
  }
  return b;
}

std::vector<PolyField> componentwise(const PolySpace& scalar, int m, const std::vector<int>& comps) {
  std::vector<PolyField> out;
  for (int c : comps)
    for (int i = 0; i < scalar.dim(); ++i) {
      PolyField s = scalar.member(i);
      PolyField f = PolyField::zero(s.cell, s.degree, m);
      f.coef.col(c) = s.coef.col(0);
      out.push_back(f);
    }
  return out;
}

std::vector<PolyField> members(const PolySpace& p) {
  std::vector<PolyField> out;
  for (int i = 0; i < p.dim(); ++i) out.push_back(p.member(i));
  return out;
}

MatrixXd values(const Jet& j) { return j.value(); }

MatrixXd stack(const std::vector<MatrixXd>& parts) {
  Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  MatrixXd out(rows, parts.empty() ? 0 : parts[0].cols());
  Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p;
    r += p.rows();
  }
  return out;
}

TraceFn linear_trace(const MatrixXd& rows) {
  return [rows](const Jet& j) -> MatrixXd { return rows * j.data().topRows(rows.cols()); };
}

MatrixXd jet_value(int nc, int order, const VectorXd& w) {
  MatrixXd r = MatrixXd::Zero(1, Jet::levels_rows(nc, order));
  r.block(0, 0, 1, nc) = w.transpose();
  return r;
}

MatrixXd jet_deriv(int nc, int order, const VectorXd& w, const Vec3& d) {
  if (order < 1) throw std::logic_error("jet_deriv: order >= 1 required");
  MatrixXd r = MatrixXd::Zero(1, Jet::levels_rows(nc, order));
  for (int q = 0; q < 3; ++q) r.block(0, nc * (1 + q), 1, nc) = d(q) * w.transpose();
  return r;
}

MatrixXd jet_deriv2(int nc, int order, const VectorXd& w, const Vec3& a, const Vec3& b) {
  if (order < 2) throw std::logic_error("jet_deriv2: order >= 2 required");
  MatrixXd r = MatrixXd::Zero(1, Jet::levels_rows(nc, order));
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) r.block(0, nc * (4 + 3 * p + q), 1, nc) = a(p) * b(q) * w.transpose();
  return r;
}

MatrixXd jet_op(int nc, int order, DiffOp op, const Vec3& n, const MatrixXd& post) {
  OpSpec s = op_spec(op, nc, n);
  if (order < s.order) throw std::logic_error(std::string("jet_op: order too low for ") + op_name(op));
  MatrixXd r = MatrixXd::Zero(post.rows(), Jet::levels_rows(nc, order));
  const int off = s.order == 1 ? nc : 4 * nc;
  r.middleCols(off, s.map.cols()) = post * s.map;
  return r;
}

FieldJets poly_fields(std::vector<PolyField> fields) {
  return [f = std::move(fields)](const Vec3& x, int order) {
    if (f.empty()) return Jet(1, order, 0);
    Jet out(f[0].ncomp, order, static_cast<Index>(f.size()));
    for (size_t i = 0; i < f.size(); ++i) out.data().col(i) = f[i].jet(x, order).data().col(0);
    return out;
  };
}

}  // namespace divdiv
