#include "divdiv/complex_asm.hpp"

#include "divdiv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace divdiv {

namespace {

int attach_index(Attach a) { return static_cast<int>(a); }

}  // namespace

GlobalSpace global_space(const TetMesh& mesh, const std::string& family, int k) {
  GlobalSpace s;
  s.mesh = &mesh;
  s.family = family;
  s.k = k;
  std::map<std::vector<int>, int> edge_id, face_id;
  for (int e = 0; e < mesh.ne(); ++e) edge_id[{mesh.edges[e][0], mesh.edges[e][1]}] = e;
  for (int f = 0; f < mesh.nf(); ++f) face_id[{mesh.faces[f][0], mesh.faces[f][1], mesh.faces[f][2]}] = f;

  for (int c = 0; c < mesh.nt(); ++c) {
    const auto& v = mesh.cells[c];
    s.elems.push_back(element_3d(family, k, mesh.cell_simplex(c), {v.begin(), v.end()}));
  }
  const FiniteElement& e0 = s.elems[0];
  const std::array<int, 4> per{e0.count(Attach::vertex, 0), e0.count(Attach::edge, 0), e0.count(Attach::face, 0),
                               e0.count(Attach::interior, 0)};
  const std::array<int, 4> nent{mesh.nv(), mesh.ne(), mesh.nf(), mesh.nt()};
  std::array<int, 4> offset{};
  for (int a = 1; a < 4; ++a) offset[a] = offset[a - 1] + per[a - 1] * nent[a - 1];
  s.ndofs = offset[3] + per[3] * nent[3];
  s.attach.assign(s.ndofs, Attach::interior);
  s.ncells.assign(s.ndofs, 0);
  for (int a = 0; a < 4; ++a)
    for (int i = offset[a]; i < offset[a] + per[a] * nent[a]; ++i) s.attach[i] = static_cast<Attach>(a);

  for (int c = 0; c < mesh.nt(); ++c) {
    const FiniteElement& e = s.elems[c];
    std::vector<int> map;
    std::map<std::pair<int, int>, int> pos;
    for (const auto& b : e.blocks) {
      const int a = attach_index(b.attach);
      if (e.count(b.attach, b.entity) != per[a]) throw std::logic_error("global_space: non-uniform entity DOF count");
      const std::vector<int> g = entity_gids(e, b.attach, b.entity);
      int id = 0;
      switch (b.attach) {
        case Attach::vertex: id = g[0]; break;
        case Attach::edge: id = edge_id.at(g); break;
        case Attach::face: id = face_id.at(g); break;
        case Attach::interior: id = c; break;
      }
      int& p = pos[{a, b.entity}];
      for (int i = 0; i < b.ndofs(); ++i) map.push_back(offset[a] + id * per[a] + p++);
    }
    for (int g : map) ++s.ncells[g];
    s.l2g.push_back(std::move(map));
  }
  return s;
}

long long global_dim_formula(const TetMesh& mesh, const std::string& family, int k) {
  DofTally t = tally_3d(family, k);
  return 1LL * t.vertex / 4 * mesh.nv() + 1LL * t.edge / 6 * mesh.ne() + 1LL * t.face / 4 * mesh.nf() +
         1LL * t.interior * mesh.nt();
}

namespace {

void check_pair(DiffOp op, const GlobalSpace& src, const GlobalSpace& dst) {
  const std::map<DiffOp, std::pair<std::string, std::string>> ok{
      {DiffOp::devgrad, {"h1_vec3", "hsymcurl_T"}},
      {DiffOp::symcurl, {"hsymcurl_T", "hdivdiv_S"}},
      {DiffOp::divdiv, {"hdivdiv_S", "dg_scalar"}}};
  auto it = ok.find(op);
  if (it == ok.end() || it->second.first != src.family || it->second.second != dst.family)
    throw std::invalid_argument(std::string("assemble_diff: ") + op_name(op) + " does not map " + src.family + " to " +
                                dst.family);
  if (src.mesh != dst.mesh || src.k != dst.k) throw std::invalid_argument("assemble_diff: spaces on different meshes");
}

}  // namespace

SparseOperator assemble_diff(DiffOp op, const GlobalSpace& src, const GlobalSpace& dst) {
  check_pair(op, src, dst);
  const int nt = static_cast<int>(src.elems.size());
  std::vector<MatrixXd> local(nt);
  std::vector<Eigen::Triplet<double>> trip;
  double amax = 0.0;
  for (int c = 0; c < nt; ++c) {
    const FiniteElement &se = src.elems[c], &de = dst.elems[c];
    DiffMatrix dm = diff(op, se.shape);
    const PolySpace& img = dm.dst;
    MatrixXd dofs = de.dofs_of([&img](const Vec3& x, int order) { return img.jets(x, order); });
    local[c] = dofs * dm.mat * se.nodal;
    amax = std::max(amax, local[c].cwiseAbs().maxCoeff());
  }
  const double drop = 1e-14 * amax;
  for (int c = 0; c < nt; ++c) {
    const auto &rm = dst.l2g[c], &cm = src.l2g[c];
    for (Index j = 0; j < local[c].cols(); ++j)
      for (Index i = 0; i < local[c].rows(); ++i) {
        const double v = local[c](i, j);
        if (std::abs(v) > drop) trip.emplace_back(rm[i], cm[j], v / dst.ncells[rm[i]]);
      }
  }
  SparseOperator out;
  out.op = op;
  out.mat.resize(dst.ndofs, src.ndofs);
  out.mat.setFromTriplets(trip.begin(), trip.end());
  out.mat.prune(drop);

  // Shared rows must agree across incident cells, including columns that are
  // absent (zero) on a cell.
  Eigen::SparseMatrix<double, Eigen::RowMajor> rows(out.mat);
  double worst = 0.0;
  for (int c = 0; c < nt; ++c) {
    std::vector<int> cols = src.l2g[c];
    std::sort(cols.begin(), cols.end());
    const auto &rm = dst.l2g[c], &cm = src.l2g[c];
    for (Index i = 0; i < local[c].rows(); ++i) {
      if (dst.ncells[rm[i]] == 1) continue;
      for (Index j = 0; j < local[c].cols(); ++j) worst = std::max(worst, std::abs(local[c](i, j) - out.mat.coeff(rm[i], cm[j])));
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, rm[i]); it; ++it)
        if (!std::binary_search(cols.begin(), cols.end(), static_cast<int>(it.col())))
          worst = std::max(worst, std::abs(it.value()));
    }
  }
  out.mismatch = amax > 0 ? worst / amax : worst;
  return out;
}

VectorXd interpolate(const GlobalSpace& s, const FieldJets& f) {
  VectorXd out = VectorXd::Zero(s.ndofs);
  for (size_t c = 0; c < s.elems.size(); ++c) {
    MatrixXd d = s.elems[c].dofs_of(f);
    if (d.cols() != 1) throw std::invalid_argument("interpolate: one field expected");
    for (Index i = 0; i < d.rows(); ++i) out(s.l2g[c][i]) += d(i, 0) / s.ncells[s.l2g[c][i]];
  }
  return out;
}

CellQuadrature::CellQuadrature(const GlobalSpace& s, int degree) : s_(&s) {
  const QuadRule& q = rule(3, degree);
  const FiniteElement& e0 = s.elems.at(0);
  nc_ = e0.shape.ncomp();
  const int nm = e0.shape.nmono();
  ref_values_.resize(q.size(), nm);
  for (Index p = 0; p < q.size(); ++p) ref_values_.row(p) = bernstein_values(4, e0.shape.degree, q.bary.row(p).transpose());
  for (const auto& e : s.elems) {
    coef_map_.push_back(e.shape.basis.transpose() * e.nodal);
    weights_.push_back(q.weights * (e.cell.measure / reference_measure(3)));
    std::vector<Vec3> pts;
    for (Index p = 0; p < q.size(); ++p) pts.push_back(e.cell.point(q.bary.row(p).transpose()));
    pts_.push_back(std::move(pts));
  }
  (void)nm;
}

MatrixXd CellQuadrature::values(int cell, const VectorXd& c) const {
  const auto& map = s_->l2g[cell];
  VectorXd loc(map.size());
  for (size_t i = 0; i < map.size(); ++i) loc(i) = c(map[i]);
  VectorXd flat = coef_map_[cell] * loc;
  const Index nm = ref_values_.cols();
  return ref_values_ * Eigen::Map<const MatrixXd>(flat.data(), nm, nc_);
}

VectorXd CellQuadrature::load(const std::vector<MatrixXd>& f) const {
  VectorXd out = VectorXd::Zero(s_->ndofs);
  const Index nm = ref_values_.cols();
  for (size_t c = 0; c < coef_map_.size(); ++c) {
    MatrixXd g = ref_values_.transpose() * (weights_[c].asDiagonal() * f[c]);  // nm x nc
    VectorXd loc = coef_map_[c].transpose() * Eigen::Map<const VectorXd>(g.data(), nm * nc_);
    for (Index i = 0; i < loc.size(); ++i) out(s_->l2g[c][i]) += loc(i);
  }
  return out;
}

double CellQuadrature::l2_error_sq(const std::vector<MatrixXd>& f, const VectorXd& c) const {
  double sum = 0.0;
  for (size_t cell = 0; cell < coef_map_.size(); ++cell) {
    MatrixXd d = f[cell] - values(static_cast<int>(cell), c);
    sum += weights_[cell].dot(d.rowwise().squaredNorm());
  }
  return sum;
}

SpMat CellQuadrature::mass() const {
  const Index nm = ref_values_.cols();
  std::vector<Eigen::Triplet<double>> trip;
  for (size_t c = 0; c < coef_map_.size(); ++c) {
    MatrixXd g = ref_values_.transpose() * weights_[c].asDiagonal() * ref_values_;
    const MatrixXd& a = coef_map_[c];
    MatrixXd loc = MatrixXd::Zero(a.cols(), a.cols());
    for (int k = 0; k < nc_; ++k) {
      const auto ak = a.middleRows(k * nm, nm);
      loc.noalias() += ak.transpose() * g * ak;
    }
    const auto& map = s_->l2g[c];
    for (Index j = 0; j < loc.cols(); ++j)
      for (Index i = 0; i < loc.rows(); ++i)
        if (loc(i, j) != 0.0) trip.emplace_back(map[i], map[j], loc(i, j));
  }
  SpMat m(s_->ndofs, s_->ndofs);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat mass_matrix(const GlobalSpace& s) { return CellQuadrature(s, 2 * s.elems.at(0).shape.degree).mass(); }

// ---------------------------------------------------------------------------

namespace {

double rel_product(const SpMat& a, const SpMat& b) {
  const double d = a.norm() * b.norm();
  const double n = SpMat(a * b).norm();
  return d > 0 ? n / d : n;
}

FieldJets single(const PolyField& f) {
  return [f](const Vec3& x, int order) { return f.jet(x, order); };
}

}  // namespace

Report complex_audit(const TetMesh& mesh, int k) {
  Report r;
  r.command = "audit complex";
  r.inputs = {{"mesh", mesh.name}, {"k", k}};
  r.data["entities"] = {{"V", mesh.nv()}, {"E", mesh.ne()}, {"F", mesh.nf()}, {"T", mesh.nt()}};
  r.expect_eq("euler characteristic", 1, mesh.euler(), "formula");

  const GlobalSpace v = global_space(mesh, "h1_vec3", k), l = global_space(mesh, "hsymcurl_T", k),
                    s = global_space(mesh, "hdivdiv_S", k), q = global_space(mesh, "dg_scalar", k);
  for (const GlobalSpace* g : {&v, &l, &s, &q})
    r.expect_eq("dim " + g->family, global_dim_formula(mesh, g->family, k), g->ndofs, "formula");

  const SparseOperator d1 = assemble_diff(DiffOp::devgrad, v, l), d2 = assemble_diff(DiffOp::symcurl, l, s),
                       d3 = assemble_diff(DiffOp::divdiv, s, q);
  r.expect_le("devgrad V in Lambda (shared DOF agreement)", d1.mismatch, 1e-10);
  r.expect_le("symcurl Lambda in Sigma (shared DOF agreement)", d2.mismatch, 1e-10);
  r.expect_le("divdiv Sigma in Q (shared DOF agreement)", d3.mismatch, 1e-10);
  r.expect_le("symcurl devgrad = 0", rel_product(d2.mat, d1.mat), 1e-11);
  r.expect_le("divdiv symcurl = 0", rel_product(d3.mat, d2.mat), 1e-11);

  const int r1 = sparse_rank(d1.mat), r2 = sparse_rank(d2.mat), r3 = sparse_rank(d3.mat);
  r.expect_eq("ker devgrad = RT (dim 4)", 4, v.ndofs - r1, "oracle");
  r.expect_eq("ker symcurl = im devgrad", r1, l.ndofs - r2, "oracle");
  r.expect_eq("ker divdiv = im symcurl", r2, s.ndofs - r3, "oracle");
  r.expect_eq("divdiv onto P_{k-2}(T)", q.ndofs, r3, "oracle");

  const long long nv = mesh.nv(), ne = mesh.ne(), nf = mesh.nf(), nt = mesh.nt();
  const long long f1 = 2 * nv + (3 * k + 1) * ne + (k * k - k - 3) * nf + (5LL * k * k * k + 12 * k * k - 17 * k) / 6 * nt + 4;
  const long long f2 =
      6 * nv + (3 * k - 3) * ne + (k * k - k + 1) * nf + (5LL * k * k * k + 12 * k * k - 17 * k - 24) / 6 * nt;
  r.expect_eq("rank symcurl = counting formula", f1, r2, "formula");
  r.expect_eq("dim ker divdiv = counting formula", f2, s.ndofs - r3, "formula");
  r.expect_eq("formulas differ by 4 - 4 chi", 4 - 4LL * mesh.euler(), f1 - f2, "formula");

  const int dense_limit = 3000;
  if (std::max({v.ndofs, l.ndofs, s.ndofs}) <= dense_limit) {
    r.expect_eq("dense rank devgrad", r1, dense_rank_equilibrated(d1.mat), "oracle");
    r.expect_eq("dense rank symcurl", r2, dense_rank_equilibrated(d2.mat), "oracle");
    r.expect_eq("dense rank divdiv", r3, dense_rank_equilibrated(d3.mat), "oracle");
  }

  // RT fields interpolate into V and lie in the kernel; interpolation commutes
  // with devgrad for a global polynomial of degree k+2.
  {
    const Simplex ref = reference_simplex(3);
    double worst = 0.0, scale = d1.mat.norm();
    for (int i = 0; i < 4; ++i) {
      PolyField f = interpolate_poly(ref, 1, 3, [i](const Vec3& x) -> VectorXd {
        return i < 3 ? VectorXd(Vec3::Unit(i)) : VectorXd(x);
      });
      VectorXd c = interpolate(v, single(f));
      worst = std::max(worst, (d1.mat * c).norm() / (scale * c.norm()));
    }
    r.expect_le("devgrad of RT interpolants = 0", worst, 1e-11);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    PolySpace pv = space(ref, k + 2, Range::R3);
    VectorXd cv(pv.dim());
    for (Index i = 0; i < cv.size(); ++i) cv(i) = g(rng);
    PolyField fv = pv.combination(cv);
    VectorXd iv = interpolate(v, single(fv));
    VectorXd il = interpolate(l, [&fv](const Vec3& x, int order) { return dev_grad(fv.jet(x, order + 1)); });
    r.expect_le("interpolate(devgrad v) = devgrad interpolate(v)", (il - d1.mat * iv).norm() / il.norm(), 1e-10);
  }

  r.data["dims"] = {{"V", v.ndofs}, {"Lambda", l.ndofs}, {"Sigma", s.ndofs}, {"Q", q.ndofs}};
  r.data["ranks"] = {{"devgrad", r1}, {"symcurl", r2}, {"divdiv", r3}};
  r.data["formulas"] = {{"rank_symcurl", f1}, {"dim_ker_divdiv", f2}};
  r.data["divdiv_image"] = {{"rank", r3},
                            {"dim_P_{k-2}(T)", nt * (k - 1) * k * (k + 1) / 6},
                            {"dim_P_{k-1}(T)", nt * k * (k + 1) * (k + 2) / 6}};
  return r;
}

}  // namespace divdiv
