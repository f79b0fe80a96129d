#include "divdiv/fe3d.hpp"

#include "divdiv/mesh.hpp"
#include "fe_util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

namespace divdiv {

using namespace detail;

namespace {

struct Tet {
  Simplex s;
  std::array<Simplex, 6> edge;
  std::array<EdgeFrame, 6> ef;
  std::array<Simplex, 4> face;  // face i is opposite vertex i
  std::array<FaceFrame, 4> ff;
};

Tet make_tet(const Simplex& s, double angle) {
  Tet t;
  t.s = s;
  for (int i = 0; i < 6; ++i) {
    const auto& le = kLocalEdges[i];
    t.edge[i] = sub_simplex(s, {le[0], le[1]});
    EdgeFrame f = make_edge_frame(s.x[le[0]], s.x[le[1]]);
    const double c = std::cos(angle), sn = std::sin(angle);
    t.ef[i] = {f.t, c * f.n1 + sn * f.n2, -sn * f.n1 + c * f.n2};
  }
  for (int i = 0; i < 4; ++i) {
    std::vector<int> l;
    for (int j = 0; j < 4; ++j)
      if (j != i) l.push_back(j);
    t.face[i] = sub_simplex(s, l);
    t.ff[i] = make_face_frame(t.face[i].x[0], t.face[i].x[1], t.face[i].x[2]);
  }
  return t;
}

int qdeg(int k) { return 2 * k + 4; }

void add_moment(FiniteElement& e, const std::string& label, Attach a, int ent, const Simplex& where, int order,
                const MatrixXd& rows, const std::vector<PolyField>& tests) {
  if (tests.empty()) return;
  e.blocks.push_back(moment_block(label, a, ent, where, qdeg(e.k), order, static_cast<int>(rows.rows()),
                                  linear_trace(rows), tests));
}

void add_vertices(FiniteElement& e, const std::string& label, int order, const MatrixXd& rows) {
  for (int v = 0; v < 4; ++v)
    e.blocks.push_back(point_block(label, Attach::vertex, v, e.cell.x[v], order, static_cast<int>(rows.rows()),
                                   linear_trace(rows)));
}

VectorXd outer(const Vec3& a, const Vec3& b) { return from_mat3(a * b.transpose()); }

const std::array<Vec3, 3> kAxes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

// 2 div_f(tau n) + d_n(n^T tau n) on the gradient rows of a matrix jet.
MatrixXd normal_divergence_row(const Vec3& n, int order) {
  const Mat3 p = tangential_projector(n);
  MatrixXd r = MatrixXd::Zero(1, Jet::levels_rows(9, order));
  for (int q = 0; q < 3; ++q)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) r(0, 9 * (1 + q) + mat_index(j, l)) = 2.0 * p(j, q) * n(l) + n(q) * n(j) * n(l);
  return r;
}

void build_hsymcurl(FiniteElement& e, const Tet& t) {
  const int k = e.k;
  e.shape = space(t.s, k + 1, Range::T);
  std::vector<MatrixXd> rows;
  std::vector<VectorXd> comps;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!(i == 2 && j == 2)) comps.push_back(outer(kAxes[i], kAxes[j]));
  for (const auto& w : comps) rows.push_back(jet_value(9, 1, w));
  for (const auto& w : comps)
    for (const auto& d : kAxes) rows.push_back(jet_deriv(9, 1, w, d));
  add_vertices(e, "tau+grad tau", 1, stack(rows));

  for (int i = 0; i < 6; ++i) {
    const EdgeFrame& f = t.ef[i];
    add_moment(e, "edge n_i^T tau t", Attach::edge, i, t.edge[i], 0,
               stack({jet_value(9, 0, outer(f.n1, f.t)), jet_value(9, 0, outer(f.n2, f.t))}),
               per_component(scalar_tests(t.edge[i], k - 3), 2));
    MatrixXd r = stack({jet_op(9, 1, DiffOp::symcurl, f.t, lin_bilinear(f.n1, f.n1)),
                        jet_op(9, 1, DiffOp::symcurl, f.t, lin_bilinear(f.n1, f.n2)),
                        jet_op(9, 1, DiffOp::symcurl, f.t, lin_bilinear(f.n2, f.n2)),
                        jet_op(9, 1, DiffOp::curl, f.t, lin_bilinear(f.n1, f.n2)) -
                            jet_deriv(9, 1, outer(f.t, f.t), f.t)});
    add_moment(e, "edge symcurl", Attach::edge, i, t.edge[i], 1, r,
               per_component(scalar_tests(t.edge[i], k - 2), 4));
  }

  for (int i = 0; i < 4; ++i) {
    const Vec3& n = t.ff[i].n;
    const Mat3 p = tangential_projector(n);
    add_moment(e, "face proj_f(tau^T n)", Attach::face, i, t.face[i], 0, lin_vec_mul(p) * lin_mat_t_vec(n),
               rot_face_tests(t.face[i], k));
    add_moment(e, "face proj_f,sym(tau x n)", Attach::face, i, t.face[i], 0,
               lin_sym() * lin_right_mul(p) * lin_left_mul(-mspn(n)), rotrot_face_tests(t.face[i], k));
  }

  add_moment(e, "interior symcurl tau", Attach::interior, 0, t.s, 1,
             jet_op(9, 1, DiffOp::symcurl, Vec3::UnitZ(), MatrixXd::Identity(9, 9)),
             members(constrained_subspace(SubspaceTag::sym_x_cross_T, t.s, k)));
  const Vec3& n1 = t.ff[0].n;
  add_moment(e, "f1 symcurl tau n", Attach::interior, 0, t.face[0], 1,
             jet_op(9, 1, DiffOp::symcurl, n1, lin_mat_vec(n1)),
             members(constrained_subspace(SubspaceTag::face_rot_x, t.face[0], k)));
  add_moment(e, "interior tau", Attach::interior, 0, t.s, 0, jet_values(9, 0),
             members(constrained_subspace(SubspaceTag::dev_vec_xT, t.s, k)));
}

void build_hdivdiv(FiniteElement& e, const Tet& t) {
  const int k = e.k;
  e.shape = space(t.s, k, Range::S);
  std::vector<MatrixXd> rows;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) rows.push_back(jet_value(9, 0, outer(kAxes[i], kAxes[j])));
  add_vertices(e, "tau", 0, stack(rows));

  for (int i = 0; i < 6; ++i) {
    const EdgeFrame& f = t.ef[i];
    add_moment(e, "edge n_i^T tau n_j", Attach::edge, i, t.edge[i], 0,
               stack({jet_value(9, 0, outer(f.n1, f.n1)), jet_value(9, 0, outer(f.n1, f.n2)),
                      jet_value(9, 0, outer(f.n2, f.n2))}),
               per_component(scalar_tests(t.edge[i], k - 2), 3));
  }

  for (int i = 0; i < 4; ++i) {
    const Vec3& n = t.ff[i].n;
    add_moment(e, "face n^T tau n", Attach::face, i, t.face[i], 0, jet_value(9, 0, outer(n, n)),
               scalar_tests(t.face[i], k - 3));
    add_moment(e, "face 2 div_f(tau n) + d_n(n^T tau n)", Attach::face, i, t.face[i], 1,
               normal_divergence_row(n, 1), scalar_tests(t.face[i], k - 1));
  }

  PolySpace inner = constrained_subspace(SubspaceTag::sym_x_cross_T, t.s, k);
  if (k >= 4) inner = span_sum(constrained_subspace(SubspaceTag::hess_mod, t.s, k), inner);
  add_moment(e, "interior tau", Attach::interior, 0, t.s, 0, jet_values(9, 0), members(inner));
  const Vec3& n1 = t.ff[0].n;
  add_moment(e, "f1 tau n", Attach::interior, 0, t.face[0], 0, lin_mat_vec(n1),
             members(constrained_subspace(SubspaceTag::face_rot_x, t.face[0], k)));
}

void build_h1_vec3(FiniteElement& e, const Tet& t) {
  const int k = e.k;
  e.shape = space(t.s, k + 2, Range::R3);
  std::vector<MatrixXd> rows;
  for (const auto& c : kAxes) rows.push_back(jet_value(3, 2, c));
  for (const auto& c : kAxes)
    for (const auto& d : kAxes) rows.push_back(jet_deriv(3, 2, c, d));
  for (const auto& c : kAxes)
    for (int r = 0; r < 3; ++r)
      for (int q = r; q < 3; ++q) rows.push_back(jet_deriv2(3, 2, c, kAxes[r], kAxes[q]));
  add_vertices(e, "u+grad u+hess u", 2, stack(rows));
  const std::vector<VectorXd> axes{kAxes[0], kAxes[1], kAxes[2]};
  for (int i = 0; i < 6; ++i)
    add_moment(e, "edge u", Attach::edge, i, t.edge[i], 0, jet_values(3, 0),
               times_vectors(scalar_tests(t.edge[i], k - 4), axes));
  for (int i = 0; i < 4; ++i)
    add_moment(e, "face u", Attach::face, i, t.face[i], 0, jet_values(3, 0),
               members(constrained_subspace(SubspaceTag::vanish_vertices_R3, t.face[i], k)));
  add_moment(e, "interior u", Attach::interior, 0, t.s, 0, jet_values(3, 0),
             times_vectors(scalar_tests(t.s, k - 2), axes));
}

void build_dg(FiniteElement& e, const Tet& t) {
  const int k = e.k;
  e.shape = space(t.s, k - 2, Range::scalar);
  add_moment(e, "interior p", Attach::interior, 0, t.s, 0, jet_value(1, 0, VectorXd::Ones(1)),
             scalar_tests(t.s, k - 2));
}

}  // namespace

const std::vector<std::string>& families_3d() {
  static const std::vector<std::string> f{"hsymcurl_T", "hdivdiv_S", "h1_vec3", "dg_scalar"};
  return f;
}

DofTally tally_3d(const std::string& family, int k) {
  require_k(k, "tally_3d");
  const int pk2 = (k - 1) * k * (k + 1) / 6;  // dim P_{k-2}(K)
  const int sxt = k * (k - 1) * (5 * k + 14) / 6;
  if (family == "hsymcurl_T")
    return {128, 12 * (k - 2) + 24 * (k - 1), 4 * (k * k - k - 3) + 4 * (3 * k * (k + 1) / 2 - 9),
            sxt + k * (k - 1) / 2 + 3 * pk2};
  if (family == "hdivdiv_S")
    return {24, 18 * (k - 1), 2 * (k - 2) * (k - 1) + 2 * k * (k + 1), pk2 - 4 + sxt + k * (k - 1) / 2};
  if (family == "h1_vec3") return {120, 18 * (k - 3), 6 * (k * k + k - 6), 3 * pk2};
  if (family == "dg_scalar") return {0, 0, 0, pk2};
  throw std::invalid_argument("unknown 3-D family: " + family);
}

FiniteElement element_3d(const std::string& family, int k, const Simplex& tet, std::vector<int> gids,
                         const Element3Options& opt) {
  require_k(k, "element_3d");
  if (tet.dim != 3) throw std::invalid_argument("element_3d: tetrahedron expected");
  FiniteElement e;
  e.family = family;
  e.k = k;
  e.cell = sorted_simplex(tet, gids);
  e.gids = gids;
  Tet t = make_tet(e.cell, opt.edge_frame_angle);
  if (family == "hsymcurl_T") build_hsymcurl(e, t);
  else if (family == "hdivdiv_S") build_hdivdiv(e, t);
  else if (family == "h1_vec3") build_h1_vec3(e, t);
  else if (family == "dg_scalar") build_dg(e, t);
  else throw std::invalid_argument("unknown 3-D family: " + family);
  finalize(e);
  return e;
}

FiniteElement element_3d(const std::string& family, int k) { return element_3d(family, k, reference_simplex(3)); }

std::vector<int> entity_gids(const FiniteElement& e, Attach a, int entity) {
  switch (a) {
    case Attach::vertex: return {e.gids[entity]};
    case Attach::edge: return {e.gids[kLocalEdges[entity][0]], e.gids[kLocalEdges[entity][1]]};
    case Attach::face: {
      std::vector<int> g;
      for (int j = 0; j < 4; ++j)
        if (j != entity) g.push_back(e.gids[j]);
      return g;
    }
    case Attach::interior: return {};
  }
  return {};
}

Report unisolvence_audit_3d(const std::string& family, int k, int cells, unsigned seed) {
  Report r;
  r.command = "unisolvence " + family;
  r.inputs = {{"family", family}, {"k", k}, {"cells", cells}, {"seed", seed}};
  DofTally tl = tally_3d(family, k);
  std::mt19937_64 rng(seed);
  Json ratios = Json::array();
  double worst = 1.0;
  for (int c = 0; c <= cells; ++c) {
    Simplex s = c == 0 ? reference_simplex(3) : random_simplex(3, rng);
    FiniteElement e = element_3d(family, k, s);
    if (c == 0) {
      r.expect_eq("dofs", tl.total(), e.ndofs(), "formula");
      r.expect_eq("dofs = dim shape", e.shape.dim(), e.ndofs(), "oracle");
      r.expect_eq("vertex dofs", tl.vertex, e.count(Attach::vertex), "formula");
      r.expect_eq("edge dofs", tl.edge, e.count(Attach::edge), "formula");
      r.expect_eq("face dofs", tl.face, e.count(Attach::face), "formula");
      r.expect_eq("interior dofs", tl.interior, e.count(Attach::interior), "formula");
    }
    double q = e.condition_ratio();
    ratios.push_back(q);
    worst = std::min(worst, q);
  }
  r.expect_ge("min singular value ratio", worst, 1e-9);
  r.data["sv_ratios"] = ratios;
  return r;
}

// ---------------------------------------------------------------------------
// Restriction identities. One side goes through the operator library, the
// other is written out with explicit index sums on the raw jet entries.

namespace {

double levi(int i, int j, int k) { return 0.5 * (i - j) * (j - k) * (k - i); }

struct MatJet {
  Mat3 v;
  std::array<Mat3, 3> d;
  std::array<std::array<Mat3, 3>, 3> dd;
};

MatJet mat_jet(const Jet& j) {
  MatJet m;
  m.v = to_mat3(j.value().col(0));
  for (int q = 0; q < 3; ++q) {
    m.d[q] = to_mat3(j.grad(q).col(0));
    for (int r = 0; r < 3; ++r) m.dd[r][q] = to_mat3(j.hess(r, q).col(0));
  }
  return m;
}

// Row-wise curl of a matrix field from its first derivatives.
Mat3 explicit_curl(const std::array<Mat3, 3>& d) {
  Mat3 c = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) c(i, j) += levi(j, a, b) * d[a](i, b);
  return c;
}

// Jet of tau = dev grad v from the raw jet of v (value and first derivative).
MatJet devgrad_jet(const Jet& v) {
  MatJet m;
  auto g = [&](int r) {  // d_r of grad v, r = -1 for the value
    Mat3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = r < 0 ? v.grad(j)(i, 0) : v.hess(r, j)(i, 0);
    return dev(a);
  };
  m.v = g(-1);
  for (int r = 0; r < 3; ++r) m.d[r] = g(r);
  return m;
}

Vec3 col3(const Jet& j) { return j.value().col(0); }
double val(const Jet& j) { return j.value()(0, 0); }
Mat3 mval(const Jet& j) { return to_mat3(j.value().col(0)); }

struct Sampler {
  std::mt19937_64 rng;
  std::normal_distribution<double> g{0.0, 1.0};
  std::uniform_real_distribution<double> u{0.0, 1.0};

  Vec3 unit() {
    Vec3 v(g(rng), g(rng), g(rng));
    return v.normalized();
  }
  PolyField field(const Simplex& s, int deg, Range r) {
    PolySpace p = space(s, deg, r);
    VectorXd c(p.dim());
    for (Index i = 0; i < c.size(); ++i) c(i) = g(rng);
    return p.combination(c);
  }
  Vec3 point(const Simplex& s) {
    Bary l;
    for (int i = 0; i < 4; ++i) l(i) = -std::log(u(rng) + 1e-300);
    return s.point(l / l.sum());
  }
};

struct Identity {
  std::string name;
  double worst = 0.0;
  void add(double diff, double scale) { worst = std::max(worst, rel(diff, scale)); }
};

}  // namespace

Report trace_identity_audit(int k, int trials, unsigned seed) {
  require_k(k, "trace_identity_audit");
  if (trials < 1) throw std::invalid_argument("trace_identity_audit: trials >= 1 required");
  Report r;
  r.command = "trace identities";
  r.inputs = {{"k", k}, {"trials", trials}, {"seed", seed}};
  Sampler sm{std::mt19937_64(seed)};
  std::map<std::string, Identity> ids;
  const std::vector<std::string> order{
      "face.tangential_component",    "face.rot_of_normal_trace",  "face.sym_trace_t2t2",
      "face.rot_of_sym_trace",        "face.symcurl_nn",           "face.symcurl_normal_divergence",
      "face.devgrad_normal_trace",    "face.devgrad_sym_trace",    "edge.devgrad_symcurl_nn",
      "edge.devgrad_curl_n1n2",       "product.grad_transpose_n",  "product.grad_cross_n",
      "product.curl_transpose_n"};
  const int pts = 4;
  for (int trial = 0; trial < trials; ++trial) {
    Simplex s = random_simplex(3, sm.rng);
    PolyField tau = sm.field(s, k + 1, Range::T);
    PolyField v = sm.field(s, k + 2, Range::R3);
    PolyField a = sm.field(s, k + 1, Range::M);
    const Vec3 n = sm.unit();
    const Vec3 t1 = sm.unit().cross(n).normalized();
    const Vec3 t2 = n.cross(t1);
    const Mat3 p = tangential_projector(n);
    // edge frame: te along n, (e1, e2) with e1 x e2 = te
    const Vec3 te = n, e1 = t1, e2 = t2;
    for (int q = 0; q < pts; ++q) {
      const Vec3 x = sm.point(s);
      const Jet jt = tau.jet(x, 2), jv = v.jet(x, 2), ja = a.jet(x, 2);
      const double st = jt.data().col(0).norm(), sv = jv.data().col(0).norm(), sa = ja.data().col(0).norm();
      const MatJet mt = mat_jet(jt);
      const Mat3 curl_t = explicit_curl(mt.d);
      const Jet tn = linear(lin_mat_t_vec(n), jt);
      const Jet ptn = proj_f(tn, n);
      const Jet zeta = proj_f_sym(cross_n_right(jt, n), n);

      ids["face.tangential_component"].add(std::abs(col3(ptn).dot(t2) - n.dot(mt.v * t2)), st);
      ids["face.rot_of_normal_trace"].add(std::abs(val(rot_f(ptn, n)) - n.dot(curl_t * n)), st);
      ids["face.sym_trace_t2t2"].add(std::abs(t2.dot(mval(zeta) * t2) + t1.dot(mt.v * t2)), st);
      {
        double lhs = -t1.dot(mval(directional(zeta, t2)) * t2) + col3(rot_f(zeta, n)).dot(t2);
        double dt = 0.0;
        for (int c = 0; c < 3; ++c) dt += t2(c) * t2.dot(mt.d[c] * t2);
        ids["face.rot_of_sym_trace"].add(std::abs(lhs - (-t1.dot(curl_t * n) - dt)), st);
      }
      {
        const Jet xi = sym_curl(jt);
        // rot_f P(tau^T n) = eps_abc n_a d_b (P tau^T n)_c
        double rot = 0.0;
        for (int aa = 0; aa < 3; ++aa)
          for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) rot += levi(aa, b, c) * n(aa) * (p * mt.d[b].transpose() * n)(c);
        ids["face.symcurl_nn"].add(std::abs(n.dot(mval(xi) * n) - rot), st);
        double lhs = 2.0 * val(div_f(linear(lin_mat_vec(n), xi), n)) +
                     val(directional(linear(lin_bilinear(n, n), xi), n));
        // rotrot_f zeta with zeta = sym(-mspn(n) tau P)
        auto zeta2 = [&](int rr, int qq) {
          Mat3 z = -mspn(n) * mt.dd[rr][qq] * p;
          return sym(z);
        };
        double rr2 = 0.0;
        for (int a2 = 0; a2 < 3; ++a2)
          for (int b2 = 0; b2 < 3; ++b2)
            for (int i = 0; i < 3; ++i) {
              const double o = levi(a2, b2, i) * n(a2);
              if (o == 0.0) continue;
              for (int aa = 0; aa < 3; ++aa)
                for (int b = 0; b < 3; ++b)
                  for (int c = 0; c < 3; ++c) {
                    const double w = levi(aa, b, c) * n(aa);
                    if (w != 0.0) rr2 += o * w * zeta2(b2, b)(i, c);
                  }
            }
        ids["face.symcurl_normal_divergence"].add(std::abs(lhs + rr2), st);
      }
      {
        const Jet dg = dev_grad(jv);
        Mat3 gv;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) gv(i, j) = jv.grad(j)(i, 0);
        const Vec3 rhs = p * gv.transpose() * n;
        ids["face.devgrad_normal_trace"].add((col3(proj_f(linear(lin_mat_t_vec(n), dg), n)) - rhs).norm(), sv);
        const Mat3 gw = -mspn(n) * gv;
        const Mat3 epsf = p * sym(gw) * p;
        ids["face.devgrad_sym_trace"].add((mval(proj_f_sym(cross_n_right(dg, n), n)) - epsf).norm(), sv);

        const Jet sc = sym_curl(dg);
        double nn = std::abs(e1.dot(mval(sc) * e1)) + std::abs(e1.dot(mval(sc) * e2)) +
                    std::abs(e2.dot(mval(sc) * e2));
        ids["edge.devgrad_symcurl_nn"].add(nn, sv);
        const MatJet md = devgrad_jet(jv);
        double lhs = e1.dot(mval(curl(dg)) * e2) - val(directional(linear(lin_bilinear(te, te), dg), te));
        double lhs2 = e1.dot(explicit_curl(md.d) * e2);
        for (int c = 0; c < 3; ++c) lhs2 -= te(c) * te.dot(md.d[c] * te);
        double rhs2 = 0.0;
        for (int rr = 0; rr < 3; ++rr)
          for (int qq = 0; qq < 3; ++qq)
            for (int i = 0; i < 3; ++i) rhs2 -= te(rr) * te(qq) * te(i) * jv.hess(rr, qq)(i, 0);
        ids["edge.devgrad_curl_n1n2"].add(std::abs(lhs - rhs2) + std::abs(lhs2 - rhs2), sv);

        Vec3 gvn;
        for (int qq = 0; qq < 3; ++qq) gvn(qq) = n.dot(jv.grad(qq).col(0));
        ids["product.grad_transpose_n"].add((col3(linear(lin_mat_t_vec(n), grad_op(jv))) - gvn).norm(), sv);
        Mat3 gcross;
        for (int qq = 0; qq < 3; ++qq) gcross.col(qq) = Vec3(jv.grad(qq).col(0)).cross(n);
        ids["product.grad_cross_n"].add((mval(cross_n_right(grad_op(jv), n)) - gcross).norm(), sv);
      }
      {
        const MatJet ma = mat_jet(ja);
        Vec3 cw = Vec3::Zero();
        for (int j = 0; j < 3; ++j)
          for (int aa = 0; aa < 3; ++aa)
            for (int b = 0; b < 3; ++b) cw(j) += levi(j, aa, b) * n.dot(ma.d[aa].col(b));
        ids["product.curl_transpose_n"].add((col3(linear(lin_mat_t_vec(n), curl(ja))) - cw).norm(), sa);
      }
    }
  }
  Json worst = Json::object();
  for (const auto& name : order) {
    r.expect_le(name, ids[name].worst, 1e-10);
    worst[name] = ids[name].worst;
  }
  r.data["max_relative_residual"] = worst;
  r.data["points_per_trial"] = pts;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

double rel_norm(const MatrixXd& a, const MatrixXd& op, const MatrixXd& b) {
  return rel((a * op * b).norm(), a.norm() * op.norm() * b.norm());
}

MatrixXd bubbles(const FiniteElement& e) { return nullspace(select_rows(e.vandermonde, boundary_rows(e))); }

// rank of [a b] compared with the ranks of a and b
bool same_span(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd both(a.rows(), a.cols() + b.cols());
  both << a, b;
  const int ra = numerical_rank(a), rb = numerical_rank(b), rab = numerical_rank(both);
  return ra == rb && rab == ra;
}

PolyField bubble_product(const PolyField& f, const std::vector<int>& verts) {
  PolyField g = f;
  for (int i : verts) g = multiply_barycentric(g, i);
  return g;
}

}  // namespace

Report bubble_audit_3d(int k) {
  require_k(k, "bubble_audit_3d");
  Report r;
  r.command = "bubble complex 3d";
  r.inputs = {{"k", k}};
  const Simplex s = reference_simplex(3);
  const int pk2 = (k - 1) * k * (k + 1) / 6, pk1 = k * (k + 1) * (k + 2) / 6, pk3 = (k - 2) * (k - 1) * k / 6;
  const int sxt = k * (k - 1) * (5 * k + 14) / 6, frx = k * (k - 1) / 2;

  FiniteElement ev = element_3d("h1_vec3", k, s), el = element_3d("hsymcurl_T", k, s),
                es = element_3d("hdivdiv_S", k, s);
  MatrixXd bv = bubbles(ev), bl = bubbles(el), bs = bubbles(es);
  r.expect_eq("dim B_devgrad", 3 * pk2, bv.cols(), "formula");
  r.expect_eq("dim B_symcurl", 8 * pk3 + 4 * 3 * (k * (k - 1) / 2), bl.cols(), "formula");
  r.expect_eq("dim B_divdiv", sxt + frx + (k >= 4 ? pk2 - 4 : 0), bs.cols(), "formula");

  DiffMatrix dg = diff(DiffOp::devgrad, ev.shape);
  DiffMatrix sc = diff(DiffOp::symcurl, el.shape);
  DiffMatrix dd = diff(DiffOp::divdiv, es.shape);
  const double sdg = dg.mat.norm(), ssc = sc.mat.norm(), sdd = dd.mat.norm();
  r.expect_le("devgrad bubbles are symcurl bubbles",
              rel_norm(select_rows(el.vandermonde, boundary_rows(el)), dg.mat, bv), 1e-10);
  r.expect_le("symcurl bubbles are divdiv bubbles",
              rel_norm(select_rows(es.vandermonde, boundary_rows(es)), sc.mat, bl), 1e-10);
  const int rdg = rank_scaled(dg.mat * bv, sdg), rsc = rank_scaled(sc.mat * bl, ssc),
            rdd = rank_scaled(dd.mat * bs, sdd);
  r.expect_eq("devgrad injective on bubbles", bv.cols(), rdg, "oracle");
  r.expect_eq("ker symcurl = im devgrad", bl.cols() - rsc, rdg, "oracle");
  r.expect_eq("dim symcurl image", sxt + frx, rsc, "formula");
  r.expect_eq("ker divdiv = im symcurl", bs.cols() - rdd, rsc, "oracle");

  std::vector<PolyField> img, p1 = scalar_tests(s, 1);
  MatrixXd db = dd.mat * bs;
  for (int j = 0; j < db.cols(); ++j) img.push_back(dd.dst.combination(db.col(j)));
  double orth = img.empty() ? 0.0 : inner_products(img, p1).cwiseAbs().maxCoeff();
  r.expect_le("divdiv image orthogonal to P1", rel(orth, sdd), 1e-10);
  const int tail = rdd == pk2 - 4 ? k - 2 : rdd == pk1 - 4 ? k - 1 : -1;
  r.expect_eq("divdiv image = P_{k-2}/P1", pk2 - 4, rdd, "oracle");

  // Closed forms: b_K P_{k-2}(R^3) and b_K P_{k-3}(T) + sum_f b_f P_{k-2}(f) T_f.
  {
    std::vector<PolyField> cf;
    for (const auto& q : per_component(scalar_tests(s, k - 2), 3)) cf.push_back(bubble_product(q, {0, 1, 2, 3}));
    MatrixXd c(ev.shape.dim(), cf.size());
    for (size_t i = 0; i < cf.size(); ++i) c.col(i) = coords(ev.shape, cf[i]);
    r.expect_true("B_devgrad = b_K P_{k-2}(R^3)", same_span(c, bv), "span comparison");
  }
  {
    std::vector<PolyField> cf;
    PolySpace pt = space(s, k - 3, Range::T);
    for (int i = 0; i < pt.dim(); ++i) cf.push_back(bubble_product(pt.member(i), {0, 1, 2, 3}));
    for (int f = 0; f < 4; ++f) {
      std::vector<int> fv;
      for (int j = 0; j < 4; ++j)
        if (j != f) fv.push_back(j);
      const Simplex fs = sub_simplex(s, fv);
      const FaceFrame fr = make_face_frame(fs.x[0], fs.x[1], fs.x[2]);
      const std::vector<VectorXd> tf{outer(fr.t1, fr.n), outer(fr.t2, fr.n),
                                     from_mat3(fr.n * fr.n.transpose() - Mat3::Identity() / 3.0)};
      // P_{k-2}(f) extended by the face barycentrics
      std::vector<PolyField> q;
      for (const auto& b : scalar_tests(s, k - 2)) {
        PolyField g = PolyField::zero(s, b.degree, 1);
        const auto& mi = multi_indices(4, b.degree);
        for (int m = 0; m < b.nmono(); ++m)
          if (mi[m][f] == 0) g.coef(m, 0) = b.coef(m, 0);
        if (g.coef.norm() > 0) q.push_back(g);
      }
      for (const auto& g : times_vectors(q, tf)) cf.push_back(bubble_product(g, fv));
    }
    MatrixXd c(el.shape.dim(), cf.size());
    for (size_t i = 0; i < cf.size(); ++i) c.col(i) = coords(el.shape, cf[i]);
    r.expect_true("B_symcurl = b_K P_{k-3}(T) + sum_f b_f P_{k-2}(f) T_f", same_span(c, bl), "span comparison");
  }

  r.data["dim_B_devgrad"] = bv.cols();
  r.data["dim_B_symcurl"] = bl.cols();
  r.data["dim_B_divdiv"] = bs.cols();
  r.data["rank_devgrad"] = rdg;
  r.data["rank_symcurl"] = rsc;
  r.data["rank_divdiv"] = rdd;
  r.data["divdiv_tail_degree"] = tail;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

using DofKey = std::tuple<int, std::vector<int>, int>;

std::vector<DofKey> dof_keys(const FiniteElement& e) {
  std::vector<DofKey> keys;
  std::map<std::pair<int, int>, int> seen;
  for (const auto& b : e.blocks) {
    int& pos = seen[{static_cast<int>(b.attach), b.entity}];
    for (int i = 0; i < b.ndofs(); ++i) keys.emplace_back(static_cast<int>(b.attach), entity_gids(e, b.attach, b.entity), pos++);
  }
  return keys;
}

}  // namespace

Report conformity_audit_3d(int k, unsigned seed) {
  require_k(k, "conformity_audit_3d");
  Report r;
  r.command = "conformity 3d";
  r.inputs = {{"k", k}, {"seed", seed}};
  const TetMesh m = two_tets();
  std::vector<int> shared;
  for (int g : m.cells[0])
    if (std::find(m.cells[1].begin(), m.cells[1].end(), g) != m.cells[1].end()) shared.push_back(g);
  std::sort(shared.begin(), shared.end());
  const FaceFrame fr = make_face_frame(m.vertices[shared[0]], m.vertices[shared[1]], m.vertices[shared[2]]);
  const Vec3 n = fr.n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) {
    double a = u(rng), b = u(rng);
    if (a + b > 1) a = 1 - a, b = 1 - b;
    pts.push_back(m.vertices[shared[0]] + a * (m.vertices[shared[1]] - m.vertices[shared[0]]) +
                  b * (m.vertices[shared[2]] - m.vertices[shared[0]]));
  }
  auto on_face = [&](const DofKey& key) {
    if (std::get<0>(key) == static_cast<int>(Attach::interior)) return false;
    for (int v : std::get<1>(key))
      if (!std::binary_search(shared.begin(), shared.end(), v)) return false;
    return true;
  };

  struct Case {
    std::string family, trace;
    std::function<VectorXd(const VectorXd&)> f;
  };
  const Mat3 sn = mspn(n);
  const std::vector<Case> cases{
      {"hsymcurl_T", "sym(n x tau)",
       [&](const VectorXd& t) { return from_mat3(sym(-to_mat3(t) * sn)); }},
      {"hdivdiv_S", "n^T tau n", [&](const VectorXd& t) { return VectorXd::Constant(1, n.dot(to_mat3(t) * n)); }},
      {"h1_vec3", "u", [](const VectorXd& t) { return t; }}};
  for (const auto& cs : cases) {
    FiniteElement e0 = element_3d(cs.family, k, m.cell_simplex(0), {m.cells[0].begin(), m.cells[0].end()});
    FiniteElement e1 = element_3d(cs.family, k, m.cell_simplex(1), {m.cells[1].begin(), m.cells[1].end()});
    const auto k0 = dof_keys(e0), k1 = dof_keys(e1);
    std::map<DofKey, int> idx0;
    for (size_t i = 0; i < k0.size(); ++i) idx0[k0[i]] = static_cast<int>(i);
    VectorXd d0(e0.ndofs()), d1(e1.ndofs());
    for (Index i = 0; i < d0.size(); ++i) d0(i) = g(rng);
    for (Index i = 0; i < d1.size(); ++i) d1(i) = g(rng);
    int matched = 0;
    for (size_t i = 0; i < k1.size(); ++i)
      if (on_face(k1[i])) {
        auto it = idx0.find(k1[i]);
        if (it == idx0.end()) throw std::logic_error("conformity: unmatched face DOF");
        d1(i) = d0(it->second);
        ++matched;
      }
    const PolyField f0 = e0.shape.combination(e0.nodal * d0), f1 = e1.shape.combination(e1.nodal * d1);
    double jump = 0.0, full = 0.0, scale = 0.0;
    for (const auto& x : pts) {
      const Jet ja = f0.jet(x, 1), jb = f1.jet(x, 1);
      const VectorXd a = ja.value().col(0), b = jb.value().col(0);
      jump = std::max(jump, (cs.f(a) - cs.f(b)).norm());
      // the full value, or for H^1 the normal derivative, is not continuous
      const int nc = ja.ncomp();
      VectorXd da = VectorXd::Zero(nc), db = VectorXd::Zero(nc);
      for (int q = 0; q < 3; ++q) da += n(q) * ja.grad(q).col(0), db += n(q) * jb.grad(q).col(0);
      full = std::max(full, cs.family == "h1_vec3" ? (da - db).norm() : (a - b).norm());
      scale = std::max(scale, std::max(a.norm(), b.norm()));
    }
    r.expect_le(cs.family + ".jump of " + cs.trace, rel(jump, scale), 1e-9);
    r.expect_ge(cs.family + (cs.family == "h1_vec3" ? ".normal derivative jump is nonzero" : ".full jump is nonzero"),
                rel(full, scale), 1e-6);
    r.data[cs.family] = {{"shared_dofs", matched}, {"trace_jump", rel(jump, scale)}, {"full_jump", rel(full, scale)}};
  }

  // Edge functionals: rotating (n1, n2) about t leaves their span unchanged.
  {
    const Simplex s = reference_simplex(3);
    FiniteElement a = element_3d("hsymcurl_T", k, s);
    Element3Options o;
    o.edge_frame_angle = 0.3 + 2.0 * u(rng);
    FiniteElement b = element_3d("hsymcurl_T", k, s, {0, 1, 2, 3}, o);
    auto edge_rows = [](const FiniteElement& e, int ent) {
      return rows_where(e, [ent](const DofBlock& bl) { return bl.attach == Attach::edge && bl.entity == ent; });
    };
    int bad = 0;
    for (int ei = 0; ei < 6; ++ei) {
      MatrixXd ra = select_rows(a.vandermonde, edge_rows(a, ei)), rb = select_rows(b.vandermonde, edge_rows(b, ei));
      if (!same_span(ra.transpose(), rb.transpose()) || numerical_rank(ra) != ra.rows()) ++bad;
    }
    r.expect_eq("edge functional span independent of normal pair", 0, bad, "oracle");
    r.expect_ge("rotated element unisolvent", b.condition_ratio(), 1e-9);
    r.data["frame_angle"] = o.edge_frame_angle;
  }
  return r;
}

}  // namespace divdiv
