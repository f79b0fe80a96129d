#include "divdiv/fe2d.hpp"

#include "fe_util.hpp"

#include <random>
#include <stdexcept>

namespace divdiv {

using namespace detail;

namespace {

struct Tri {
  Simplex s;
  FaceFrame fr;
  std::array<Simplex, 3> edge;  // edge i is opposite vertex i
};

Tri make_tri(const Simplex& s) {
  Tri t;
  t.s = s;
  t.fr = make_face_frame(s.x[0], s.x[1], s.x[2]);
  for (int i = 0; i < 3; ++i) {
    std::vector<int> l;
    for (int j = 0; j < 3; ++j)
      if (j != i) l.push_back(j);
    t.edge[i] = sub_simplex(s, l);
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
  for (int v = 0; v < e.cell.nvert(); ++v)
    e.blocks.push_back(point_block(label, Attach::vertex, v, e.cell.x[v], order, static_cast<int>(rows.rows()),
                                   linear_trace(rows)));
}

void build_h1_scalar(FiniteElement& e, const Tri& t) {
  const int k = e.k;
  e.shape = space(t.s, k + 2, Range::scalar);
  VectorXd one = VectorXd::Ones(1);
  const Vec3 &t1 = t.fr.t1, &t2 = t.fr.t2;
  add_vertices(e, "value+grad+hess", 2,
               stack({jet_value(1, 2, one), jet_deriv(1, 2, one, t1), jet_deriv(1, 2, one, t2),
                      jet_deriv2(1, 2, one, t1, t1), jet_deriv2(1, 2, one, t1, t2), jet_deriv2(1, 2, one, t2, t2)}));
  for (int i = 0; i < 3; ++i)
    add_moment(e, "edge p", Attach::edge, i, t.edge[i], 0, jet_value(1, 0, one), scalar_tests(t.edge[i], k - 4));
  add_moment(e, "interior p", Attach::interior, 0, t.s, 0, jet_value(1, 0, one),
             members(constrained_subspace(SubspaceTag::vanish_vertices, t.s, k)));
}

void build_hrot_vec(FiniteElement& e, const Tri& t) {
  const int k = e.k;
  e.shape = space(t.s, k + 1, Range::R2);
  const std::array<Vec3, 2> tt{t.fr.t1, t.fr.t2};
  std::vector<MatrixXd> rows;
  for (const auto& a : tt) rows.push_back(jet_value(3, 1, a));
  for (const auto& a : tt)
    for (const auto& b : tt) rows.push_back(jet_deriv(3, 1, a, b));
  add_vertices(e, "value+grad", 1, stack(rows));
  for (int i = 0; i < 3; ++i) {
    const Vec3& te = t.fr.t_bdy[i];
    add_moment(e, "edge u.t", Attach::edge, i, t.edge[i], 0, jet_value(3, 0, te), scalar_tests(t.edge[i], k - 3));
    add_moment(e, "edge rot_f u", Attach::edge, i, t.edge[i], 1,
               jet_op(3, 1, DiffOp::rot_f, t.fr.n, MatrixXd::Identity(1, 1)), scalar_tests(t.edge[i], k - 2));
  }
  add_moment(e, "interior u", Attach::interior, 0, t.s, 0, jet_values(3, 0), rot_face_tests(t.s, k));
}

void build_l2_lagrange(FiniteElement& e, const Tri& t) {
  const int k = e.k;
  e.shape = space(t.s, k, Range::scalar);
  VectorXd one = VectorXd::Ones(1);
  add_vertices(e, "value", 0, jet_value(1, 0, one));
  for (int i = 0; i < 3; ++i)
    add_moment(e, "edge p", Attach::edge, i, t.edge[i], 0, jet_value(1, 0, one), scalar_tests(t.edge[i], k - 2));
  add_moment(e, "interior p", Attach::interior, 0, t.s, 0, jet_value(1, 0, one), scalar_tests(t.s, k - 3));
}

void build_h1_vec(FiniteElement& e, const Tri& t) {
  const int k = e.k;
  e.shape = space(t.s, k + 2, Range::R2);
  const std::array<Vec3, 2> tt{t.fr.t1, t.fr.t2};
  std::vector<MatrixXd> rows;
  for (const auto& a : tt) {
    rows.push_back(jet_value(3, 2, a));
    rows.push_back(jet_deriv(3, 2, a, tt[0]));
    rows.push_back(jet_deriv(3, 2, a, tt[1]));
    rows.push_back(jet_deriv2(3, 2, a, tt[0], tt[0]));
    rows.push_back(jet_deriv2(3, 2, a, tt[0], tt[1]));
    rows.push_back(jet_deriv2(3, 2, a, tt[1], tt[1]));
  }
  add_vertices(e, "value+grad+hess", 2, stack(rows));
  for (int i = 0; i < 3; ++i)
    add_moment(e, "edge u", Attach::edge, i, t.edge[i], 0, jet_values(3, 0),
               times_vectors(scalar_tests(t.edge[i], k - 4), {tt[0], tt[1]}));
  add_moment(e, "interior u", Attach::interior, 0, t.s, 0, jet_values(3, 0),
             members(constrained_subspace(SubspaceTag::vanish_vertices_vec, t.s, k)));
}

void build_hrotrot_s2(FiniteElement& e, const Tri& t) {
  const int k = e.k;
  e.shape = space(t.s, k + 1, Range::S2);
  const std::array<Vec3, 2> tt{t.fr.t1, t.fr.t2};
  const std::array<std::array<int, 2>, 3> pairs{{{0, 0}, {0, 1}, {1, 1}}};
  std::vector<MatrixXd> rows;
  for (const auto& p : pairs) rows.push_back(jet_value(9, 1, from_mat3(tt[p[0]] * tt[p[1]].transpose())));
  for (const auto& d : tt)
    for (const auto& p : pairs) rows.push_back(jet_deriv(9, 1, from_mat3(tt[p[0]] * tt[p[1]].transpose()), d));
  add_vertices(e, "value+grad", 1, stack(rows));
  for (int i = 0; i < 3; ++i) {
    const Vec3& te = t.fr.t_bdy[i];
    const Vec3& ne = t.fr.n_bdy[i];
    add_moment(e, "edge t^T tau t", Attach::edge, i, t.edge[i], 0, jet_value(9, 0, from_mat3(te * te.transpose())),
               scalar_tests(t.edge[i], k - 3));
    MatrixXd r = -jet_deriv(9, 1, from_mat3(ne * te.transpose()), te) +
                 jet_op(9, 1, DiffOp::rot_f, t.fr.n, te.transpose());
    add_moment(e, "edge -d_t(n^T tau t) + t^T rot_f tau", Attach::edge, i, t.edge[i], 1, r,
               scalar_tests(t.edge[i], k - 2));
  }
  add_moment(e, "interior tau", Attach::interior, 0, t.s, 0, jet_values(9, 0), rotrot_face_tests(t.s, k));
}

}  // namespace

const std::vector<std::string>& families_2d() {
  static const std::vector<std::string> f{"h1_scalar", "hrot_vec", "l2_lagrange", "h1_vec", "hrotrot_s2"};
  return f;
}

DofTally tally_2d(const std::string& family, int k) {
  require_k(k, "tally_2d");
  const int pk1 = k * (k + 1) / 2;  // dim P_{k-1}(f)
  if (family == "h1_scalar") return {18, 3 * (k - 3), 0, pk1 - 3};
  if (family == "hrot_vec") return {18, 3 * (k - 2) + 3 * (k - 1), 0, k * k - k - 3};
  if (family == "l2_lagrange") return {3, 3 * (k - 1), 0, (k - 1) * (k - 2) / 2};
  if (family == "h1_vec") return {36, 6 * (k - 3), 0, 2 * (pk1 - 3)};
  if (family == "hrotrot_s2") return {27, 3 * (k - 2) + 3 * (k - 1), 0, 3 * pk1 - 9};
  throw std::invalid_argument("unknown 2-D family: " + family);
}

FiniteElement element_2d(const std::string& family, int k, const Simplex& tri, std::vector<int> gids) {
  require_k(k, "element_2d");
  if (tri.dim != 2) throw std::invalid_argument("element_2d: triangle expected");
  FiniteElement e;
  e.family = family;
  e.k = k;
  e.cell = sorted_simplex(tri, gids);
  e.gids = gids;
  Tri t = make_tri(e.cell);
  if (family == "h1_scalar") build_h1_scalar(e, t);
  else if (family == "hrot_vec") build_hrot_vec(e, t);
  else if (family == "l2_lagrange") build_l2_lagrange(e, t);
  else if (family == "h1_vec") build_h1_vec(e, t);
  else if (family == "hrotrot_s2") build_hrotrot_s2(e, t);
  else throw std::invalid_argument("unknown 2-D family: " + family);
  finalize(e);
  return e;
}

FiniteElement element_2d(const std::string& family, int k) { return element_2d(family, k, reference_simplex(2)); }

std::vector<int> boundary_rows(const FiniteElement& e) {
  return rows_where(e, [](const DofBlock& b) { return b.attach != Attach::interior; });
}

Report unisolvence_audit_2d(const std::string& family, int k, int cells, unsigned seed) {
  Report r;
  r.command = "unisolvence " + family;
  r.inputs = {{"family", family}, {"k", k}, {"cells", cells}, {"seed", seed}};
  DofTally tl = tally_2d(family, k);
  std::mt19937_64 rng(seed);
  Json ratios = Json::array();
  double worst = 1.0;
  for (int c = 0; c <= cells; ++c) {
    Simplex s = c == 0 ? reference_simplex(2) : random_simplex(2, rng);
    FiniteElement e = element_2d(family, k, s);
    if (c == 0) {
      r.expect_eq("dofs", tl.total(), e.ndofs(), "formula");
      r.expect_eq("dofs = dim shape", e.shape.dim(), e.ndofs(), "oracle");
      r.expect_eq("vertex dofs", tl.vertex, e.count(Attach::vertex), "formula");
      r.expect_eq("edge dofs", tl.edge, e.count(Attach::edge), "formula");
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

namespace {

// |a op b| / (|a| |op| |b|)
double rel_norm(const MatrixXd& a, const MatrixXd& op, const MatrixXd& b) {
  return rel((a * op * b).norm(), a.norm() * op.norm() * b.norm());
}

MatrixXd bubbles(const FiniteElement& e) { return nullspace(select_rows(e.vandermonde, boundary_rows(e))); }

}  // namespace

Report bubble_audit_2d(int k) {
  require_k(k, "bubble_audit_2d");
  Report r;
  r.command = "bubble complexes 2d";
  r.inputs = {{"k", k}};
  const Simplex s = reference_simplex(2);
  const int pk1 = k * (k + 1) / 2;
  const int pk3 = (k - 1) * (k - 2) / 2;

  // de Rham: B_{k+2,grad} -> B_{k+1,rot} -> B_{k,0}/P_0
  {
    FiniteElement h1 = element_2d("h1_scalar", k, s), hr = element_2d("hrot_vec", k, s),
                  l2 = element_2d("l2_lagrange", k, s);
    MatrixXd b0 = bubbles(h1), b1 = bubbles(hr), b2 = bubbles(l2);
    r.expect_eq("derham.dim B_h1", pk1 - 3, b0.cols(), "formula");
    r.expect_eq("derham.dim B_rot", k * k - k - 3, b1.cols(), "formula");
    r.expect_eq("derham.dim B_l2", pk3, b2.cols(), "formula");
    DiffMatrix g = diff(DiffOp::grad_f, h1.shape);
    DiffMatrix rt = diff(DiffOp::rot_f, hr.shape);
    MatrixXd gb = g.mat * b0, rb = rt.mat * b1;
    const double sg = g.mat.norm(), sr = rt.mat.norm();
    MatrixXd hr_bdy = select_rows(hr.vandermonde, boundary_rows(hr));
    MatrixXd l2_bdy = select_rows(l2.vandermonde, boundary_rows(l2));
    r.expect_le("derham.grad_f bubbles are rot bubbles", rel_norm(hr_bdy, g.mat, b0), 1e-10);
    r.expect_le("derham.rot_f bubbles are L2 bubbles", rel_norm(l2_bdy, rt.mat, b1), 1e-10);
    // Mean value of rot_f of bubbles; scalar shape basis is Bernstein.
    double mean = 0.0;
    for (int j = 0; j < rb.cols(); ++j) {
      PolyField f = l2.shape.combination(rb.col(j));
      mean = std::max(mean, std::abs(integrate(f)(0)));
    }
    r.expect_le("derham.rot_f image has zero mean", rel(mean, sr), 1e-10);
    const int rg = rank_scaled(gb, sg), rr = rank_scaled(rb, sr);
    r.expect_eq("derham.grad_f injective on bubbles", b0.cols(), rg, "oracle");
    r.expect_eq("derham.ker rot_f = im grad_f", b1.cols() - rr, rg, "oracle");
    r.expect_eq("derham.dim rot_f image", pk3 - 1, rr, "formula");
    r.expect_le("derham.rot_f grad_f = 0", rel((rt.mat * g.mat).norm(), rt.mat.norm() * g.mat.norm()), 1e-12);
    // Closed form B_{k,0} = b_f P_{k-3}(f).
    std::vector<PolyField> closed;
    for (const auto& q : scalar_tests(s, k - 3))
      closed.push_back(multiply_barycentric(multiply_barycentric(multiply_barycentric(q, 0), 1), 2));
    MatrixXd cc(l2.shape.dim(), closed.size());
    for (size_t i = 0; i < closed.size(); ++i) cc.col(i) = coords(l2.shape, closed[i]);
    MatrixXd both(cc.rows(), cc.cols() + b2.cols());
    both << cc, b2;
    r.expect_eq("derham.B_l2 = b_f P_{k-3}", b2.cols(), numerical_rank(both), "oracle");
    r.data["derham"] = {{"dim_B_h1", b0.cols()}, {"dim_B_rot", b1.cols()}, {"dim_B_l2", b2.cols()},
                        {"rank_grad_f", rg}, {"rank_rot_f", rr}};
  }

  // strain: B_{k+2,eps} -> B_{k+1,rotrot} -> P_{k-1}/P_1
  {
    FiniteElement hv = element_2d("h1_vec", k, s), hs = element_2d("hrotrot_s2", k, s);
    MatrixXd b0 = bubbles(hv), b1 = bubbles(hs);
    r.expect_eq("strain.dim B_eps", 2 * (pk1 - 3), b0.cols(), "formula");
    r.expect_eq("strain.dim B_rotrot", 3 * pk1 - 9, b1.cols(), "formula");
    DiffMatrix ep = diff(DiffOp::eps_f, hv.shape);
    DiffMatrix rr = diff(DiffOp::rotrot_f, hs.shape);
    MatrixXd eb = ep.mat * b0, rb = rr.mat * b1;
    const double se = ep.mat.norm(), sr = rr.mat.norm();
    MatrixXd hs_bdy = select_rows(hs.vandermonde, boundary_rows(hs));
    r.expect_le("strain.eps_f bubbles are rotrot bubbles", rel_norm(hs_bdy, ep.mat, b0), 1e-10);
    std::vector<PolyField> img, p1 = scalar_tests(s, 1);
    for (int j = 0; j < rb.cols(); ++j) img.push_back(rr.dst.combination(rb.col(j)));
    double orth = img.empty() ? 0.0 : inner_products(img, p1).cwiseAbs().maxCoeff();
    r.expect_le("strain.rotrot_f image orthogonal to P1", rel(orth, sr), 1e-10);
    const int re = rank_scaled(eb, se), rrk = rank_scaled(rb, sr);
    r.expect_eq("strain.eps_f injective on bubbles", b0.cols(), re, "oracle");
    r.expect_eq("strain.ker rotrot_f = im eps_f", b1.cols() - rrk, re, "oracle");
    r.expect_eq("strain.dim rotrot_f image", pk1 - 3, rrk, "formula");
    r.expect_le("strain.rotrot_f eps_f = 0", rel((rr.mat * ep.mat).norm(), rr.mat.norm() * ep.mat.norm()), 1e-12);
    r.data["strain"] = {{"dim_B_eps", b0.cols()}, {"dim_B_rotrot", b1.cols()}, {"rank_eps_f", re},
                        {"rank_rotrot_f", rrk}};
  }
  return r;
}

}  // namespace divdiv
