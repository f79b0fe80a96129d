#include "divdiv/poly.hpp"

#include <stdexcept>

namespace divdiv {

namespace {

struct Link {
  std::string name;
  DiffMatrix d;
  int rank = 0;
};

Link make_link(DiffOp op, const PolySpace& src) {
  Link l;
  l.name = op_name(op);
  l.d = diff(op, src);
  l.rank = numerical_rank(l.d.mat);
  return l;
}

double composition(const Link& a, const Link& b) {
  double s = a.d.mat.norm() * b.d.mat.norm();
  return s > 0 ? (b.d.mat * a.d.mat).norm() / s : 0.0;
}

// Columns: coordinates of the fields in the space.
MatrixXd field_coords(const PolySpace& p, const std::vector<PolyField>& f) {
  MatrixXd c(p.dim(), f.size());
  auto qr = p.basis.transpose().colPivHouseholderQr();
  for (size_t i = 0; i < f.size(); ++i) c.col(i) = qr.solve(elevate(f[i], p.degree).flat());
  return c;
}

// rank of [kernel | fields] minus dim kernel: 0 iff the fields lie in the kernel.
int excess_rank(const MatrixXd& kernel, const MatrixXd& fields) {
  MatrixXd both(kernel.rows(), kernel.cols() + fields.cols());
  both << kernel, fields;
  return numerical_rank(both) - static_cast<int>(kernel.cols());
}

void chain(Report& r, const std::string& tag, const PolySpace& head, const std::vector<Link>& links, int head_dim,
           const std::vector<int>& expected_ranks) {
  Json ranks = Json::array();
  for (size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    r.expect_eq(tag + ".rank " + l.name, expected_ranks[i], l.rank, "formula");
    ranks.push_back({{"op", l.name}, {"src_dim", l.d.src.dim()}, {"dst_dim", l.d.dst.dim()}, {"rank", l.rank}});
    if (i + 1 < links.size()) {
      r.expect_le(tag + "." + links[i + 1].name + " o " + l.name + " = 0", composition(l, links[i + 1]), 1e-12);
      r.expect_eq(tag + ".ker " + links[i + 1].name + " = im " + l.name, l.d.dst.dim() - links[i + 1].rank, l.rank,
                  "oracle");
    }
  }
  r.expect_eq(tag + ".dim head kernel", head_dim, head.dim() - links[0].rank, "formula");
  const Link& last = links.back();
  r.expect_eq(tag + ".tail surjective", last.d.dst.dim(), last.rank, "oracle");
  r.data[tag] = ranks;
}

}  // namespace

Report poly_complex_audit(int dim, int k) {
  if (k < 3) throw std::invalid_argument("poly_complex_audit: k >= 3 required");
  if (dim != 2 && dim != 3) throw std::invalid_argument("poly_complex_audit: dim must be 2 or 3");
  Report r;
  r.command = "poly complex";
  r.inputs = {{"dim", dim}, {"k", k}};
  const Simplex s = reference_simplex(dim);
  const Vec3 c = s.centroid();
  auto affine = [&](const std::function<Vec3(const Vec3&)>& fn) {
    return interpolate_poly(s, 1, 3, [&](const Vec3& x) -> VectorXd { return fn(x); });
  };
  auto nm = [](int d, int n) { return num_monomials(d + 1, n); };
  if (dim == 3) {
    PolySpace v = space(s, k + 2, Range::R3);
    Link d1 = make_link(DiffOp::devgrad, v);
    Link d2 = make_link(DiffOp::symcurl, d1.d.dst);
    Link d3 = make_link(DiffOp::divdiv, d2.d.dst);
    const int dv = 3 * nm(3, k + 2), dq = nm(3, k - 2);
    chain(r, "3d", v, {d1, d2, d3}, 4, {dv - 4, 8 * nm(3, k + 1) - (dv - 4), dq});
    r.expect_eq("3d.divdiv degree drop (tail degree k-2)", k - 2, d3.d.dst.degree, "oracle");
    std::vector<PolyField> rt;
    for (int i = 0; i < 3; ++i) rt.push_back(affine([&](const Vec3&) -> Vec3 { return Vec3::Unit(i); }));
    rt.push_back(affine([&](const Vec3& x) -> Vec3 { return x - c; }));
    MatrixXd kern = nullspace(d1.d.mat);
    r.expect_eq("3d.head kernel = RT", 0, excess_rank(kern, field_coords(v, rt)), "oracle");
  } else {
    PolySpace p = space(s, k + 2, Range::scalar);
    Link g = make_link(DiffOp::grad_f, p);
    Link rt = make_link(DiffOp::rot_f, g.d.dst);
    chain(r, "derham", p, {g, rt}, 1, {nm(2, k + 2) - 1, nm(2, k)});
    PolySpace v = space(s, k + 2, Range::R2);
    Link e = make_link(DiffOp::eps_f, v);
    Link rr = make_link(DiffOp::rotrot_f, e.d.dst);
    chain(r, "strain", v, {e, rr}, 3, {2 * nm(2, k + 2) - 3, nm(2, k - 1)});
    const Vec3 n = s.normal;
    std::vector<PolyField> rigid, dil;
    for (int i = 0; i < 2; ++i) rigid.push_back(affine([&](const Vec3&) -> Vec3 { return Vec3::Unit(i); }));
    rigid.push_back(affine([&](const Vec3& x) -> Vec3 { return n.cross(x - c); }));
    dil.push_back(affine([&](const Vec3& x) -> Vec3 { return x - c; }));
    MatrixXd kern = nullspace(e.d.mat);
    r.expect_eq("strain.head kernel = rigid motions a + b x^perp", 0, excess_rank(kern, field_coords(v, rigid)),
                "oracle");
    // a + b x is not in the kernel: eps_f(x) is the identity on the plane.
    r.expect_eq("strain.dilation x not in head kernel", 1, excess_rank(kern, field_coords(v, dil)), "oracle");
  }
  return r;
}

}  // namespace divdiv
