#include "divdiv/poly.hpp"

#include "divdiv/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace divdiv {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

uint32_t pack(const std::array<int, 4>& a) {
  return static_cast<uint32_t>(a[0] | (a[1] << 8) | (a[2] << 16) | (a[3] << 24));
}

struct IndexTable {
  std::vector<std::array<int, 4>> list;
  std::unordered_map<uint32_t, int> pos;
  std::vector<std::array<int, 4>> down;  // position of alpha - e_j in degree-1, or -1
  std::vector<std::array<int, 4>> up;    // position of alpha + e_j in degree+1
};

void enumerate(int nvars, int var, int left, std::array<int, 4>& cur, std::vector<std::array<int, 4>>& out) {
  if (var == nvars - 1) {
    cur[var] = left;
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int a = left; a >= 0; --a) {
    cur[var] = a;
    enumerate(nvars, var + 1, left - a, cur, out);
  }
  cur[var] = 0;
}

const IndexTable& table(int nvars, int degree) {
  require(nvars >= 1 && nvars <= 4 && degree >= 0 && degree < 64, "multi_indices: bad arguments");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<IndexTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nvars, degree}];
  if (!slot) {
    slot = std::make_unique<IndexTable>();
    std::array<int, 4> cur{0, 0, 0, 0};
    enumerate(nvars, 0, degree, cur, slot->list);
    for (size_t i = 0; i < slot->list.size(); ++i) slot->pos[pack(slot->list[i])] = static_cast<int>(i);
  }
  return *slot;
}

int lookup(int nvars, int degree, const std::array<int, 4>& a) {
  const IndexTable& t = table(nvars, degree);
  return t.pos.at(pack(a));
}

// Neighbor tables are filled lazily under their own lock.
const IndexTable& table_with_neighbors(int nvars, int degree) {
  const IndexTable& t = table(nvars, degree);
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (t.up.empty()) {
    auto& tt = const_cast<IndexTable&>(t);
    std::vector<std::array<int, 4>> down(t.list.size()), up(t.list.size());
    for (size_t m = 0; m < t.list.size(); ++m)
      for (int j = 0; j < 4; ++j) {
        auto a = t.list[m];
        down[m][j] = -1;
        up[m][j] = -1;
        if (j >= nvars) continue;
        if (a[j] > 0) {
          --a[j];
          down[m][j] = lookup(nvars, degree - 1, a);
          ++a[j];
        }
        ++a[j];
        up[m][j] = lookup(nvars, degree + 1, a);
      }
    tt.down = std::move(down);
    tt.up = std::move(up);
  }
  return t;
}

int degree_of(const std::array<int, 4>& a) { return a[0] + a[1] + a[2] + a[3]; }

}  // namespace

Simplex Simplex::make(const std::vector<Vec3>& verts) {
  require(verts.size() >= 2 && verts.size() <= 4, "Simplex: 2 to 4 vertices expected");
  Simplex s;
  s.dim = static_cast<int>(verts.size()) - 1;
  for (int i = 0; i <= s.dim; ++i) s.x[i] = verts[i];
  Eigen::Matrix<double, 3, Eigen::Dynamic> e(3, s.dim);
  for (int i = 0; i < s.dim; ++i) e.col(i) = verts[i + 1] - verts[0];
  Eigen::MatrixXd g = e.transpose() * e;
  double det = g.determinant();
  double scale = 1.0;
  for (int i = 0; i < s.dim; ++i) scale *= g(i, i);
  require(det > 1e-24 * scale && scale > 0.0, "Simplex: degenerate geometry");
  Eigen::MatrixXd gl = g.inverse() * e.transpose();  // dim x 3
  s.grad_lambda.setZero();
  for (int i = 0; i < s.dim; ++i) s.grad_lambda.row(i + 1) = gl.row(i);
  for (int i = 0; i < s.dim; ++i) s.grad_lambda.row(0) -= gl.row(i);
  s.measure = std::sqrt(det) / factorial(s.dim);
  if (s.dim == 2) s.normal = e.col(0).cross(e.col(1)).normalized();
  return s;
}

Simplex reference_simplex(int dim) {
  std::vector<Vec3> v{Vec3::Zero()};
  for (int i = 0; i < dim; ++i) v.push_back(Vec3::Unit(i));
  return Simplex::make(v);
}

Simplex random_simplex(int dim, std::mt19937_64& rng) {
  require(dim >= 1 && dim <= 3, "random_simplex: dim must be 1, 2 or 3");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Mat3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = u(rng);
    Vec3 b(u(rng), u(rng), u(rng));
    std::vector<Vec3> v{b};
    for (int i = 0; i < dim; ++i) v.push_back(b + a.col(i));
    Eigen::MatrixXd e = a.leftCols(dim);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    const auto& sv = svd.singularValues();
    if (sv(dim - 1) < 0.25 * sv(0)) continue;
    if (dim == 3 && a.determinant() < 0) std::swap(v[1], v[2]);
    return Simplex::make(v);
  }
}

Bary Simplex::barycentric(const Vec3& p) const {
  Bary lam = Bary::Zero();
  double s = 0.0;
  for (int i = 1; i <= dim; ++i) {
    lam(i) = grad_lambda.row(i).dot(p - x[0]);
    s += lam(i);
  }
  lam(0) = 1.0 - s;
  return lam;
}

Vec3 Simplex::point(const Bary& lam) const {
  Vec3 p = Vec3::Zero();
  for (int i = 0; i <= dim; ++i) p += lam(i) * x[i];
  return p;
}

Vec3 Simplex::centroid() const {
  Vec3 c = Vec3::Zero();
  for (int i = 0; i <= dim; ++i) c += x[i];
  return c / (dim + 1);
}

const std::vector<std::array<int, 4>>& multi_indices(int nvars, int degree) { return table(nvars, degree).list; }

int multi_index_pos(int nvars, const std::array<int, 4>& alpha) {
  const auto& t = table(nvars, degree_of(alpha));
  auto it = t.pos.find(pack(alpha));
  require(it != t.pos.end(), "multi_index_pos: index out of range");
  return it->second;
}

int num_monomials(int nvars, int degree) {
  if (degree < 0) return 0;
  double c = 1.0;
  for (int i = 1; i < nvars; ++i) c = c * (degree + i) / i;
  return static_cast<int>(std::lround(c));
}

VectorXd bernstein_values(int nvars, int degree, const Bary& lam) {
  const auto& idx = multi_indices(nvars, degree);
  VectorXd b(idx.size());
  const double nf = factorial(degree);
  for (size_t m = 0; m < idx.size(); ++m) {
    double v = nf;
    for (int j = 0; j < nvars; ++j) v *= std::pow(lam(j), idx[m][j]) / factorial(idx[m][j]);
    b(m) = v;
  }
  return b;
}

MatrixXd bernstein_jets(const Simplex& s, int degree, const Bary& lam) {
  const int nv = s.nvert();
  const auto& idx = multi_indices(nv, degree);
  MatrixXd out = MatrixXd::Zero(13, idx.size());
  out.row(0) = bernstein_values(nv, degree, lam).transpose();
  if (degree >= 1) {
    const auto& t = table_with_neighbors(nv, degree);
    VectorXd b1 = bernstein_values(nv, degree - 1, lam);
    for (size_t m = 0; m < idx.size(); ++m)
      for (int j = 0; j < nv; ++j) {
        if (t.down[m][j] < 0) continue;
        double v = degree * b1(t.down[m][j]);
        for (int q = 0; q < 3; ++q) out(1 + q, m) += v * s.grad_lambda(j, q);
      }
  }
  if (degree >= 2) {
    const auto& t = table_with_neighbors(nv, degree);
    const auto& t1 = table_with_neighbors(nv, degree - 1);
    VectorXd b2 = bernstein_values(nv, degree - 2, lam);
    for (size_t m = 0; m < idx.size(); ++m)
      for (int j = 0; j < nv; ++j) {
        int mj = t.down[m][j];
        if (mj < 0) continue;
        for (int l = 0; l < nv; ++l) {
          int ml = t1.down[mj][l];
          if (ml < 0) continue;
          double v = degree * (degree - 1) * b2(ml);
          for (int r = 0; r < 3; ++r)
            for (int q = 0; q < 3; ++q) out(4 + 3 * r + q, m) += v * s.grad_lambda(j, q) * s.grad_lambda(l, r);
        }
      }
  }
  return out;
}

int range_ncomp(Range r) {
  switch (r) {
    case Range::scalar: return 1;
    case Range::R2:
    case Range::R3: return 3;
    default: return 9;
  }
}

const char* range_name(Range r) {
  switch (r) {
    case Range::scalar: return "scalar";
    case Range::R2: return "R2";
    case Range::R3: return "R3";
    case Range::S2: return "S2";
    case Range::S: return "S";
    case Range::T: return "T";
    case Range::M: return "M";
  }
  return "?";
}

Range parse_range(const std::string& name) {
  for (Range r : {Range::scalar, Range::R2, Range::R3, Range::S2, Range::S, Range::T, Range::M})
    if (name == range_name(r)) return r;
  throw std::invalid_argument("unknown range: " + name);
}

MatrixXd range_generators(Range r, const Simplex& s) {
  auto unit = [](int i, int j) {
    Mat3 m = Mat3::Zero();
    m(i, j) = 1.0;
    return m;
  };
  std::vector<Mat3> mats;
  switch (r) {
    case Range::scalar: return MatrixXd::Ones(1, 1);
    case Range::R3: return MatrixXd::Identity(3, 3);
    case Range::R2: {
      require(s.dim == 2, "range R2 requires a triangle");
      Vec3 t1 = (s.x[1] - s.x[0]).normalized();
      Vec3 t2 = s.normal.cross(t1);
      MatrixXd g(3, 2);
      g << t1, t2;
      return g;
    }
    case Range::S2: {
      require(s.dim == 2, "range S2 requires a triangle");
      Vec3 t1 = (s.x[1] - s.x[0]).normalized();
      Vec3 t2 = s.normal.cross(t1);
      mats = {t1 * t1.transpose(), t2 * t2.transpose(),
              (t1 * t2.transpose() + t2 * t1.transpose()) / std::sqrt(2.0)};
      break;
    }
    case Range::S: {
      require(s.dim == 3, "range S requires a tetrahedron");
      const double h = 1.0 / std::sqrt(2.0);
      mats = {unit(0, 0), unit(1, 1), unit(2, 2), h * (unit(0, 1) + unit(1, 0)),
              h * (unit(0, 2) + unit(2, 0)), h * (unit(1, 2) + unit(2, 1))};
      break;
    }
    case Range::T:
      require(s.dim == 3, "range T requires a tetrahedron");
      mats = {unit(0, 1), unit(0, 2), unit(1, 0), unit(1, 2), unit(2, 0), unit(2, 1),
              unit(0, 0) - unit(2, 2), unit(1, 1) - unit(2, 2)};
      break;
    case Range::M:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mats.push_back(unit(i, j));
      break;
  }
  MatrixXd g(9, mats.size());
  for (size_t i = 0; i < mats.size(); ++i) g.col(i) = from_mat3(mats[i]);
  return g;
}

PolyField PolyField::zero(const Simplex& s, int degree, int ncomp) {
  PolyField f;
  f.cell = s;
  f.degree = degree;
  f.ncomp = ncomp;
  f.coef = MatrixXd::Zero(num_monomials(s.nvert(), degree), ncomp);
  return f;
}

VectorXd PolyField::value(const Bary& lam) const {
  return coef.transpose() * bernstein_values(cell.nvert(), degree, lam);
}

Jet PolyField::jet(const Vec3& p, int order) const {
  MatrixXd bj = bernstein_jets(cell, degree, cell.barycentric(p));
  Jet j(ncomp, order, 1);
  const int levels = Jet::levels_rows(1, order);
  for (int l = 0; l < levels; ++l) j.data().block(l * ncomp, 0, ncomp, 1) = coef.transpose() * bj.row(l).transpose();
  return j;
}

VectorXd PolyField::flat() const {
  VectorXd v(coef.size());
  for (int c = 0; c < ncomp; ++c) v.segment(c * coef.rows(), coef.rows()) = coef.col(c);
  return v;
}

PolyField partial(const PolyField& f, int q) {
  if (f.degree == 0) return PolyField::zero(f.cell, 0, f.ncomp);
  const int nv = f.cell.nvert();
  PolyField out = PolyField::zero(f.cell, f.degree - 1, f.ncomp);
  const auto& t = table_with_neighbors(nv, f.degree);
  for (size_t m = 0; m < t.list.size(); ++m)
    for (int j = 0; j < nv; ++j) {
      double g = f.cell.grad_lambda(j, q);
      if (t.down[m][j] < 0 || g == 0.0) continue;
      out.coef.row(t.down[m][j]) += f.degree * g * f.coef.row(m);
    }
  return out;
}

PolyField field_gradient(const PolyField& f) {
  PolyField out = PolyField::zero(f.cell, std::max(f.degree - 1, 0), 3 * f.ncomp);
  for (int q = 0; q < 3; ++q) out.coef.middleCols(q * f.ncomp, f.ncomp) = partial(f, q).coef;
  return out;
}

PolyField apply_linear(const MatrixXd& l, const PolyField& f) {
  require(l.cols() == f.ncomp, "apply_linear: component mismatch");
  PolyField out = f;
  out.ncomp = static_cast<int>(l.rows());
  out.coef = f.coef * l.transpose();
  return out;
}

PolyField apply_diff(DiffOp op, const PolyField& f) {
  Vec3 n = f.cell.dim == 2 ? f.cell.normal : Vec3::UnitZ();
  OpSpec s = op_spec(op, f.ncomp, n);
  PolyField g = field_gradient(f);
  if (s.order == 2) g = field_gradient(g);
  return apply_linear(s.map, g);
}

PolyField elevate(const PolyField& f, int degree) {
  require(degree >= f.degree, "elevate: target degree below field degree");
  PolyField cur = f;
  const int nv = f.cell.nvert();
  while (cur.degree < degree) {
    PolyField next = PolyField::zero(cur.cell, cur.degree + 1, cur.ncomp);
    const auto& t = table_with_neighbors(nv, cur.degree);
    for (size_t m = 0; m < t.list.size(); ++m)
      for (int j = 0; j < nv; ++j) {
        double w = (t.list[m][j] + 1.0) / (cur.degree + 1.0);
        next.coef.row(t.up[m][j]) += w * cur.coef.row(m);
      }
    cur = std::move(next);
  }
  return cur;
}

PolyField operator+(const PolyField& a, const PolyField& b) {
  require(a.ncomp == b.ncomp, "field sum: component mismatch");
  int d = std::max(a.degree, b.degree);
  PolyField x = elevate(a, d), y = elevate(b, d);
  x.coef += y.coef;
  return x;
}

PolyField operator*(double s, const PolyField& a) {
  PolyField x = a;
  x.coef *= s;
  return x;
}

PolyField multiply_affine(const PolyField& f, const std::function<MatrixXd(const Vec3&)>& vertex_map) {
  const int nv = f.cell.nvert();
  std::vector<MatrixXd> maps;
  for (int j = 0; j < nv; ++j) maps.push_back(vertex_map(f.cell.x[j]));
  const int nout = static_cast<int>(maps[0].rows());
  PolyField out = PolyField::zero(f.cell, f.degree + 1, nout);
  const auto& t = table_with_neighbors(nv, f.degree);
  for (int j = 0; j < nv; ++j) {
    require(maps[j].cols() == f.ncomp, "multiply_affine: component mismatch");
    MatrixXd g = f.coef * maps[j].transpose();
    for (size_t m = 0; m < t.list.size(); ++m) {
      double w = (t.list[m][j] + 1.0) / (f.degree + 1.0);
      out.coef.row(t.up[m][j]) += w * g.row(m);
    }
  }
  return out;
}

PolyField multiply_barycentric(const PolyField& f, int i) {
  const int nv = f.cell.nvert();
  require(i >= 0 && i < nv, "multiply_barycentric: bad index");
  PolyField out = PolyField::zero(f.cell, f.degree + 1, f.ncomp);
  const auto& t = table_with_neighbors(nv, f.degree);
  for (size_t m = 0; m < t.list.size(); ++m)
    out.coef.row(t.up[m][i]) += (t.list[m][i] + 1.0) / (f.degree + 1.0) * f.coef.row(m);
  return out;
}

VectorXd integrate(const PolyField& f) {
  // Every Bernstein polynomial of degree n has integral |T| / dim P_n.
  return f.coef.colwise().sum().transpose() * (f.cell.measure / f.nmono());
}

MatrixXd inner_products(const std::vector<PolyField>& a, const std::vector<PolyField>& b) {
  MatrixXd out = MatrixXd::Zero(a.size(), b.size());
  if (a.empty() || b.empty()) return out;
  int da = 0, db = 0;
  for (const auto& f : a) da = std::max(da, f.degree);
  for (const auto& f : b) db = std::max(db, f.degree);
  const Simplex& s = a[0].cell;
  const QuadRule& q = rule(s.dim, da + db);
  const double scale = s.measure / reference_measure(s.dim);
  const int nc = a[0].ncomp;
  MatrixXd va(a.size(), nc), vb(b.size(), nc);
  for (Index p = 0; p < q.size(); ++p) {
    Bary lam = Bary::Zero();
    lam.head(s.nvert()) = q.bary.row(p).transpose();
    for (size_t i = 0; i < a.size(); ++i) va.row(i) = a[i].value(lam).transpose();
    for (size_t j = 0; j < b.size(); ++j) vb.row(j) = b[j].value(lam).transpose();
    out.noalias() += (q.weights(p) * scale) * va * vb.transpose();
  }
  return out;
}

PolyField interpolate_poly(const Simplex& s, int degree, int ncomp,
                           const std::function<VectorXd(const Vec3&)>& fn) {
  const int nv = s.nvert();
  const auto& idx = multi_indices(nv, degree);
  const int nm = static_cast<int>(idx.size());
  MatrixXd b(nm, nm), vals(nm, ncomp);
  for (int p = 0; p < nm; ++p) {
    Bary lam = Bary::Zero();
    for (int j = 0; j < nv; ++j) lam(j) = degree == 0 ? 1.0 / nv : static_cast<double>(idx[p][j]) / degree;
    b.row(p) = bernstein_values(nv, degree, lam).transpose();
    vals.row(p) = fn(s.point(lam)).transpose();
  }
  PolyField out = PolyField::zero(s, degree, ncomp);
  out.coef = b.partialPivLu().solve(vals);
  return out;
}

PolyField restrict_to(const PolyField& f, const Simplex& sub) {
  return interpolate_poly(sub, f.degree, f.ncomp, [&](const Vec3& p) { return f.value_at(p); });
}

PolyField PolySpace::member(int i) const { return combination(VectorXd::Unit(dim(), i)); }

PolyField PolySpace::combination(const VectorXd& c) const {
  PolyField f = PolyField::zero(cell, degree, ncomp());
  VectorXd flat = basis.transpose() * c;
  const int nm = nmono();
  for (int k = 0; k < ncomp(); ++k) f.coef.col(k) = flat.segment(k * nm, nm);
  return f;
}

Jet PolySpace::jets(const Vec3& p, int order) const {
  MatrixXd bj = bernstein_jets(cell, degree, cell.barycentric(p));
  const int nc = ncomp(), nm = nmono();
  const int levels = Jet::levels_rows(1, order);
  Jet j(nc, order, dim());
  if (gens.size() > 0) {
    for (int g = 0; g < gens.cols(); ++g)
      for (int c = 0; c < nc; ++c) {
        double w = gens(c, g);
        if (w == 0.0) continue;
        for (int l = 0; l < levels; ++l) j.data().block(l * nc + c, g * nm, 1, nm) = w * bj.row(l);
      }
    return j;
  }
  for (int c = 0; c < nc; ++c) {
    MatrixXd v = bj.topRows(levels) * basis.middleCols(c * nm, nm).transpose();  // levels x dim
    for (int l = 0; l < levels; ++l) j.data().row(l * nc + c) = v.row(l);
  }
  return j;
}

int space_dim_formula(int cell_dim, int degree, Range r) {
  int g = 0;
  switch (r) {
    case Range::scalar: g = 1; break;
    case Range::R2: g = 2; break;
    case Range::R3: g = 3; break;
    case Range::S2: g = 3; break;
    case Range::S: g = 6; break;
    case Range::T: g = 8; break;
    case Range::M: g = 9; break;
  }
  return g * num_monomials(cell_dim + 1, degree);
}

PolySpace space(const Simplex& s, int degree, Range r) {
  require(degree >= 0, "space: degree must be nonnegative");
  MatrixXd g = range_generators(r, s);
  PolySpace p;
  p.cell = s;
  p.degree = degree;
  p.range = r;
  const int nm = num_monomials(s.nvert(), degree);
  const int nc = static_cast<int>(g.rows());
  p.basis = MatrixXd::Zero(g.cols() * nm, nc * nm);
  for (int k = 0; k < g.cols(); ++k)
    for (int m = 0; m < nm; ++m)
      for (int c = 0; c < nc; ++c) p.basis(k * nm + m, c * nm + m) = g(c, k);
  p.gens = g;
  return p;
}

PolySpace subspace(const PolySpace& p, const MatrixXd& rows) {
  PolySpace s = p;
  s.basis = rows * p.basis;
  s.gens.resize(0, 0);
  return s;
}

PolySpace span_of(const std::vector<PolyField>& fields, Range r, double tol) {
  require(!fields.empty(), "span_of: no fields");
  int d = 0;
  for (const auto& f : fields) d = std::max(d, f.degree);
  PolySpace p;
  p.cell = fields[0].cell;
  p.degree = d;
  p.range = r;
  const int nm = num_monomials(p.cell.nvert(), d);
  MatrixXd a(fields.size(), nm * fields[0].ncomp);
  for (size_t i = 0; i < fields.size(); ++i) {
    require(fields[i].ncomp == range_ncomp(r), "span_of: component mismatch");
    a.row(i) = elevate(fields[i], d).flat().transpose();
  }
  p.basis = row_space(a, tol);
  return p;
}

PolySpace span_sum(const PolySpace& a, const PolySpace& b, double tol) {
  std::vector<PolyField> f;
  for (int i = 0; i < a.dim(); ++i) f.push_back(a.member(i));
  for (int i = 0; i < b.dim(); ++i) f.push_back(b.member(i));
  return span_of(f, a.range, tol);
}

Range diff_target_range(DiffOp op, Range src, int cell_dim) {
  auto bad = [&]() -> Range {
    throw std::invalid_argument(std::string("operator ") + op_name(op) + " not applicable to range " +
                                range_name(src) + " on a " + std::to_string(cell_dim) + "-simplex");
  };
  if (cell_dim == 3) {
    switch (op) {
      case DiffOp::grad:
        if (src == Range::scalar) return Range::R3;
        if (src == Range::R3) return Range::M;
        return bad();
      case DiffOp::devgrad: return src == Range::R3 ? Range::T : bad();
      case DiffOp::symcurl: return (src == Range::T || src == Range::M || src == Range::S) ? Range::S : bad();
      case DiffOp::divdiv: return (src == Range::S || src == Range::M || src == Range::T) ? Range::scalar : bad();
      case DiffOp::curl:
        if (src == Range::R3) return Range::R3;
        if (src == Range::M || src == Range::T || src == Range::S) return Range::M;
        return bad();
      case DiffOp::div:
        if (src == Range::R3) return Range::scalar;
        if (src == Range::M || src == Range::T || src == Range::S) return Range::R3;
        return bad();
      case DiffOp::hess: return src == Range::scalar ? Range::S : bad();
      default: return bad();
    }
  }
  if (cell_dim == 2) {
    switch (op) {
      case DiffOp::grad_f:
        if (src == Range::scalar) return Range::R2;
        if (src == Range::R2) return Range::M;
        return bad();
      case DiffOp::curl_f:
        if (src == Range::scalar) return Range::R2;
        if (src == Range::R2) return Range::M;
        return bad();
      case DiffOp::rot_f:
      case DiffOp::div_f:
        if (src == Range::R2) return Range::scalar;
        if (src == Range::S2) return Range::R2;
        return bad();
      case DiffOp::eps_f: return src == Range::R2 ? Range::S2 : bad();
      case DiffOp::rotrot_f: return src == Range::S2 ? Range::scalar : bad();
      default: return bad();
    }
  }
  return bad();
}

DiffMatrix diff(DiffOp op, const PolySpace& src) {
  Range tr = diff_target_range(op, src.range, src.cell.dim);
  DiffMatrix d;
  d.op = op;
  d.src = src;
  const int order = op_spec(op, src.ncomp()).order;
  d.dst = space(src.cell, std::max(src.degree - order, 0), tr);
  MatrixXd images(d.dst.basis.cols(), src.dim());
  for (int i = 0; i < src.dim(); ++i) {
    PolyField g = apply_diff(op, src.member(i));
    if (g.degree != d.dst.degree) g = elevate(g, d.dst.degree);
    images.col(i) = g.flat();
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(d.dst.basis.transpose());
  d.mat = qr.solve(images);
  double res = (d.dst.basis.transpose() * d.mat - images).norm();
  require(res <= 1e-9 * std::max(1.0, images.norm()),
          std::string("diff: image of ") + op_name(op) + " outside target range");
  return d;
}

const char* subspace_name(SubspaceTag t) {
  switch (t) {
    case SubspaceTag::vanish_vertices: return "P_{k-1,0}(f)";
    case SubspaceTag::div_vanish: return "P_{k-1,1}(f)";
    case SubspaceTag::ddiv_vanish: return "P_{k-1,2}(f;R2)";
    case SubspaceTag::sym_x_cross_T: return "sym(x x P_{k-2}(K;T))";
    case SubspaceTag::dev_vec_xT: return "dev(P_{k-2}(K;R3) x^T)";
    case SubspaceTag::curlcurl_f_mod: return "curl_f curl_f P_{k-1}(f)";
    case SubspaceTag::curl_f_mod: return "curl_f P_{k-3}(f)";
    case SubspaceTag::hess_mod: return "hess P_{k-2}(K)";
    case SubspaceTag::face_rot_x: return "P_{k-2}(f)(n x x)";
    case SubspaceTag::vanish_vertices_vec: return "P_{k-1,0}(f;R2)";
    case SubspaceTag::vanish_vertices_R3: return "P_{k-1,0}(f;R3)";
  }
  return "?";
}

namespace {

// Rows: member i's values at the vertices (all components).
MatrixXd vertex_constraints(const PolySpace& p, const std::function<PolyField(const PolyField&)>& map) {
  const int nv = p.cell.nvert();
  std::vector<VectorXd> cols;
  MatrixXd c;
  for (int i = 0; i < p.dim(); ++i) {
    PolyField g = map(p.member(i));
    if (c.size() == 0) c = MatrixXd::Zero(nv * g.ncomp, p.dim());
    for (int j = 0; j < nv; ++j) {
      Bary lam = Bary::Zero();
      lam(j) = 1.0;
      c.block(j * g.ncomp, i, g.ncomp, 1) = g.value(lam);
    }
  }
  return c;
}

PolySpace constrained(const PolySpace& p, const std::function<PolyField(const PolyField&)>& map) {
  MatrixXd c = vertex_constraints(p, map);
  MatrixXd n = nullspace(c);
  return subspace(p, n.transpose());
}

PolyField identity_map(const PolyField& f) { return f; }

}  // namespace

PolySpace constrained_subspace(SubspaceTag tag, const Simplex& s, int k) {
  require(k >= 3, "constrained_subspace: k >= 3 required");
  const Vec3 c = s.centroid();
  auto face_only = [&]() { require(s.dim == 2, std::string(subspace_name(tag)) + " lives on a triangle"); };
  auto cell_only = [&]() { require(s.dim == 3, std::string(subspace_name(tag)) + " lives on a tetrahedron"); };
  auto times_x = [&](const PolyField& q) {
    return multiply_affine(q, [&](const Vec3& x) -> MatrixXd {
      MatrixXd m(3, 1);
      m.col(0) = x - c;
      return m;
    });
  };
  auto vec_outer_x = [&](const PolyField& v) {  // v (x-c)^T
    return multiply_affine(v, [&](const Vec3& x) -> MatrixXd {
      MatrixXd m = MatrixXd::Zero(9, 3);
      Vec3 y = x - c;
      for (int i = 0; i < 3; ++i)
        for (int l = 0; l < 3; ++l) m(mat_index(i, l), i) = y(l);
      return m;
    });
  };
  switch (tag) {
    case SubspaceTag::vanish_vertices:
      face_only();
      return constrained(space(s, k - 1, Range::scalar), identity_map);
    case SubspaceTag::vanish_vertices_vec:
      face_only();
      return constrained(space(s, k - 1, Range::R2), identity_map);
    case SubspaceTag::vanish_vertices_R3:
      face_only();
      return constrained(space(s, k - 1, Range::R3), identity_map);
    case SubspaceTag::div_vanish:
      face_only();
      return constrained(space(s, k - 1, Range::scalar),
                         [&](const PolyField& q) { return apply_diff(DiffOp::div_f, times_x(q)); });
    case SubspaceTag::ddiv_vanish:
      face_only();
      return constrained(space(s, k - 1, Range::R2), [&](const PolyField& v) {
        return apply_diff(DiffOp::div_f, apply_linear(lin_sym(), vec_outer_x(v)));
      });
    case SubspaceTag::curl_f_mod: {
      face_only();
      PolySpace p = space(s, k - 3, Range::scalar);
      std::vector<PolyField> f;
      for (int i = 0; i < p.dim(); ++i) f.push_back(apply_diff(DiffOp::curl_f, p.member(i)));
      PolySpace out = span_of(f, Range::R2);
      return out;
    }
    case SubspaceTag::curlcurl_f_mod: {
      face_only();
      PolySpace p = space(s, k - 1, Range::scalar);
      std::vector<PolyField> f;
      for (int i = 0; i < p.dim(); ++i)
        f.push_back(apply_diff(DiffOp::curl_f, apply_diff(DiffOp::curl_f, p.member(i))));
      return span_of(f, Range::S2);
    }
    case SubspaceTag::face_rot_x: {
      face_only();
      PolySpace p = space(s, k - 2, Range::scalar);
      std::vector<PolyField> f;
      for (int i = 0; i < p.dim(); ++i)
        f.push_back(multiply_affine(p.member(i), [&](const Vec3& x) -> MatrixXd {
          MatrixXd m(3, 1);
          m.col(0) = s.normal.cross(x - c);
          return m;
        }));
      return span_of(f, Range::R2);
    }
    case SubspaceTag::sym_x_cross_T: {
      cell_only();
      PolySpace p = space(s, k - 2, Range::T);
      std::vector<PolyField> f;
      for (int i = 0; i < p.dim(); ++i) {
        PolyField g = multiply_affine(p.member(i), [&](const Vec3& x) -> MatrixXd {
          return lin_left_mul(mspn(x - c));
        });
        f.push_back(apply_linear(lin_sym(), g));
      }
      return span_of(f, Range::S);
    }
    case SubspaceTag::dev_vec_xT: {
      cell_only();
      PolySpace p = space(s, k - 2, Range::R3);
      std::vector<PolyField> f;
      for (int i = 0; i < p.dim(); ++i) f.push_back(apply_linear(lin_dev(), vec_outer_x(p.member(i))));
      return span_of(f, Range::T);
    }
    case SubspaceTag::hess_mod: {
      cell_only();
      PolySpace p = space(s, k - 2, Range::scalar);
      std::vector<PolyField> f;
      for (int i = 0; i < p.dim(); ++i) f.push_back(apply_diff(DiffOp::hess, p.member(i)));
      return span_of(f, Range::S);
    }
  }
  throw std::invalid_argument("unknown subspace tag");
}

}  // namespace divdiv
