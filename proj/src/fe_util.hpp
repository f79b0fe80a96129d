#pragma once

#include "divdiv/dof.hpp"
#include "divdiv/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace divdiv::detail {

inline void require_k(int k, const std::string& who) {
  if (k < 3) throw std::invalid_argument(who + ": k >= 3 required (got " + std::to_string(k) + ")");
}

// Simplex with vertices in ascending gid order; gids sorted in place.
inline Simplex sorted_simplex(const Simplex& s, std::vector<int>& gids) {
  if (static_cast<int>(gids.size()) != s.nvert()) throw std::invalid_argument("gid count differs from vertex count");
  std::vector<int> order(gids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return gids[a] < gids[b]; });
  std::vector<Vec3> v;
  std::vector<int> g;
  for (int i : order) {
    v.push_back(s.x[i]);
    g.push_back(gids[i]);
  }
  for (size_t i = 1; i < g.size(); ++i)
    if (g[i] == g[i - 1]) throw std::invalid_argument("repeated vertex gid");
  gids = g;
  return Simplex::make(v);
}

// Sub-simplex on the listed local vertices (kept in the given order).
inline Simplex sub_simplex(const Simplex& s, const std::vector<int>& local) {
  std::vector<Vec3> v;
  for (int i : local) v.push_back(s.x[i]);
  return Simplex::make(v);
}

inline std::vector<PolyField> scalar_tests(const Simplex& s, int degree) {
  if (degree < 0) return {};
  return members(space(s, degree, Range::scalar));
}

// q * v for every scalar test q and each listed constant vector v (vector-major).
inline std::vector<PolyField> times_vectors(const std::vector<PolyField>& q, const std::vector<VectorXd>& v) {
  std::vector<PolyField> out;
  for (const auto& w : v)
    for (const auto& f : q) {
      MatrixXd col = w;
      out.push_back(apply_linear(col, f));
    }
  return out;
}

// Identity on the value rows of a jet.
inline MatrixXd jet_values(int nc, int order) {
  MatrixXd r = MatrixXd::Zero(nc, Jet::levels_rows(nc, order));
  r.leftCols(nc).setIdentity();
  return r;
}

// Coordinates of a field in a space (least squares; exact for members).
inline VectorXd coords(const PolySpace& p, const PolyField& f) {
  PolyField g = f.degree == p.degree ? f : elevate(f, p.degree);
  return p.basis.transpose().colPivHouseholderQr().solve(g.flat());
}

inline double rel(double num, double den) { return den > 0 ? num / den : num; }

inline std::vector<int> rows_where(const FiniteElement& e, const std::function<bool(const DofBlock&)>& pred) {
  std::vector<int> r;
  int off = 0;
  for (const auto& b : e.blocks) {
    if (pred(b))
      for (int i = 0; i < b.ndofs(); ++i) r.push_back(off + i);
    off += b.ndofs();
  }
  return r;
}

inline MatrixXd select_rows(const MatrixXd& a, const std::vector<int>& r) {
  MatrixXd out(r.size(), a.cols());
  for (size_t i = 0; i < r.size(); ++i) out.row(i) = a.row(r[i]);
  return out;
}

// P_{k-1,1}(f)(x - c) + curl_f P_{k-3}(f) on a triangle.
inline std::vector<PolyField> rot_face_tests(const Simplex& f, int k) {
  const Vec3 c = f.centroid();
  PolySpace q = constrained_subspace(SubspaceTag::div_vanish, f, k);
  std::vector<PolyField> tests;
  for (int i = 0; i < q.dim(); ++i)
    tests.push_back(multiply_affine(q.member(i), [&](const Vec3& x) -> MatrixXd { return x - c; }));
  PolySpace inner = constrained_subspace(SubspaceTag::curl_f_mod, f, k);
  for (int i = 0; i < inner.dim(); ++i) tests.push_back(inner.member(i));
  return members(span_of(tests, Range::R2));
}

// sym(P_{k-1,2}(f;R^2)(x - c)^T) + curl_f curl_f P_{k-1}(f) on a triangle.
inline std::vector<PolyField> rotrot_face_tests(const Simplex& f, int k) {
  const Vec3 c = f.centroid();
  PolySpace v = constrained_subspace(SubspaceTag::ddiv_vanish, f, k);
  std::vector<PolyField> tests;
  for (int i = 0; i < v.dim(); ++i) {
    PolyField vx = multiply_affine(v.member(i), [&](const Vec3& x) -> MatrixXd {
      MatrixXd m = MatrixXd::Zero(9, 3);
      Vec3 y = x - c;
      for (int a = 0; a < 3; ++a)
        for (int l = 0; l < 3; ++l) m(mat_index(a, l), a) = y(l);
      return m;
    });
    tests.push_back(apply_linear(lin_sym(), vx));
  }
  PolySpace cc = constrained_subspace(SubspaceTag::curlcurl_f_mod, f, k);
  for (int i = 0; i < cc.dim(); ++i) tests.push_back(cc.member(i));
  return members(span_of(tests, Range::S2));
}

// Scalar tests q spread over m output components (one moment per component).
inline std::vector<PolyField> per_component(const std::vector<PolyField>& q, int m) {
  std::vector<VectorXd> e;
  for (int i = 0; i < m; ++i) e.push_back(VectorXd::Unit(m, i));
  return times_vectors(q, e);
}

}  // namespace divdiv::detail
