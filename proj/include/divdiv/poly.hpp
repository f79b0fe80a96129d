#pragma once

#include "divdiv/linalg.hpp"
#include "divdiv/report.hpp"
#include "divdiv/tensor_calc.hpp"

#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace divdiv {

using Bary = Eigen::Vector4d;

// Edge, triangle or tetrahedron embedded in R^3. Barycentric gradients of
// lower-dimensional simplices are tangential.
struct Simplex {
  int dim = 0;
  std::array<Vec3, 4> x{};
  Eigen::Matrix<double, 4, 3> grad_lambda = Eigen::Matrix<double, 4, 3>::Zero();
  double measure = 0.0;
  Vec3 normal = Vec3::Zero();  // triangles: (x1-x0)x(x2-x0) normalized

  static Simplex make(const std::vector<Vec3>& verts);
  int nvert() const { return dim + 1; }
  Bary barycentric(const Vec3& p) const;
  Vec3 point(const Bary& lam) const;
  Vec3 centroid() const;
};

Simplex reference_simplex(int dim);
// Random affine image of the reference simplex, embedded in R^3 (triangles and
// edges get a random orientation). Shape regular: rejected while the edge
// matrix has singular value ratio below 0.25.
Simplex random_simplex(int dim, std::mt19937_64& rng);

// Multi-indices of total degree n in nvars variables, lexicographically
// decreasing in the first entry (deterministic order).
const std::vector<std::array<int, 4>>& multi_indices(int nvars, int degree);
int multi_index_pos(int nvars, const std::array<int, 4>& alpha);
int num_monomials(int nvars, int degree);

// Bernstein polynomials B_a = n!/a! lambda^a.
VectorXd bernstein_values(int nvars, int degree, const Bary& lam);
// Rows: value, d_q (3 rows), d_r d_q (9 rows, index 3r+q). Columns: multi-indices.
MatrixXd bernstein_jets(const Simplex& s, int degree, const Bary& lam);

enum class Range { scalar, R2, R3, S2, S, T, M };
int range_ncomp(Range r);
const char* range_name(Range r);
Range parse_range(const std::string& name);
// Columns are the fixed generators of the range (ncomp x ngen).
MatrixXd range_generators(Range r, const Simplex& s);

struct PolyField {
  Simplex cell;
  int degree = 0;
  int ncomp = 1;
  MatrixXd coef;  // nmono x ncomp

  static PolyField zero(const Simplex& s, int degree, int ncomp);
  int nmono() const { return static_cast<int>(coef.rows()); }
  VectorXd value(const Bary& lam) const;
  VectorXd value_at(const Vec3& p) const { return value(cell.barycentric(p)); }
  Jet jet(const Vec3& p, int order = 2) const;
  VectorXd flat() const;  // component-major: c*nmono + m
};

PolyField partial(const PolyField& f, int q);
PolyField field_gradient(const PolyField& f);
PolyField apply_linear(const MatrixXd& l, const PolyField& f);
PolyField apply_diff(DiffOp op, const PolyField& f);
PolyField elevate(const PolyField& f, int degree);
PolyField operator+(const PolyField& a, const PolyField& b);
PolyField operator*(double s, const PolyField& a);
// Multiplies by the affine matrix function whose value at vertex j is
// vertex_map(x_j): result = sum_j lambda_j vertex_map(x_j) f.
PolyField multiply_affine(const PolyField& f, const std::function<MatrixXd(const Vec3&)>& vertex_map);
// Multiplies by the barycentric coordinate lambda_i.
PolyField multiply_barycentric(const PolyField& f, int i);
// Integral of each component over the cell.
VectorXd integrate(const PolyField& f);
// L2 inner products (a_i, b_j) over the common cell, computed by exact quadrature.
MatrixXd inner_products(const std::vector<PolyField>& a, const std::vector<PolyField>& b);
// Restriction to a sub-simplex (face or edge) of the field's cell.
PolyField restrict_to(const PolyField& f, const Simplex& sub);
// Lattice interpolation; exact when the function lies in P_degree.
PolyField interpolate_poly(const Simplex& s, int degree, int ncomp,
                           const std::function<VectorXd(const Vec3&)>& fn);

struct PolySpace {
  Simplex cell;
  int degree = 0;
  Range range = Range::scalar;
  MatrixXd basis;  // dim x (nmono*ncomp), component-major
  // Range generators when basis is the full tensor product (member g*nmono+m
  // is B_m times generator g); empty otherwise.
  MatrixXd gens;

  int ncomp() const { return range_ncomp(range); }
  int nmono() const { return num_monomials(cell.nvert(), degree); }
  int dim() const { return static_cast<int>(basis.rows()); }
  PolyField member(int i) const;
  PolyField combination(const VectorXd& c) const;
  // Jets of all basis members at p (batch = dim).
  Jet jets(const Vec3& p, int order = 2) const;
};

PolySpace space(const Simplex& s, int degree, Range r);
int space_dim_formula(int cell_dim, int degree, Range r);
PolySpace subspace(const PolySpace& p, const MatrixXd& rows);
// Orthonormal basis (in flattened coefficients) of the span of the fields,
// rank-filtered with threshold tol * largest singular value.
PolySpace span_of(const std::vector<PolyField>& fields, Range r, double tol = 1e-10);
PolySpace span_sum(const PolySpace& a, const PolySpace& b, double tol = 1e-10);

struct DiffMatrix {
  DiffOp op;
  PolySpace src;
  PolySpace dst;
  MatrixXd mat;  // dst.dim x src.dim
};

Range diff_target_range(DiffOp op, Range src, int cell_dim);
DiffMatrix diff(DiffOp op, const PolySpace& src);

enum class SubspaceTag {
  vanish_vertices,   // P_{k-1,0}(f)
  div_vanish,        // P_{k-1,1}(f)
  ddiv_vanish,       // P_{k-1,2}(f;R^2)
  sym_x_cross_T,     // sym(x x P_{k-2}(K;T))
  dev_vec_xT,        // dev(P_{k-2}(K;R^3) x^T)
  curlcurl_f_mod,    // curl_f curl_f P_{k-1}(f) modulo P_1
  curl_f_mod,        // curl_f P_{k-3}(f) modulo constants
  hess_mod,          // hess P_{k-2}(K) modulo P_1
  face_rot_x,        // P_{k-2}(f)(n x x)
  vanish_vertices_vec,  // P_{k-1,0}(f;R^2) tangential
  vanish_vertices_R3,   // P_{k-1,0}(f;R^3)
};

const char* subspace_name(SubspaceTag t);
// Origin of x is the centroid of the cell.
PolySpace constrained_subspace(SubspaceTag tag, const Simplex& s, int k);

// Exactness of the polynomial complexes on the reference cell:
// dim 3: P_{k+2}(R^3) -devgrad-> P_{k+1}(T) -symcurl-> P_k(S) -divdiv-> P_{k-2} -> 0, head RT;
// dim 2: P_{k+2} -grad_f-> P_{k+1}(R^2) -rot_f-> P_k -> 0, head R, and
//        P_{k+2}(R^2) -eps_f-> P_{k+1}(S_2) -rotrot_f-> P_{k-1} -> 0, head rigid motions.
Report poly_complex_audit(int dim, int k);

}  // namespace divdiv
