#pragma once

#include "divdiv/poly.hpp"
#include "divdiv/tensor_calc.hpp"

#include <functional>
#include <string>
#include <vector>

namespace divdiv {

enum class Attach { vertex, edge, face, interior };
const char* attach_name(Attach a);

// Pointwise trace: maps the jet of a field to m output components (rows).
using TraceFn = std::function<MatrixXd(const Jet&)>;
// Jets of a batch of fields at a point, valid up to the requested order.
using FieldJets = std::function<Jet(const Vec3&, int order)>;

// Functionals dof_i(u) = sum_p w_p tests(i, p*m : p*m+m) . trace(u)(x_p).
// Point evaluations are blocks with one point, unit weight and identity tests.
struct DofBlock {
  std::string label;
  Attach attach = Attach::vertex;
  int entity = 0;  // local entity index
  int order = 0;   // jet order needed by the trace
  int m = 1;       // trace output components
  TraceFn trace;
  std::vector<Vec3> points;
  VectorXd weights;
  MatrixXd tests;  // ndofs x (npts*m)

  int ndofs() const { return static_cast<int>(tests.rows()); }
};

// Evaluates all blocks on a batch of fields; result is ndofs x batch.
MatrixXd eval_dofs(const std::vector<DofBlock>& blocks, const FieldJets& fields);

struct FiniteElement {
  std::string family;
  int k = 0;
  Simplex cell;
  std::vector<int> gids;  // global vertex IDs of the cell vertices
  PolySpace shape;
  std::vector<DofBlock> blocks;  // grouped by entity: vertices, edges, faces, interior
  MatrixXd vandermonde;          // ndofs x dim(shape): DOF_i(phi_j)
  MatrixXd nodal;                // dim(shape) x ndofs: coefficients of the nodal basis

  int ndofs() const;
  int count(Attach a) const;
  int count(Attach a, int entity) const;
  double condition_ratio() const;  // min/max singular value of the Vandermonde matrix
  FieldJets shape_jets() const;
  // Values of all DOFs of the given fields (ndofs x batch).
  MatrixXd dofs_of(const FieldJets& f) const { return eval_dofs(blocks, f); }
  // Nodal basis combination evaluated at p (jets, batch = ndofs).
  Jet nodal_jets(const Vec3& p, int order) const;
};

void finalize(FiniteElement& e);

// Helpers for building blocks.
DofBlock point_block(std::string label, Attach a, int entity, const Vec3& x, int order, int m, TraceFn trace);
// Moment block on a simplex: tests given per test function as fields on `where`
// with m components (the trace output size).
DofBlock moment_block(std::string label, Attach a, int entity, const Simplex& where, int qdeg, int order, int m,
                      TraceFn trace, const std::vector<PolyField>& tests);
// Componentwise scalar tests: for each listed output component and each
// member of the scalar space, the moment of that component against it.
std::vector<PolyField> componentwise(const PolySpace& scalar, int m, const std::vector<int>& comps);
std::vector<PolyField> members(const PolySpace& p);

// Traces built from jets.
MatrixXd values(const Jet& j);
MatrixXd stack(const std::vector<MatrixXd>& parts);

// Linear traces: a fixed matrix acting on the rows of a jet of order `order`
// with nc components (see Jet for the row layout).
TraceFn linear_trace(const MatrixXd& rows);
// w . f
MatrixXd jet_value(int nc, int order, const VectorXd& w);
// w . (d . grad) f
MatrixXd jet_deriv(int nc, int order, const VectorXd& w, const Vec3& d);
// w . (a . grad)(b . grad) f
MatrixXd jet_deriv2(int nc, int order, const VectorXd& w, const Vec3& a, const Vec3& b);
// post * op(f)
MatrixXd jet_op(int nc, int order, DiffOp op, const Vec3& n, const MatrixXd& post);

// Jets of a list of polynomial fields (batch = number of fields).
FieldJets poly_fields(std::vector<PolyField> fields);

}  // namespace divdiv
