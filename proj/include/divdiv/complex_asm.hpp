#pragma once

#include "divdiv/fe3d.hpp"
#include "divdiv/linalg.hpp"
#include "divdiv/mesh.hpp"
#include "divdiv/report.hpp"

#include <string>
#include <vector>

namespace divdiv {

// Global space on a mesh. Global DOFs are numbered entity by entity
// (vertices, edges, faces, cells, each in mesh order); every DOF on a shared
// entity has sign +1 from all incident cells since frames are global.
struct GlobalSpace {
  const TetMesh* mesh = nullptr;
  std::string family;
  int k = 0;
  int ndofs = 0;
  std::vector<FiniteElement> elems;      // per cell
  std::vector<std::vector<int>> l2g;     // per cell: local DOF -> global DOF
  std::vector<Attach> attach;            // per global DOF
  std::vector<int> ncells;               // per global DOF: number of incident cells

  int dim() const { return ndofs; }
};

// The mesh must outlive the space.
GlobalSpace global_space(const TetMesh& mesh, const std::string& family, int k);
// Element tallies weighted by entity counts.
long long global_dim_formula(const TetMesh& mesh, const std::string& family, int k);

struct SparseOperator {
  DiffOp op = DiffOp::devgrad;
  SpMat mat;              // dst.ndofs x src.ndofs
  double mismatch = 0.0;  // max disagreement of shared DOFs between cells, relative to max |entry|
};

// Columns are the DOFs (in dst) of op applied to the global basis of src.
SparseOperator assemble_diff(DiffOp op, const GlobalSpace& src, const GlobalSpace& dst);

// DOF values of a smooth field (batch 1 jets), averaged over incident cells.
VectorXd interpolate(const GlobalSpace& s, const FieldJets& f);

// Per-cell quadrature data for mass matrices, loads and L2 errors.
class CellQuadrature {
 public:
  CellQuadrature(const GlobalSpace& s, int degree);

  int npoints() const { return static_cast<int>(ref_values_.rows()); }
  int ncomp() const { return nc_; }
  const std::vector<Vec3>& points(int cell) const { return pts_[cell]; }
  // Values of the global field with coefficients c at the cell's points (npoints x ncomp).
  MatrixXd values(int cell, const VectorXd& c) const;
  // b_i = sum_cells sum_q w_q f(x_q) . phi_i(x_q); f per cell is npoints x ncomp.
  VectorXd load(const std::vector<MatrixXd>& f) const;
  // Squared L2 norm of (f - u_h).
  double l2_error_sq(const std::vector<MatrixXd>& f, const VectorXd& c) const;
  SpMat mass() const;

 private:
  const GlobalSpace* s_;
  int nc_ = 1;
  MatrixXd ref_values_;                // npoints x nmono (Bernstein)
  std::vector<MatrixXd> coef_map_;     // per cell: (nmono*ncomp) x nloc
  std::vector<VectorXd> weights_;
  std::vector<std::vector<Vec3>> pts_;
};

SpMat mass_matrix(const GlobalSpace& s);

// Exactness of V -devgrad-> Lambda -symcurl-> Sigma -divdiv-> Q on the mesh.
Report complex_audit(const TetMesh& mesh, int k);

}  // namespace divdiv
