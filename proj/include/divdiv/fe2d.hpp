#pragma once

#include "divdiv/dof.hpp"
#include "divdiv/report.hpp"

#include <string>
#include <vector>

namespace divdiv {

// h1_scalar   P_{k+2}(f)       vertex C^2, edge moments P_{k-4}, interior P_{k-1,0}
// hrot_vec    P_{k+1}(f;R^2)   vertex C^1, edge u.t and rot_f u moments
// l2_lagrange P_k(f)           Lagrange-type
// h1_vec      P_{k+2}(f;R^2)   componentwise h1_scalar
// hrotrot_s2  P_{k+1}(f;S_2)   vertex C^1, edge t^T tau t and the rotrot edge functional
const std::vector<std::string>& families_2d();

// The triangle's vertices are reordered by ascending gid; frames follow the
// mesh conventions (face frame, outward edge normals n, t = N x n).
FiniteElement element_2d(const std::string& family, int k, const Simplex& tri, std::vector<int> gids = {0, 1, 2});
FiniteElement element_2d(const std::string& family, int k);

// Per-attachment DOF counts of the closed-form tallies.
struct DofTally {
  int vertex = 0, edge = 0, face = 0, interior = 0;
  int total() const { return vertex + edge + face + interior; }
};
DofTally tally_2d(const std::string& family, int k);

// Unisolvence on the reference cell and `cells` random affine images.
Report unisolvence_audit_2d(const std::string& family, int k, int cells, unsigned seed);
Report bubble_audit_2d(int k);

// Rows of the Vandermonde matrix attached to vertices/edges (non-interior).
std::vector<int> boundary_rows(const FiniteElement& e);

}  // namespace divdiv
