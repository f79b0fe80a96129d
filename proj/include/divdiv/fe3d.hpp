#pragma once

#include "divdiv/fe2d.hpp"

#include <array>
#include <string>
#include <vector>

namespace divdiv {

// hsymcurl_T  P_{k+1}(K;T)     vertex C^1, edge/face traces, interior symcurl moments
// hdivdiv_S   P_k(K;S)         vertex values, normal-normal traces
// h1_vec3     P_{k+2}(K;R^3)   vertex C^2
// dg_scalar   P_{k-2}(K)       interior moments only
const std::vector<std::string>& families_3d();

struct Element3Options {
  // Rotation of the edge normal pair (n1, n2) about t, used by the frame
  // independence check.
  double edge_frame_angle = 0.0;
};

// Vertices are reordered by ascending gid. Local edge i joins kLocalEdges[i],
// local face i is opposite vertex i; face 0 is the distinguished face f1.
FiniteElement element_3d(const std::string& family, int k, const Simplex& tet, std::vector<int> gids = {0, 1, 2, 3},
                         const Element3Options& opt = {});
FiniteElement element_3d(const std::string& family, int k);
DofTally tally_3d(const std::string& family, int k);

// Global vertex IDs of a local entity of a 3-D element (sorted; empty for
// the interior).
std::vector<int> entity_gids(const FiniteElement& e, Attach a, int entity);

Report unisolvence_audit_3d(const std::string& family, int k, int cells, unsigned seed);
// Face/edge restriction identities and the product rules, on random fields.
Report trace_identity_audit(int k, int trials, unsigned seed);
Report bubble_audit_3d(int k);
// Tangential-tangential continuity across a shared face and independence of
// the edge functionals from the choice of normal pair.
Report conformity_audit_3d(int k, unsigned seed);

}  // namespace divdiv
