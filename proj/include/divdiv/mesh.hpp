#pragma once

#include "divdiv/poly.hpp"
#include "divdiv/tensor_calc.hpp"

#include <array>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace divdiv {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Local edge i of a cell joins local vertices kLocalEdges[i]; local face i is
// opposite local vertex i.
inline constexpr std::array<std::array<int, 2>, 6> kLocalEdges{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

struct TetMesh {
  std::string name;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<std::array<int, 2>> edges;  // ascending vertex IDs, lexicographic order
  std::vector<std::array<int, 3>> faces;
  std::vector<std::array<int, 6>> cell_edges;
  std::vector<std::array<int, 4>> cell_faces;
  std::vector<std::vector<int>> vertex_cells, edge_cells, face_cells;
  std::vector<EdgeFrame> edge_frames;
  std::vector<FaceFrame> face_frames;

  int nv() const { return static_cast<int>(vertices.size()); }
  int ne() const { return static_cast<int>(edges.size()); }
  int nf() const { return static_cast<int>(faces.size()); }
  int nt() const { return static_cast<int>(cells.size()); }
  int euler() const { return nv() - ne() + nf() - nt(); }
  bool boundary_face(int f) const { return face_cells[f].size() == 1; }

  Simplex cell_simplex(int c) const;
  Simplex face_simplex(int f) const;
  Simplex edge_simplex(int e) const;
  Bary barycentric(int c, const Vec3& p) const;
  Mat3 jacobian(int c) const;  // columns x_i - x_0
  double volume(int c) const;
  double max_diameter() const;
};

TetMesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells, std::string name = "mesh");
TetMesh single_tet();
TetMesh two_tets();
TetMesh kuhn_cube(int n);
TetMesh parse_mesh(std::istream& in, const std::string& name = "mesh");
// Builtin name (single_tet, two_tets, kuhn_cube(n)) or path to an ASCII file.
TetMesh load_mesh(const std::string& spec);
void write_mesh(std::ostream& out, const TetMesh& m);

}  // namespace divdiv
