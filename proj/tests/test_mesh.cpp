#include "divdiv/mesh.hpp"

#include "doctest.h"

#include <set>
#include <sstream>

using namespace divdiv;

TEST_CASE("Kuhn cube entity counts") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    TetMesh m = kuhn_cube(n);
    const int n3 = n * n * n;
    // axis edges, one diagonal per square, one body diagonal per cube
    const int ne = 3 * n * (n + 1) * (n + 1) + 3 * n * n * (n + 1) + n3;
    CHECK(m.nv() == (n + 1) * (n + 1) * (n + 1));
    CHECK(m.nt() == 6 * n3);
    CHECK(m.ne() == ne);
    CHECK(m.euler() == 1);
    int bdy = 0;
    for (int f = 0; f < m.nf(); ++f) bdy += m.boundary_face(f);
    CHECK(bdy == 12 * n * n);
    CHECK(4 * m.nt() == 2 * m.nf() - bdy);
    double vol = 0;
    for (int c = 0; c < m.nt(); ++c) {
      CHECK(m.volume(c) > 0);
      vol += m.volume(c);
    }
    CHECK(vol == doctest::Approx(1.0));
    CHECK(m.max_diameter() == doctest::Approx(std::sqrt(3.0) / n));
  }
}

TEST_CASE("small meshes") {
  TetMesh a = single_tet();
  CHECK(a.nv() == 4);
  CHECK(a.ne() == 6);
  CHECK(a.nf() == 4);
  TetMesh b = two_tets();
  CHECK(b.nv() == 5);
  CHECK(b.nt() == 2);
  CHECK(b.nf() == 7);
  CHECK(b.ne() == 9);
}

TEST_CASE("incidence is consistent") {
  TetMesh m = kuhn_cube(2);
  for (int c = 0; c < m.nt(); ++c) {
    std::set<int> verts(m.cells[c].begin(), m.cells[c].end());
    for (int i = 0; i < 6; ++i) {
      const auto& e = m.edges[m.cell_edges[c][i]];
      CHECK(e[0] < e[1]);
      CHECK(verts.count(e[0]));
      CHECK(verts.count(e[1]));
    }
    for (int i = 0; i < 4; ++i) {
      const auto& f = m.faces[m.cell_faces[c][i]];
      for (int v : f) CHECK(verts.count(v));
    }
  }
  for (int e = 0; e < m.ne(); ++e) {
    const Vec3 d = m.vertices[m.edges[e][1]] - m.vertices[m.edges[e][0]];
    CHECK((m.edge_frames[e].t - d.normalized()).norm() < 1e-14);
  }
}

TEST_CASE("mesh file round trip and errors") {
  TetMesh m = kuhn_cube(1);
  std::stringstream s;
  write_mesh(s, m);
  TetMesh r = parse_mesh(s, "copy");
  CHECK(r.nv() == m.nv());
  CHECK(r.nt() == m.nt());
  CHECK(r.ne() == m.ne());
  std::istringstream bad("tetmesh 4 1\n0 0 0\n1 0 0\n0 1 0\n");
  CHECK_THROWS_AS(parse_mesh(bad), MeshError);
  CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.txt"), MeshError);
  CHECK(load_mesh("kuhn_cube(2)").nt() == 48);
}
