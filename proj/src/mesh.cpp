#include "divdiv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace divdiv {

Simplex TetMesh::cell_simplex(int c) const {
  const auto& v = cells[c];
  return Simplex::make({vertices[v[0]], vertices[v[1]], vertices[v[2]], vertices[v[3]]});
}

Simplex TetMesh::face_simplex(int f) const {
  const auto& v = faces[f];
  return Simplex::make({vertices[v[0]], vertices[v[1]], vertices[v[2]]});
}

Simplex TetMesh::edge_simplex(int e) const {
  const auto& v = edges[e];
  return Simplex::make({vertices[v[0]], vertices[v[1]]});
}

Bary TetMesh::barycentric(int c, const Vec3& p) const {
  Mat3 j = jacobian(c);
  Vec3 l = j.inverse() * (p - vertices[cells[c][0]]);
  Bary b;
  b << 1.0 - l.sum(), l(0), l(1), l(2);
  return b;
}

Mat3 TetMesh::jacobian(int c) const {
  const auto& v = cells[c];
  Mat3 j;
  for (int i = 0; i < 3; ++i) j.col(i) = vertices[v[i + 1]] - vertices[v[0]];
  return j;
}

double TetMesh::volume(int c) const { return jacobian(c).determinant() / 6.0; }

double TetMesh::max_diameter() const {
  double h = 0.0;
  for (const auto& e : edges) h = std::max(h, (vertices[e[1]] - vertices[e[0]]).norm());
  return h;
}

TetMesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells, std::string name) {
  TetMesh m;
  m.name = std::move(name);
  m.vertices = std::move(vertices);
  m.cells = std::move(cells);
  const int nv = m.nv();
  if (m.cells.empty()) throw MeshError("mesh has no cells");
  std::vector<int> used(nv, 0);
  for (int c = 0; c < m.nt(); ++c) {
    const auto& v = m.cells[c];
    for (int i = 0; i < 4; ++i) {
      if (v[i] < 0 || v[i] >= nv)
        throw MeshError("cell " + std::to_string(c) + " references missing vertex " + std::to_string(v[i]));
      for (int j = 0; j < i; ++j)
        if (v[i] == v[j]) throw MeshError("cell " + std::to_string(c) + " repeats vertex " + std::to_string(v[i]));
      used[v[i]] = 1;
    }
    Mat3 j = m.jacobian(c);
    double det = j.determinant();
    double scale = j.col(0).norm() * j.col(1).norm() * j.col(2).norm();
    if (std::abs(det) <= 1e-12 * scale) throw MeshError("cell " + std::to_string(c) + " is degenerate");
    if (det < 0) throw MeshError("cell " + std::to_string(c) + " is inverted (negative volume)");
  }
  for (int i = 0; i < nv; ++i)
    if (!used[i]) throw MeshError("vertex " + std::to_string(i) + " is dangling (not used by any cell)");

  std::map<std::array<int, 2>, int> emap;
  std::map<std::array<int, 3>, int> fmap;
  for (const auto& v : m.cells) {
    for (const auto& le : kLocalEdges) {
      std::array<int, 2> k{v[le[0]], v[le[1]]};
      std::sort(k.begin(), k.end());
      emap[k] = 0;
    }
    for (int i = 0; i < 4; ++i) {
      std::array<int, 3> k;
      int p = 0;
      for (int j = 0; j < 4; ++j)
        if (j != i) k[p++] = v[j];
      std::sort(k.begin(), k.end());
      fmap[k] = 0;
    }
  }
  for (auto& [k, id] : emap) {
    id = m.ne();
    m.edges.push_back(k);
  }
  for (auto& [k, id] : fmap) {
    id = m.nf();
    m.faces.push_back(k);
  }
  m.vertex_cells.assign(nv, {});
  m.edge_cells.assign(m.ne(), {});
  m.face_cells.assign(m.nf(), {});
  for (int c = 0; c < m.nt(); ++c) {
    const auto& v = m.cells[c];
    std::array<int, 6> ce;
    for (int i = 0; i < 6; ++i) {
      std::array<int, 2> k{v[kLocalEdges[i][0]], v[kLocalEdges[i][1]]};
      std::sort(k.begin(), k.end());
      ce[i] = emap[k];
      m.edge_cells[ce[i]].push_back(c);
    }
    std::array<int, 4> cf;
    for (int i = 0; i < 4; ++i) {
      std::array<int, 3> k;
      int p = 0;
      for (int j = 0; j < 4; ++j)
        if (j != i) k[p++] = v[j];
      std::sort(k.begin(), k.end());
      cf[i] = fmap[k];
      m.face_cells[cf[i]].push_back(c);
    }
    for (int i = 0; i < 4; ++i) m.vertex_cells[v[i]].push_back(c);
    m.cell_edges.push_back(ce);
    m.cell_faces.push_back(cf);
  }
  for (int f = 0; f < m.nf(); ++f)
    if (m.face_cells[f].size() > 2) {
      const auto& k = m.faces[f];
      throw MeshError("face " + std::to_string(f) + " (" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," +
                      std::to_string(k[2]) + ") is non-manifold (" + std::to_string(m.face_cells[f].size()) +
                      " incident cells)");
    }
  for (const auto& e : m.edges) m.edge_frames.push_back(make_edge_frame(m.vertices[e[0]], m.vertices[e[1]]));
  for (const auto& f : m.faces)
    m.face_frames.push_back(make_face_frame(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]));
  return m;
}

TetMesh single_tet() {
  return make_mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {{0, 1, 2, 3}}, "single_tet");
}

TetMesh two_tets() {
  return make_mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 1)},
                   {{0, 1, 2, 3}, {1, 2, 3, 4}}, "two_tets");
}

TetMesh kuhn_cube(int n) {
  if (n < 1) throw MeshError("kuhn_cube: n >= 1 required");
  auto id = [n](int i, int j, int k) { return i + (n + 1) * (j + (n + 1) * k); };
  std::vector<Vec3> v;
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) v.emplace_back(double(i) / n, double(j) / n, double(k) / n);
  std::vector<std::array<int, 4>> cells;
  std::array<int, 3> perm{0, 1, 2};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        std::array<int, 3> p = perm;
        do {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> cell;
          cell[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            cell[s + 1] = id(c[0], c[1], c[2]);
          }
          Mat3 jac;
          for (int s = 0; s < 3; ++s) jac.col(s) = v[cell[s + 1]] - v[cell[0]];
          if (jac.determinant() < 0) std::swap(cell[2], cell[3]);
          cells.push_back(cell);
        } while (std::next_permutation(p.begin(), p.end()));
      }
  return make_mesh(std::move(v), std::move(cells), "kuhn_cube(" + std::to_string(n) + ")");
}

TetMesh parse_mesh(std::istream& in, const std::string& name) {
  std::string tag;
  long nv = -1, nt = -1;
  if (!(in >> tag >> nv >> nt) || tag != "tetmesh" || nv < 0 || nt < 0)
    throw MeshError("mesh file: expected header 'tetmesh <#V> <#T>'");
  std::vector<Vec3> v(nv);
  for (long i = 0; i < nv; ++i)
    if (!(in >> v[i](0) >> v[i](1) >> v[i](2))) throw MeshError("mesh file: bad vertex line " + std::to_string(i));
  std::vector<std::array<int, 4>> c(nt);
  for (long i = 0; i < nt; ++i)
    if (!(in >> c[i][0] >> c[i][1] >> c[i][2] >> c[i][3]))
      throw MeshError("mesh file: bad cell line " + std::to_string(i));
  std::string extra;
  if (in >> extra) throw MeshError("mesh file: trailing content after cell lines");
  return make_mesh(std::move(v), std::move(c), name);
}

TetMesh load_mesh(const std::string& spec) {
  if (spec == "single_tet") return single_tet();
  if (spec == "two_tets") return two_tets();
  static const std::regex kuhn(R"(kuhn_cube\((\d+)\))");
  std::smatch mt;
  if (std::regex_match(spec, mt, kuhn)) return kuhn_cube(std::stoi(mt[1]));
  std::ifstream f(spec);
  if (!f) throw MeshError("cannot open mesh file '" + spec + "'");
  return parse_mesh(f, spec);
}

void write_mesh(std::ostream& out, const TetMesh& m) {
  std::ostringstream s;
  s.precision(17);
  s << "tetmesh " << m.nv() << " " << m.nt() << "\n";
  for (const auto& x : m.vertices) s << x(0) << " " << x(1) << " " << x(2) << "\n";
  for (const auto& c : m.cells) s << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
  out << s.str();
}

}  // namespace divdiv
