#pragma once

// Exact rational polynomial calculus in the monomial basis, independent of the
// library's Bernstein representation. Matrix fields are row-major (3i+j).

#include <gmpxx.h>

#include <array>
#include <map>
#include <vector>

namespace exact {

using Exp = std::array<int, 3>;
using Poly = std::map<Exp, mpq_class>;
using Field = std::vector<Poly>;

inline void add(Poly& p, const Poly& q, const mpq_class& s = 1) {
  for (const auto& [e, c] : q) {
    p[e] += s * c;
    if (p[e] == 0) p.erase(e);
  }
}

inline Poly deriv(const Poly& p, int q) {
  Poly out;
  for (const auto& [e, c] : p)
    if (e[q] > 0) {
      Exp f = e;
      f[q] -= 1;
      out[f] += c * e[q];
    }
  return out;
}

inline std::vector<Exp> monomials(int degree) {
  std::vector<Exp> out;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree; ++c) out.push_back({a, b, c});
  return out;
}

inline int levi(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

// (grad v)_ij = d_j v_i minus its trace part.
inline Field devgrad(const Field& v) {
  Field g(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[3 * i + j] = deriv(v[i], j);
  Poly tr;
  for (int i = 0; i < 3; ++i) add(tr, g[4 * i]);
  for (int i = 0; i < 3; ++i) add(g[4 * i], tr, mpq_class(-1, 3));
  return g;
}

// Row-wise curl, then symmetric part.
inline Field symcurl(const Field& t) {
  Field c(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (int s = levi(j, a, b)) add(c[3 * i + j], deriv(t[3 * i + b], a), s);
  Field out(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      add(out[3 * i + j], c[3 * i + j], mpq_class(1, 2));
      add(out[3 * i + j], c[3 * j + i], mpq_class(1, 2));
    }
  return out;
}

inline Field divdiv(const Field& t) {
  Field out(1);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) add(out[0], deriv(deriv(t[3 * i + j], i), j));
  return out;
}

// Monomial times a constant matrix (ncomp entries).
inline Field monomial_field(const Exp& e, const std::vector<int>& comp) {
  Field f(comp.size());
  for (size_t c = 0; c < comp.size(); ++c)
    if (comp[c]) f[c][e] = comp[c];
  return f;
}

inline std::vector<std::vector<int>> range_basis(const char* r) {
  std::string s(r);
  std::vector<std::vector<int>> out;
  auto unit = [](int a, int b) {
    std::vector<int> m(9, 0);
    m[a] += 1;
    m[b] += 1;
    return m;
  };
  if (s == "R3") return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  if (s == "S") {
    for (int i = 0; i < 3; ++i) {
      std::vector<int> m(9, 0);
      m[4 * i] = 1;
      out.push_back(m);
    }
    out.push_back(unit(1, 3));
    out.push_back(unit(2, 6));
    out.push_back(unit(5, 7));
    return out;
  }
  // traceless
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) {
        std::vector<int> m(9, 0);
        m[3 * i + j] = 1;
        out.push_back(m);
      }
  for (int i = 0; i < 2; ++i) {
    std::vector<int> m(9, 0);
    m[4 * i] = 1;
    m[8] = -1;
    out.push_back(m);
  }
  return out;
}

inline std::vector<Field> basis(int degree, const char* range) {
  std::vector<Field> out;
  for (const auto& comp : range_basis(range))
    for (const auto& e : monomials(degree)) out.push_back(monomial_field(e, comp));
  return out;
}

// Rank of the images (columns) by Gaussian elimination over Q.
inline int rank(const std::vector<Field>& images) {
  std::map<std::pair<int, Exp>, int> index;
  std::vector<std::vector<mpq_class>> cols;
  for (const auto& f : images) {
    std::vector<mpq_class> col(index.size());
    for (size_t c = 0; c < f.size(); ++c)
      for (const auto& [e, v] : f[c]) {
        auto [it, fresh] = index.emplace(std::make_pair(static_cast<int>(c), e), static_cast<int>(index.size()));
        if (fresh) col.resize(index.size());
        col[it->second] = v;
      }
    cols.push_back(std::move(col));
  }
  const size_t n = index.size();
  for (auto& c : cols) c.resize(n);
  int r = 0;
  std::vector<bool> used(cols.size(), false);
  for (size_t row = 0; row < n; ++row) {
    int piv = -1;
    for (size_t j = 0; j < cols.size(); ++j)
      if (!used[j] && cols[j][row] != 0) {
        piv = static_cast<int>(j);
        break;
      }
    if (piv < 0) continue;
    used[piv] = true;
    ++r;
    for (size_t j = 0; j < cols.size(); ++j) {
      if (used[j] || cols[j][row] == 0) continue;
      mpq_class f = cols[j][row] / cols[piv][row];
      for (size_t i = row; i < n; ++i) cols[j][i] -= f * cols[piv][i];
    }
  }
  return r;
}

inline bool is_zero(const Field& f) {
  for (const auto& p : f)
    if (!p.empty()) return false;
  return true;
}

}  // namespace exact
