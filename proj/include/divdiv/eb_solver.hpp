#pragma once

#include "divdiv/complex_asm.hpp"
#include "divdiv/report.hpp"

#include <functional>
#include <istream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace divdiv {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// key = value lines, '#' starts a comment.
//   mesh         builtin name or mesh file            (kuhn_cube(1))
//   k            polynomial index, >= 3                (3)
//   t_final      final time                            (1)
//   dt           time step; t_final/dt must be integral (0.1)
//   initial      zero | random | smooth | poly | temporal   (zero)
//   forcing      on | off; default on for smooth/poly/temporal
//   seed         RNG seed for random data              (0)
//   tol          linear solver residual tolerance      (1e-10)
//   time_levels  dt halvings in the temporal study     (3)
struct EBConfig {
  std::string mesh = "kuhn_cube(1)";
  int k = 3;
  double t_final = 1.0;
  double dt = 0.1;
  std::string initial = "zero";
  bool forcing = false;
  unsigned seed = 0;
  double tol = 1e-10;
  int time_levels = 3;

  int steps() const;
  bool manufactured() const { return initial == "smooth" || initial == "poly" || initial == "temporal"; }
};

EBConfig parse_config(std::istream& in);
EBConfig load_config(const std::string& path);

// Spaces and matrices of the semidiscrete system, unknowns ordered
// [sigma (P_{k-2}(T)); E (Sigma_{k,h}); B (Lambda_{k+1,h})]:
//   M x' = J x + f,  M = diag(M_Q, M_Sigma, M_Lambda),
//   J = [0 C1 0; -C1^T 0 -C2; 0 C2^T 0],  C1 = M_Q D_divdiv,  C2 = M_Sigma D_symcurl.
class EBSystem {
 public:
  EBSystem(const TetMesh& mesh, int k);

  const TetMesh& mesh() const { return *mesh_; }
  int k() const { return k_; }
  int nq() const { return q_.ndofs; }
  int ns() const { return s_.ndofs; }
  int nl() const { return l_.ndofs; }
  int size() const { return nq() + ns() + nl(); }

  const GlobalSpace& space(int field) const;  // 0 sigma, 1 E, 2 B
  const CellQuadrature& quadrature(int field) const;
  const SpMat& mass(int field) const;
  const SpMat& d_divdiv() const { return ddv_.mat; }
  const SpMat& d_symcurl() const { return dsc_.mat; }
  const SpMat& c1() const { return c1_; }
  const SpMat& c2() const { return c2_; }
  const SpMat& block_mass() const { return m_; }
  const SpMat& block_skew() const { return j_; }
  // A(x; y) = y^T (M - J) x
  SpMat bilinear_a() const { return m_ - j_; }
  // (q_i, divdiv xi_j) and (xi_i, symcurl zeta_j) by exact polynomial
  // differentiation and quadrature, without the interpolated operators.
  SpMat c1_direct() const;
  SpMat c2_direct() const;

  double energy(const VectorXd& x) const { return x.dot(m_ * x); }
  VectorXd random_state(unsigned seed) const;

 private:
  std::shared_ptr<const TetMesh> mesh_;
  int k_;
  GlobalSpace q_, s_, l_;
  std::unique_ptr<CellQuadrature> qq_, qs_, ql_;
  SparseOperator ddv_, dsc_;
  SpMat mq_, ms_, ml_, c1_, c2_, m_, j_;
};

// Manufactured fields sum_m g_m(t) F_m(x), one field per term.
struct MMSTerm {
  int field = 0;  // 0 sigma, 1 E, 2 B
  std::function<double(double)> g, dg;
  FieldJets space;  // batch 1, order <= 2
};

// zero | smooth (trigonometric in space, quadratic in time) | poly
// (global polynomials of degrees k-2, k, k+1, quadratic in time) | temporal
// (the poly fields times trigonometric functions of time).
std::vector<MMSTerm> manufactured(const std::string& name, int k);

// Loads and exact values of manufactured fields on an EBSystem.
class MMSData {
 public:
  MMSData(const EBSystem& sys, std::vector<MMSTerm> terms);

  bool empty() const { return terms_.empty(); }
  // Right-hand side of the forced system at time t.
  VectorXd forcing(double t) const;
  // A(sigma, E, B; q, xi, zeta) at time t for all test functions.
  VectorXd projection_rhs(double t) const;
  // L2 errors (sigma, E, B) of x against the fields at time t.
  std::array<double, 3> errors(const VectorXd& x, double t) const;

 private:
  const EBSystem* sys_;
  std::vector<MMSTerm> terms_;
  std::vector<VectorXd> p_, q_, r_;                 // forcing g, forcing g', projection g
  std::vector<std::vector<MatrixXd>> values_;       // per term, per cell
};

// Pi_h: solves A(Pi x; y) = rhs(y) for all y.
VectorXd project_pi_h(const EBSystem& sys, const VectorXd& rhs, double* residual = nullptr);

// Crank-Nicolson with one LU factorization of M - dt/2 J.
class CNStepper {
 public:
  CNStepper(const EBSystem& sys, double dt);
  ~CNStepper();
  // x_{n+1} from x_n and the forcing at both ends of the step.
  VectorXd step(const VectorXd& x, const VectorXd& f0, const VectorXd& f1);
  double max_residual() const { return max_residual_; }

 private:
  const EBSystem* sys_;
  double dt_;
  SpMat lhs_, rhs_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double max_residual_ = 0.0;
};

struct StepRecord {
  double t = 0.0, energy = 0.0;
  double err_sigma = 0.0, err_e = 0.0, err_b = 0.0;  // NaN without a reference solution
};

struct EBRun {
  std::vector<StepRecord> steps;
  Report report;
};

EBRun eb_run(const EBConfig& cfg, const EBSystem* prebuilt = nullptr);
// Spatial study on kuhn_cube(2^i), i < levels, with the smooth solution;
// temporal study on the config mesh halving dt time_levels times with the
// temporal solution; exactness with the poly solution.
Report eb_convergence(const EBConfig& cfg, int levels);

void write_csv(std::ostream& out, const std::vector<StepRecord>& steps);

// beta_h = smallest singular value of A in the Hilbert norm
// |q|^2 + |xi|^2 + |divdiv xi|^2 + |zeta|^2 + |symcurl zeta|^2.
Report infsup_estimate(const TetMesh& mesh, int k, unsigned seed, int trials = 50);
// Dense evaluation below this many unknowns, Lanczos above.
inline constexpr int kDenseInfsupLimit = 2000;

}  // namespace divdiv
