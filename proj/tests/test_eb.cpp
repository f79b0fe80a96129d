#include "divdiv/eb_solver.hpp"

#include "doctest.h"

#include <algorithm>
#include <complex>
#include <sstream>

using namespace divdiv;

namespace {

EBConfig config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST_CASE("config parsing") {
  EBConfig c = config("# comment\nmesh = two_tets\nk=4\n\ndt = 0.25 # quarter\nt_final=1\ninitial=poly\n");
  CHECK(c.mesh == "two_tets");
  CHECK(c.k == 4);
  CHECK(c.steps() == 4);
  CHECK(c.forcing);
  CHECK_FALSE(config("initial = random\n").forcing);
  CHECK_THROWS_AS(config("colour = red\n"), ConfigError);
  CHECK_THROWS_AS(config("k = three\n"), ConfigError);
  CHECK_THROWS_AS(config("k = 2\n"), ConfigError);
  CHECK_THROWS_AS(config("t_final = 1\ndt = 0.3\n"), ConfigError);
  CHECK_THROWS_AS(config("initial = random\nforcing = on\n"), ConfigError);
  CHECK_THROWS_AS(config("k = 3\nk = 4\n"), ConfigError);
  CHECK_THROWS_AS(config("just text\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent.cfg"), ConfigError);
}

TEST_CASE("block structure") {
  EBSystem sys(two_tets(), 3);
  const SpMat& j = sys.block_skew();
  CHECK(SpMat(j + SpMat(j.transpose())).norm() == 0.0);
  CHECK((sys.c1() - sys.c1_direct()).norm() < 1e-10 * sys.c1().norm());
  CHECK((sys.c2() - sys.c2_direct()).norm() < 1e-10 * sys.c2().norm());
  VectorXd x = sys.random_state(3);
  CHECK(sys.energy(x) > 0);
}

TEST_CASE("Crank-Nicolson against the exact flow") {
  // With M = L L^T, K = L^{-1} J L^{-T} is skew and iK = U diag(lambda) U^H, so
  // the semidiscrete flow is x(t) = L^{-T} U exp(-i lambda t) U^H L^T x(0).
  EBSystem sys(single_tet(), 3);
  const MatrixXd m = MatrixXd(sys.block_mass());
  const MatrixXd j = MatrixXd(sys.block_skew());
  Eigen::LLT<MatrixXd> llt(m);
  const MatrixXd l = llt.matrixL();
  MatrixXd k = l.triangularView<Eigen::Lower>().solve(j);
  k = l.triangularView<Eigen::Lower>().solve(k.transpose()).transpose();
  CHECK((k + k.transpose()).norm() < 1e-8 * k.norm());
  const Eigen::MatrixXcd ik = std::complex<double>(0, 1) * k.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ik);
  const VectorXd lam = es.eigenvalues();
  const Eigen::MatrixXcd& u = es.eigenvectors();

  // a few slow modes with both signs of frequency, so the state is real
  Eigen::VectorXcd y0 = Eigen::VectorXcd::Zero(lam.size());
  std::vector<Index> order(lam.size());
  for (Index i = 0; i < lam.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(lam(a)) < std::abs(lam(b)); });
  int used = 0;
  for (Index i : order) {
    if (std::abs(lam(i)) < 1e-6) continue;
    y0(i) = 1.0;
    if (++used == 12) break;
  }
  auto state = [&](double t) {
    Eigen::VectorXcd y = y0;
    for (Index i = 0; i < y.size(); ++i) y(i) *= std::exp(std::complex<double>(0, -lam(i) * t));
    Eigen::VectorXcd z = u * y;
    VectorXd re = z.real();
    return VectorXd(l.transpose().triangularView<Eigen::Upper>().solve(re));
  };
  const VectorXd x0 = state(0.0);
  const double e0 = sys.energy(x0);
  CHECK(e0 > 0);
  const double t = 0.5;
  const VectorXd exact = state(t);
  CHECK(sys.energy(exact) == doctest::Approx(e0).epsilon(1e-10));
  std::vector<double> err;
  for (int n : {20, 40, 80}) {
    CNStepper cn(sys, t / n);
    VectorXd x = x0;
    for (int s = 0; s < n; ++s) x = cn.step(x, VectorXd(), VectorXd());
    err.push_back(std::sqrt(sys.energy(x - exact) / e0));
    CHECK(sys.energy(x) == doctest::Approx(e0).epsilon(1e-11));
  }
  CHECK(err[2] < 1e-2);
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("projection reproduces discrete states") {
  EBSystem sys(two_tets(), 3);
  VectorXd x = sys.random_state(4);
  double res = 1;
  VectorXd y = project_pi_h(sys, sys.bilinear_a() * x, &res);
  CHECK(res < 1e-12);
  CHECK((y - x).norm() < 1e-8 * x.norm());
}

TEST_CASE("polynomial manufactured solution is reproduced") {
  EBConfig c = config("mesh = two_tets\nk = 3\nt_final = 0.5\ndt = 0.1\ninitial = poly\n");
  EBRun r = eb_run(c);
  CHECK(r.report.ok());
  CHECK(r.steps.size() == 6);
  for (const auto& s : r.steps) CHECK(s.err_sigma + s.err_e + s.err_b < 1e-9);
}

TEST_CASE("energy is conserved without forcing") {
  EBConfig c = config("mesh = two_tets\nk = 3\nt_final = 1\ndt = 0.05\ninitial = random\nseed = 2\n");
  EBRun r = eb_run(c);
  CHECK(r.report.ok());
  for (const auto& s : r.steps) CHECK(s.energy == doctest::Approx(r.steps[0].energy).epsilon(1e-10));
  CHECK(std::isnan(r.steps[1].err_e));
  std::ostringstream csv;
  write_csv(csv, r.steps);
  CHECK(csv.str().rfind("t,energy,err_sigma,err_E,err_B\n0,", 0) == 0);
}

TEST_CASE("zero data stays zero") {
  EBRun r = eb_run(config("mesh = single_tet\nt_final = 0.2\ndt = 0.1\n"));
  CHECK(r.report.ok());
  CHECK(r.steps.back().energy == 0.0);
}

TEST_CASE("inf-sup estimate on one cell") {
  Report r = infsup_estimate(single_tet(), 3, 0, 20);
  CHECK(r.ok());
  CHECK(r.data["method"] == "dense");
  CHECK(r.data["beta"].get<double>() > 0.1);
}
