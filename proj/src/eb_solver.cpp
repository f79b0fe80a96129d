#include "divdiv/eb_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace divdiv {

namespace {

using Trip = Eigen::Triplet<double>;
using SparseLUSolver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
}

SpMat block_diag(const std::vector<const SpMat*>& blocks) {
  Index n = 0;
  for (auto* b : blocks) n += b->rows();
  std::vector<Trip> t;
  Index off = 0;
  for (auto* b : blocks) {
    for (int k = 0; k < b->outerSize(); ++k)
      for (SpMat::InnerIterator it(*b, k); it; ++it) t.emplace_back(off + it.row(), off + it.col(), it.value());
    off += b->rows();
  }
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void add_block(std::vector<Trip>& t, const SpMat& b, Index r0, Index c0, double s) {
  for (int k = 0; k < b.outerSize(); ++k)
    for (SpMat::InnerIterator it(b, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
}

const char* kFamilies[3] = {"dg_scalar", "hdivdiv_S", "hsymcurl_T"};

}  // namespace

// ---------------------------------------------------------------------------
// configuration

int EBConfig::steps() const {
  const double n = t_final / dt;
  return static_cast<int>(std::lround(n));
}

EBConfig parse_config(std::istream& in) {
  EBConfig c;
  bool forcing_set = false;
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("config: empty value for " + key);
    if (seen[key]++) throw ConfigError("config: duplicate key " + key);
    if (key == "mesh") {
      c.mesh = val;
    } else if (key == "k") {
      c.k = static_cast<int>(to_int(key, val));
    } else if (key == "t_final") {
      c.t_final = to_double(key, val);
    } else if (key == "dt") {
      c.dt = to_double(key, val);
    } else if (key == "initial") {
      c.initial = val;
    } else if (key == "forcing") {
      if (val != "on" && val != "off") throw ConfigError("config: forcing expects on or off");
      c.forcing = val == "on";
      forcing_set = true;
    } else if (key == "seed") {
      long long s = to_int(key, val);
      if (s < 0) throw ConfigError("config: seed must be nonnegative");
      c.seed = static_cast<unsigned>(s);
    } else if (key == "tol") {
      c.tol = to_double(key, val);
    } else if (key == "time_levels") {
      c.time_levels = static_cast<int>(to_int(key, val));
    } else {
      throw ConfigError("config: unknown key " + key);
    }
  }
  if (c.k < 3) throw ConfigError("config: k must be at least 3");
  if (c.t_final <= 0 || c.dt <= 0) throw ConfigError("config: t_final and dt must be positive");
  if (std::abs(c.t_final / c.dt - c.steps()) > 1e-9 * std::max(1.0, c.t_final / c.dt))
    throw ConfigError("config: t_final must be an integer multiple of dt");
  if (c.tol <= 0) throw ConfigError("config: tol must be positive");
  if (c.time_levels < 2) throw ConfigError("config: time_levels must be at least 2");
  static const char* inits[] = {"zero", "random", "smooth", "poly", "temporal"};
  if (std::find(std::begin(inits), std::end(inits), c.initial) == std::end(inits))
    throw ConfigError("config: unknown initial data " + c.initial);
  if (!forcing_set) c.forcing = c.manufactured();
  if (c.forcing && !c.manufactured()) throw ConfigError("config: forcing requires smooth, poly or temporal data");
  return c;
}

EBConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// system

EBSystem::EBSystem(const TetMesh& mesh, int k) : mesh_(std::make_shared<const TetMesh>(mesh)), k_(k) {
  q_ = global_space(*mesh_, kFamilies[0], k);
  s_ = global_space(*mesh_, kFamilies[1], k);
  l_ = global_space(*mesh_, kFamilies[2], k);
  const int qdeg = 2 * k + 4;
  qq_ = std::make_unique<CellQuadrature>(q_, qdeg);
  qs_ = std::make_unique<CellQuadrature>(s_, qdeg);
  ql_ = std::make_unique<CellQuadrature>(l_, qdeg);
  mq_ = qq_->mass();
  ms_ = qs_->mass();
  ml_ = ql_->mass();
  ddv_ = assemble_diff(DiffOp::divdiv, s_, q_);
  dsc_ = assemble_diff(DiffOp::symcurl, l_, s_);
  c1_ = (mq_ * ddv_.mat).pruned();
  c2_ = (ms_ * dsc_.mat).pruned();
  m_ = block_diag({&mq_, &ms_, &ml_});
  std::vector<Trip> t;
  const Index os = nq(), ol = nq() + ns();
  add_block(t, c1_, 0, os, 1.0);
  add_block(t, SpMat(c1_.transpose()), os, 0, -1.0);
  add_block(t, c2_, os, ol, -1.0);
  add_block(t, SpMat(c2_.transpose()), ol, os, 1.0);
  j_ = SpMat(size(), size());
  j_.setFromTriplets(t.begin(), t.end());
}

const GlobalSpace& EBSystem::space(int field) const { return field == 0 ? q_ : field == 1 ? s_ : l_; }
const CellQuadrature& EBSystem::quadrature(int field) const { return field == 0 ? *qq_ : field == 1 ? *qs_ : *ql_; }
const SpMat& EBSystem::mass(int field) const { return field == 0 ? mq_ : field == 1 ? ms_ : ml_; }

namespace {

// sum_cells N_test^T G(test shape, op(trial shape)) D N_trial
SpMat direct_coupling(const GlobalSpace& test, const GlobalSpace& trial, DiffOp op) {
  std::vector<Trip> t;
  for (size_t c = 0; c < trial.elems.size(); ++c) {
    const FiniteElement& et = test.elems[c];
    const FiniteElement& es = trial.elems[c];
    DiffMatrix d = diff(op, es.shape);
    MatrixXd g = inner_products(members(et.shape), members(d.dst));
    MatrixXd loc = et.nodal.transpose() * g * d.mat * es.nodal;
    for (Index i = 0; i < loc.rows(); ++i)
      for (Index j = 0; j < loc.cols(); ++j) t.emplace_back(test.l2g[c][i], trial.l2g[c][j], loc(i, j));
  }
  SpMat m(test.ndofs, trial.ndofs);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SpMat EBSystem::c1_direct() const { return direct_coupling(q_, s_, DiffOp::divdiv); }
SpMat EBSystem::c2_direct() const { return direct_coupling(s_, l_, DiffOp::symcurl); }

VectorXd EBSystem::random_state(unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VectorXd x(size());
  for (Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
  return x;
}

// ---------------------------------------------------------------------------
// manufactured solutions

namespace {

FieldJets trig_field(const VectorXd& m, const Vec3& a, double b) {
  return [m, a, b](const Vec3& x, int order) {
    Jet j(static_cast<int>(m.size()), order, 1);
    const double th = a.dot(x) + b, s = std::sin(th), c = std::cos(th);
    j.value().col(0) = m * s;
    if (order >= 1)
      for (int q = 0; q < 3; ++q) j.grad(q).col(0) = m * (a(q) * c);
    if (order >= 2)
      for (int r = 0; r < 3; ++r)
        for (int q = 0; q < 3; ++q) j.hess(r, q).col(0) = m * (-a(r) * a(q) * s);
    return j;
  };
}

VectorXd sym_flat(double a, double b, double c, double d, double e, double f) {
  VectorXd m(9);
  m << a, d, e, d, b, f, e, f, c;
  return m;
}

VectorXd traceless_flat(std::initializer_list<double> v8) {
  VectorXd m(9);
  int i = 0;
  for (double v : v8) m(i++) = v;
  m(8) = -m(0) - m(4);
  return m;
}

// Contains the unit cube, so Bernstein coefficients in [-1, 1] bound the
// values there.
const Simplex kPolyCell = Simplex::make({Vec3(-0.1, -0.1, -0.1), Vec3(3.2, -0.1, -0.1), Vec3(-0.1, 3.2, -0.1),
                                         Vec3(-0.1, -0.1, 3.2)});

// Random global polynomial of the given degree with values in S (comp 9,
// symmetric) or T (traceless) or scalars.
PolyField random_poly(int degree, Range r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int nc = range_ncomp(r);
  PolyField f = PolyField::zero(kPolyCell, degree, nc);
  for (Index i = 0; i < f.coef.rows(); ++i)
    for (int c = 0; c < nc; ++c) f.coef(i, c) = u(rng);
  if (r == Range::S)
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) f.coef.col(3 * j + i) = f.coef.col(3 * i + j);
  if (r == Range::T) f.coef.col(8) = -f.coef.col(0) - f.coef.col(4);
  return f;
}

FieldJets poly_jets(const PolyField& f) {
  return [f](const Vec3& x, int order) { return f.jet(x, order); };
}

}  // namespace

std::vector<MMSTerm> manufactured(const std::string& name, int k) {
  std::vector<MMSTerm> out;
  if (name == "zero") return out;
  auto quad = [](double a, double b, double c) {
    return std::pair<std::function<double(double)>, std::function<double(double)>>{
        [=](double t) { return a + b * t + c * t * t; }, [=](double t) { return b + 2 * c * t; }};
  };
  auto [gs, dgs] = quad(1.0, 0.5, -1.0 / 3);
  auto [ge, dge] = quad(1.0, -1.0 / 3, 0.25);
  auto [gb, dgb] = quad(0.5, 1.0, -0.2);
  if (name == "smooth") {
    VectorXd one = VectorXd::Ones(1);
    out.push_back({0, gs, dgs, trig_field(one, Vec3(0.9, -0.6, 0.7), 0.2)});
    out.push_back({1, ge, dge, trig_field(sym_flat(1.0, 0.5, -0.3, 0.4, -0.2, 0.6), Vec3(0.5, 0.8, -0.4), 0.1)});
    out.push_back({1, ge, dge, trig_field(sym_flat(-0.2, 0.7, 0.9, 0.1, 0.3, -0.5), Vec3(-0.7, 0.3, 0.6), 0.4)});
    out.push_back({2, gb, dgb, trig_field(traceless_flat({0.6, -0.4, 0.2, 0.3, -0.1, 0.5, 0.7, -0.3}),
                                          Vec3(0.4, -0.5, 0.8), 0.3)});
    out.push_back({2, gb, dgb, trig_field(traceless_flat({-0.3, 0.5, 0.1, -0.6, 0.4, 0.2, -0.2, 0.6}),
                                          Vec3(0.6, 0.7, 0.2), -0.2)});
    return out;
  }
  if (name != "poly" && name != "temporal") throw std::invalid_argument("unknown manufactured solution " + name);
  std::mt19937_64 rng(20240611);
  PolyField ps = random_poly(k - 2, Range::scalar, rng);
  PolyField pe = random_poly(k, Range::S, rng);
  PolyField pb = random_poly(k + 1, Range::T, rng);
  if (name == "temporal") {
    gs = [](double t) { return std::sin(2 * t + 0.3); };
    dgs = [](double t) { return 2 * std::cos(2 * t + 0.3); };
    ge = [](double t) { return std::cos(1.5 * t); };
    dge = [](double t) { return -1.5 * std::sin(1.5 * t); };
    gb = [](double t) { return std::sin(t) + 0.5; };
    dgb = [](double t) { return std::cos(t); };
  }
  out.push_back({0, gs, dgs, poly_jets(ps)});
  out.push_back({1, ge, dge, poly_jets(pe)});
  out.push_back({2, gb, dgb, poly_jets(pb)});
  return out;
}

MMSData::MMSData(const EBSystem& sys, std::vector<MMSTerm> terms) : sys_(&sys), terms_(std::move(terms)) {
  const int nt = sys.mesh().nt();
  const Index nq = sys.nq(), ns = sys.ns(), nl = sys.nl(), n = sys.size();
  // Per cell values at the quadrature points of space `field`, of `op` applied to f.
  auto sample = [&](const FieldJets& f, int field, int order, const std::function<Jet(const Jet&)>& op) {
    const CellQuadrature& q = sys.quadrature(field);
    std::vector<MatrixXd> v(nt);
    for (int c = 0; c < nt; ++c) {
      const auto& pts = q.points(c);
      v[c].resize(pts.size(), q.ncomp());
      for (size_t p = 0; p < pts.size(); ++p) {
        Jet j = op(f(pts[p], order));
        if (j.ncomp() != q.ncomp()) throw std::logic_error("manufactured field has wrong component count");
        v[c].row(p) = j.value().col(0).transpose();
      }
    }
    return v;
  };
  auto ident = [](const Jet& j) { return j; };
  for (const auto& term : terms_) {
    VectorXd p = VectorXd::Zero(n), qv = VectorXd::Zero(n), r = VectorXd::Zero(n);
    auto vals = sample(term.space, term.field, 0, ident);
    if (term.field == 0) {
      VectorXd bq = sys.quadrature(0).load(vals);
      VectorXd dt = sys.d_divdiv().transpose() * bq;
      p.segment(nq, ns) = dt;
      qv.head(nq) = bq;
      r.head(nq) = bq;
      r.segment(nq, ns) = dt;
    } else if (term.field == 1) {
      VectorXd bdd = sys.quadrature(0).load(sample(term.space, 0, 2, [](const Jet& j) { return div_div(j); }));
      VectorXd be = sys.quadrature(1).load(vals);
      VectorXd sct = sys.d_symcurl().transpose() * be;
      p.head(nq) = -bdd;
      p.tail(nl) = -sct;
      qv.segment(nq, ns) = be;
      r.head(nq) = -bdd;
      r.segment(nq, ns) = be;
      r.tail(nl) = -sct;
    } else {
      VectorXd bsc = sys.quadrature(1).load(sample(term.space, 1, 1, [](const Jet& j) { return sym_curl(j); }));
      VectorXd bb = sys.quadrature(2).load(vals);
      p.segment(nq, ns) = bsc;
      qv.tail(nl) = bb;
      r.segment(nq, ns) = bsc;
      r.tail(nl) = bb;
    }
    p_.push_back(std::move(p));
    q_.push_back(std::move(qv));
    r_.push_back(std::move(r));
    values_.push_back(std::move(vals));
  }
}

VectorXd MMSData::forcing(double t) const {
  VectorXd f = VectorXd::Zero(sys_->size());
  for (size_t m = 0; m < terms_.size(); ++m) f += terms_[m].g(t) * p_[m] + terms_[m].dg(t) * q_[m];
  return f;
}

VectorXd MMSData::projection_rhs(double t) const {
  VectorXd f = VectorXd::Zero(sys_->size());
  for (size_t m = 0; m < terms_.size(); ++m) f += terms_[m].g(t) * r_[m];
  return f;
}

std::array<double, 3> MMSData::errors(const VectorXd& x, double t) const {
  std::array<double, 3> e{};
  const Index off[3] = {0, sys_->nq(), sys_->nq() + sys_->ns()};
  const Index len[3] = {sys_->nq(), sys_->ns(), sys_->nl()};
  const int nt = sys_->mesh().nt();
  for (int f = 0; f < 3; ++f) {
    const CellQuadrature& q = sys_->quadrature(f);
    std::vector<MatrixXd> exact(nt, MatrixXd::Zero(q.npoints(), q.ncomp()));
    for (size_t m = 0; m < terms_.size(); ++m) {
      if (terms_[m].field != f) continue;
      const double g = terms_[m].g(t);
      for (int c = 0; c < nt; ++c) exact[c] += g * values_[m][c];
    }
    e[f] = std::sqrt(std::max(0.0, q.l2_error_sq(exact, x.segment(off[f], len[f]))));
  }
  return e;
}

// ---------------------------------------------------------------------------
// solvers

namespace {

double residual_of(const SpMat& a, const VectorXd& x, const VectorXd& b) {
  const double nb = b.norm();
  const double nr = (a * x - b).norm();
  return nb > 0 ? nr / nb : nr;
}

}  // namespace

VectorXd project_pi_h(const EBSystem& sys, const VectorXd& rhs, double* residual) {
  SpMat a = sys.bilinear_a();
  a.makeCompressed();
  SparseLUSolver lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("projection: factorization failed");
  VectorXd x = lu.solve(rhs);
  if (residual) *residual = residual_of(a, x, rhs);
  return x;
}

struct CNStepper::Impl {
  SparseLUSolver lu;
};

CNStepper::CNStepper(const EBSystem& sys, double dt) : sys_(&sys), dt_(dt), impl_(std::make_unique<Impl>()) {
  lhs_ = sys.block_mass() - 0.5 * dt * sys.block_skew();
  rhs_ = sys.block_mass() + 0.5 * dt * sys.block_skew();
  lhs_.makeCompressed();
  impl_->lu.compute(lhs_);
  if (impl_->lu.info() != Eigen::Success) throw std::runtime_error("Crank-Nicolson: factorization failed");
}

CNStepper::~CNStepper() = default;

VectorXd CNStepper::step(const VectorXd& x, const VectorXd& f0, const VectorXd& f1) {
  VectorXd b = rhs_ * x;
  if (f0.size()) b += 0.5 * dt_ * (f0 + f1);
  VectorXd y = impl_->lu.solve(b);
  max_residual_ = std::max(max_residual_, residual_of(lhs_, y, b));
  return y;
}

void write_csv(std::ostream& out, const std::vector<StepRecord>& steps) {
  out << "t,energy,err_sigma,err_E,err_B\n";
  auto num = [](double v) {
    std::ostringstream o;
    o << std::setprecision(17);
    if (!std::isnan(v)) o << v;
    return o.str();
  };
  for (const auto& s : steps)
    out << num(s.t) << ',' << num(s.energy) << ',' << num(s.err_sigma) << ',' << num(s.err_e) << ','
        << num(s.err_b) << '\n';
}

namespace {

Json config_json(const EBConfig& c) {
  Json j;
  j["mesh"] = c.mesh;
  j["k"] = c.k;
  j["t_final"] = c.t_final;
  j["dt"] = c.dt;
  j["initial"] = c.initial;
  j["forcing"] = c.forcing ? "on" : "off";
  j["seed"] = c.seed;
  j["tol"] = c.tol;
  return j;
}

Json dims_json(const EBSystem& s) {
  Json d;
  d["sigma"] = s.nq();
  d["E"] = s.ns();
  d["B"] = s.nl();
  return d;
}

}  // namespace

EBRun eb_run(const EBConfig& cfg, const EBSystem* prebuilt) {
  std::unique_ptr<EBSystem> own;
  if (!prebuilt) {
    own = std::make_unique<EBSystem>(load_mesh(cfg.mesh), cfg.k);
    prebuilt = own.get();
  }
  const EBSystem& sys = *prebuilt;
  if (sys.k() != cfg.k) throw std::invalid_argument("eb_run: system built for another k");
  EBRun run;
  Report& rep = run.report;
  rep.command = "eb run";
  rep.inputs = config_json(cfg);
  rep.data["dims"] = dims_json(sys);

  const bool mms = cfg.manufactured();
  MMSData data(sys, manufactured(mms ? cfg.initial : "zero", cfg.k));
  const bool reference = cfg.initial == "zero" || (mms && cfg.forcing);

  VectorXd x;
  double proj_res = 0.0;
  if (cfg.initial == "random")
    x = sys.random_state(cfg.seed);
  else if (mms)
    x = project_pi_h(sys, data.projection_rhs(0.0), &proj_res);
  else
    x = VectorXd::Zero(sys.size());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto record = [&](double t) {
    StepRecord r;
    r.t = t;
    r.energy = sys.energy(x);
    if (reference) {
      auto e = data.errors(x, t);
      r.err_sigma = e[0];
      r.err_e = e[1];
      r.err_b = e[2];
    } else {
      r.err_sigma = r.err_e = r.err_b = nan;
    }
    run.steps.push_back(r);
  };

  CNStepper cn(sys, cfg.dt);
  const int n = cfg.steps();
  record(0.0);
  VectorXd f0 = cfg.forcing ? data.forcing(0.0) : VectorXd();
  for (int s = 1; s <= n; ++s) {
    const double t = s * cfg.dt;
    VectorXd f1 = cfg.forcing ? data.forcing(t) : VectorXd();
    x = cn.step(x, f0, f1);
    f0 = std::move(f1);
    record(t);
  }

  const double e0 = run.steps.front().energy;
  double drift = 0.0, max_err = 0.0;
  for (const auto& r : run.steps) {
    drift = std::max(drift, std::abs(r.energy - e0));
    if (reference) max_err = std::max(max_err, r.err_sigma + r.err_e + r.err_b);
  }
  const double rel_drift = e0 > 0 ? drift / e0 : drift;
  const auto& last = run.steps.back();
  rep.data["steps"] = n;
  rep.data["energy_initial"] = e0;
  rep.data["energy_final"] = last.energy;
  rep.data["energy_drift_relative"] = rel_drift;
  rep.data["cn_residual_max"] = cn.max_residual();
  if (reference) {
    rep.data["final_errors"] = {{"sigma", last.err_sigma}, {"E", last.err_e}, {"B", last.err_b}};
    rep.data["max_error_sum"] = max_err;
  }
  rep.expect_le("Crank-Nicolson solve residual", cn.max_residual(), cfg.tol);
  if (mms) rep.expect_le("projection solve residual", proj_res, cfg.tol);
  if (!cfg.forcing) rep.expect_le("energy drift (relative)", rel_drift, 1e-8);
  if (cfg.initial == "poly" && cfg.forcing) rep.expect_le("polynomial solution reproduced", max_err, 1e-8, "oracle");
  if (cfg.initial == "zero") rep.expect_le("zero data stays zero", max_err, 0.0, "oracle");
  return run;
}

namespace {

double total_error(const StepRecord& r) {
  return std::sqrt(r.err_sigma * r.err_sigma + r.err_e * r.err_e + r.err_b * r.err_b);
}

}  // namespace

Report eb_convergence(const EBConfig& cfg, int levels) {
  if (levels < 2) throw std::invalid_argument("convergence: at least two levels required");
  Report rep;
  rep.command = "eb convergence";
  rep.inputs = config_json(cfg);
  rep.inputs["levels"] = levels;
  rep.inputs["time_levels"] = cfg.time_levels;

  // spatial
  EBConfig sc = cfg;
  sc.initial = "smooth";
  sc.forcing = true;
  Json spatial = Json::array();
  std::vector<double> hs, es;
  for (int l = 0; l < levels; ++l) {
    const int n = 1 << l;
    sc.mesh = "kuhn_cube(" + std::to_string(n) + ")";
    TetMesh mesh = load_mesh(sc.mesh);
    EBSystem sys(mesh, cfg.k);
    EBRun r = eb_run(sc, &sys);
    const double h = mesh.max_diameter();
    const auto& last = r.steps.back();
    hs.push_back(h);
    es.push_back(total_error(last));
    Json row = {{"mesh", sc.mesh}, {"h", h}, {"err_sigma", last.err_sigma}, {"err_E", last.err_e},
                {"err_B", last.err_b}, {"error", es.back()}};
    if (l > 0) row["rate"] = std::log(es[l - 1] / es[l]) / std::log(hs[l - 1] / hs[l]);
    spatial.push_back(row);
  }
  rep.data["spatial"] = spatial;
  const double srate = spatial.back()["rate"].get<double>();

  // temporal
  EBConfig tc = cfg;
  tc.initial = "temporal";
  tc.forcing = true;
  TetMesh tmesh = load_mesh(cfg.mesh);
  EBSystem tsys(tmesh, cfg.k);
  Json temporal = Json::array();
  std::vector<double> ets;
  for (int l = 0; l < cfg.time_levels; ++l) {
    tc.dt = cfg.dt / (1 << l);
    EBRun r = eb_run(tc, &tsys);
    ets.push_back(total_error(r.steps.back()));
    Json row = {{"dt", tc.dt}, {"steps", tc.steps()}, {"error", ets.back()}};
    if (l > 0) row["rate"] = std::log2(ets[l - 1] / ets[l]);
    temporal.push_back(row);
  }
  rep.data["temporal"] = temporal;
  const double trate = temporal.back()["rate"].get<double>();

  // exactness
  EBConfig pc = cfg;
  pc.initial = "poly";
  pc.forcing = true;
  EBRun pr = eb_run(pc, &tsys);
  const double perr = pr.report.data["max_error_sum"].get<double>();
  rep.data["poly_max_error"] = perr;

  rep.expect_in("spatial order", srate, 1.7, 2.3, "oracle");
  rep.expect_in("temporal order", trate, 1.8, 2.2, "oracle");
  rep.expect_le("polynomial solution reproduced", perr, 1e-8, "oracle");
  return rep;
}

// ---------------------------------------------------------------------------
// inf-sup

namespace {

// Largest eigenvalue of T = A^{-1} N A^{-T} N, self-adjoint in the N inner
// product, by Lanczos with full reorthogonalization. Stops on a small Ritz
// residual or when the Ritz value moves by less than tol over 10 steps. Ritz
// values increase towards the top of the spectrum, so 1/sqrt(theta) bounds
// beta_h from above.
double lanczos_max(const SpMat& a, const SpMat& nrm, unsigned seed, int max_iter, double tol, int* iters) {
  SparseLUSolver lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("inf-sup: LU failed");
  const Index n = a.rows();
  auto apply = [&](const VectorXd& v) -> VectorXd {
    VectorXd w = nrm * v;
    w = lu.transpose().solve(w);
    w = nrm * w;
    return lu.solve(w);
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VectorXd q(n);
  for (Index i = 0; i < n; ++i) q(i) = nd(rng);
  VectorXd nq = nrm * q;
  const double q0 = std::sqrt(q.dot(nq));
  std::vector<VectorXd> basis{q / q0}, nbasis{nq / q0};  // Lanczos vectors and N times them
  std::vector<double> alpha, beta, history;
  double theta = 0.0;
  const int m = static_cast<int>(std::min<Index>(max_iter, n));
  for (int j = 0; j < m; ++j) {
    VectorXd w = apply(basis[j]);
    alpha.push_back(w.dot(nbasis[j]));
    for (int pass = 0; pass < 2; ++pass)
      for (size_t i = 0; i < basis.size(); ++i) w -= w.dot(nbasis[i]) * basis[i];
    VectorXd nw = nrm * w;
    const double bn = std::sqrt(std::max(0.0, w.dot(nw)));
    const int sz = j + 1;
    MatrixXd tri = MatrixXd::Zero(sz, sz);
    for (int i = 0; i < sz; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < sz) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(tri);
    theta = es.eigenvalues()(sz - 1);
    const double resid = bn * std::abs(es.eigenvectors()(sz - 1, sz - 1));
    *iters = sz;
    history.push_back(theta);
    const bool settled = sz > 10 && std::abs(theta - history[sz - 11]) <= tol * theta;
    if (resid <= tol * theta || settled || bn <= 1e-14 * theta) break;
    beta.push_back(bn);
    basis.push_back(w / bn);
    nbasis.push_back(nw / bn);
  }
  return theta;
}

double dense_beta(const SpMat& a, const SpMat& nrm) {
  Eigen::LLT<MatrixXd> llt{MatrixXd(nrm)};
  if (llt.info() != Eigen::Success) throw std::runtime_error("inf-sup: norm matrix not positive definite");
  MatrixXd l = llt.matrixL();
  MatrixXd b = llt.matrixL().solve(MatrixXd(a));
  b = llt.matrixL().solve(b.transpose()).transpose();
  VectorXd s = singular_values(b);
  return s(s.size() - 1);
}

}  // namespace

Report infsup_estimate(const TetMesh& mesh, int k, unsigned seed, int trials) {
  Report rep;
  rep.command = "infsup";
  rep.inputs = {{"mesh", mesh.name}, {"k", k}, {"seed", seed}};
  EBSystem sys(mesh, k);
  const Index nq = sys.nq(), ns = sys.ns(), nl = sys.nl(), n = sys.size();
  rep.data["dims"] = dims_json(sys);

  // direct couplings
  const double d1 = (sys.c1() - sys.c1_direct()).norm() / sys.c1().norm();
  const double d2 = (sys.c2() - sys.c2_direct()).norm() / sys.c2().norm();
  rep.data["coupling_mismatch"] = {{"divdiv", d1}, {"symcurl", d2}};
  rep.expect_le("divdiv coupling matches direct quadrature", d1, 1e-10);
  rep.expect_le("symcurl coupling matches direct quadrature", d2, 1e-10);
  const double skew = (sys.block_skew() + SpMat(sys.block_skew().transpose())).norm();
  rep.expect_le("coupling block is skew", skew, 0.0);

  const SpMat& dd = sys.d_divdiv();
  const SpMat& sc = sys.d_symcurl();
  SpMat ns_norm = sys.mass(1) + SpMat(dd.transpose() * sys.mass(0) * dd);
  SpMat nl_norm = sys.mass(2) + SpMat(sc.transpose() * sys.mass(1) * sc);
  SpMat nrm = block_diag({&sys.mass(0), &ns_norm, &nl_norm});
  SpMat a = sys.bilinear_a();
  a.makeCompressed();

  // A(x; y) >= (1/2)|x|^2 for y = (sigma - divdiv E, E + symcurl B, B)
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    VectorXd x(n);
    for (Index i = 0; i < n; ++i) x(i) = nd(rng);
    VectorXd y = x;
    y.head(nq) -= dd * x.segment(nq, ns);
    y.segment(nq, ns) += sc * x.tail(nl);
    const double lhs = y.dot(a * x);
    const double rhs = 0.5 * x.dot(nrm * x);
    min_ratio = std::min(min_ratio, lhs / rhs);
  }
  rep.data["identity_trials"] = trials;
  rep.data["identity_min_ratio"] = min_ratio;
  rep.expect_ge("A(x; y(x)) >= |x|^2 / 2", min_ratio, 1.0 - 1e-10, "identity");

  int iters = 0;
  const double beta_l = 1.0 / std::sqrt(lanczos_max(a, nrm, seed, 200, 1e-7, &iters));
  double beta = beta_l;
  if (n <= kDenseInfsupLimit) {
    const double beta_d = dense_beta(a, nrm);
    rep.data["beta_dense"] = beta_d;
    rep.expect_le("Lanczos agrees with dense SVD", std::abs(beta_l - beta_d) / beta_d, 1e-5, "oracle");
    beta = beta_d;
    rep.data["method"] = "dense";
  } else {
    rep.data["method"] = "lanczos";
  }
  rep.data["beta_lanczos"] = beta_l;
  rep.data["lanczos_iterations"] = iters;
  rep.data["beta"] = beta;
  rep.expect_ge("beta_h positive", beta, 1e-8, "oracle");
  return rep;
}

}  // namespace divdiv
