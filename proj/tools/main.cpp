#include "divdiv/complex_asm.hpp"
#include "divdiv/eb_solver.hpp"
#include "divdiv/fe2d.hpp"
#include "divdiv/fe3d.hpp"
#include "divdiv/mesh.hpp"
#include "divdiv/poly.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace divdiv;

namespace {

struct IOError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Outputs {
  std::string json, csv;
  unsigned seed = 0;
};

void add_outputs(CLI::App* c, Outputs& o) {
  c->add_option("--json", o.json, "write the JSON report to this path");
  c->add_option("--csv", o.csv, "write a CSV table to this path");
  c->add_option("--seed", o.seed, "random seed")->capture_default_str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IOError("cannot write " + path);
  return f;
}

std::string csv_field(const Json& j) {
  std::string s = j.is_string() ? j.get<std::string>() : j.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void write_checks_csv(std::ostream& out, const Report& r) {
  out << "name,pass,computed,expected,tolerance,source\n";
  for (const auto& c : r.checks)
    out << csv_field(c.name) << ',' << (c.pass ? 1 : 0) << ',' << csv_field(c.computed) << ','
        << csv_field(c.expected) << ',' << csv_field(Json(c.tolerance)) << ',' << c.source << '\n';
}

int finish(const Report& r, const Outputs& o, double seconds, const std::function<void(std::ostream&)>& csv = {}) {
  print_table(std::cout, r);
  if (!o.json.empty()) open_out(o.json) << dump_json(r);
  if (!o.csv.empty()) {
    auto f = open_out(o.csv);
    if (csv)
      csv(f);
    else
      write_checks_csv(f, r);
  }
  std::cout << "wall time " << std::fixed << std::setprecision(2) << seconds << " s\n";
  return r.ok() ? 0 : 1;
}

bool is_2d(const std::string& f) {
  const auto& v = families_2d();
  return std::find(v.begin(), v.end(), f) != v.end();
}

bool is_3d(const std::string& f) {
  const auto& v = families_3d();
  return std::find(v.begin(), v.end(), f) != v.end();
}

std::string family_list() {
  std::string s;
  for (const auto& f : families_2d()) s += f + ", ";
  for (const auto& f : families_3d()) s += f + ", ";
  return s + "all";
}

const char* kCsvHelp =
    "Per-step CSV (--csv) columns: t, energy, err_sigma, err_E, err_B.\n"
    "energy = |sigma|^2 + |E|^2 + |B|^2; the err_* columns are L2 errors against the\n"
    "manufactured solution and are empty for random initial data.";

const char* kConfigHelp =
    "Config file, one key = value per line ('#' comments):\n"
    "  mesh         builtin (single_tet, two_tets, kuhn_cube(n)) or mesh file\n"
    "  k            polynomial index >= 3\n"
    "  t_final, dt  final time and step; t_final/dt integral\n"
    "  initial      zero | random | smooth | poly | temporal\n"
    "  forcing      on | off (default on for smooth, poly, temporal)\n"
    "  seed, tol, time_levels";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element divdiv complex: audits and the linearized Einstein-Bianchi solver"};
  app.require_subcommand(1);
  Outputs out;
  int k = 3, dim = 3, trials = 50, cells = 5, levels = 2;
  std::string family, mesh_spec, config;

  auto* audit = app.add_subcommand("audit", "algebraic and structural audits");
  audit->require_subcommand(1);
  auto* a_poly = audit->add_subcommand("poly", "polynomial divdiv complex on one simplex");
  a_poly->add_option("--k", k, "polynomial index")->required();
  a_poly->add_option("--dim", dim, "2 or 3")->check(CLI::IsMember({2, 3}))->capture_default_str();
  add_outputs(a_poly, out);

  auto* a_elem = audit->add_subcommand("element", "unisolvence of an element family; 'all' adds bubble and conformity audits");
  a_elem->add_option("--family", family, family_list())->required();
  a_elem->add_option("--k", k, "polynomial index")->required();
  a_elem->add_option("--cells", cells, "random cells besides the reference cell")->capture_default_str();
  add_outputs(a_elem, out);

  auto* a_lem = audit->add_subcommand("lemmas", "trace and product identities on random polynomial fields");
  a_lem->add_option("--k", k, "polynomial index")->required();
  a_lem->add_option("--trials", trials, "random trials per identity")->capture_default_str();
  add_outputs(a_lem, out);

  auto* a_cx = audit->add_subcommand("complex", "global exactness and dimension counts on a mesh");
  a_cx->add_option("--mesh", mesh_spec, "builtin mesh or mesh file")->required();
  a_cx->add_option("--k", k, "polynomial index")->required();
  add_outputs(a_cx, out);

  auto* eb = app.add_subcommand("eb", "linearized Einstein-Bianchi solver");
  eb->require_subcommand(1);
  auto* eb_r = eb->add_subcommand("run", "Crank-Nicolson time stepping");
  eb_r->add_option("--config", config, "config file")->required();
  eb_r->footer(std::string(kConfigHelp) + "\n\n" + kCsvHelp);
  add_outputs(eb_r, out);
  auto* eb_c = eb->add_subcommand("convergence", "spatial and temporal convergence with manufactured solutions");
  eb_c->add_option("--config", config, "config file")->required();
  eb_c->add_option("--levels", levels, "spatial levels kuhn_cube(2^i), i < levels")->capture_default_str();
  eb_c->footer(std::string(kConfigHelp) + "\n\nCSV (--csv): level table with columns study, level, size, error, rate.");
  add_outputs(eb_c, out);

  auto* inf = app.add_subcommand("infsup", "discrete inf-sup constant of the Einstein-Bianchi form");
  inf->add_option("--mesh", mesh_spec, "builtin mesh or mesh file")->required();
  inf->add_option("--k", k, "polynomial index")->required();
  add_outputs(inf, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    if (k < 3) throw std::invalid_argument("k must be at least 3");
    if (*a_poly) {
      Report r = poly_complex_audit(dim, k);
      r.inputs["seed"] = out.seed;
      return finish(r, out, seconds());
    }
    if (*a_elem) {
      Report r;
      r.command = "audit element";
      r.inputs = {{"family", family}, {"k", k}, {"cells", cells}, {"seed", out.seed}};
      if (family == "all") {
        for (const auto& f : families_2d()) r.absorb(unisolvence_audit_2d(f, k, cells, out.seed), f);
        for (const auto& f : families_3d()) r.absorb(unisolvence_audit_3d(f, k, cells, out.seed), f);
        r.absorb(bubble_audit_2d(k), "bubbles_2d");
        r.absorb(bubble_audit_3d(k), "bubbles_3d");
        r.absorb(conformity_audit_3d(k, out.seed), "conformity");
      } else if (is_2d(family)) {
        r.absorb(unisolvence_audit_2d(family, k, cells, out.seed), family);
      } else if (is_3d(family)) {
        r.absorb(unisolvence_audit_3d(family, k, cells, out.seed), family);
      } else {
        throw std::invalid_argument("unknown family " + family + " (" + family_list() + ")");
      }
      return finish(r, out, seconds());
    }
    if (*a_lem) {
      Report r = trace_identity_audit(k, trials, out.seed);
      return finish(r, out, seconds());
    }
    if (*a_cx) {
      Report r = complex_audit(load_mesh(mesh_spec), k);
      r.inputs["seed"] = out.seed;
      return finish(r, out, seconds());
    }
    if (*eb_r) {
      EBConfig cfg = load_config(config);
      if (eb_r->count("--seed")) cfg.seed = out.seed;
      EBRun run = eb_run(cfg);
      run.report.inputs["config"] = config;
      return finish(run.report, out, seconds(), [&](std::ostream& f) { write_csv(f, run.steps); });
    }
    if (*eb_c) {
      EBConfig cfg = load_config(config);
      if (eb_c->count("--seed")) cfg.seed = out.seed;
      Report r = eb_convergence(cfg, levels);
      r.inputs["config"] = config;
      auto csv = [&](std::ostream& f) {
        f << "study,level,size,error,rate\n" << std::setprecision(17);
        int l = 0;
        for (const auto& row : r.data["spatial"])
          f << "spatial," << l++ << ',' << row["h"].get<double>() << ',' << row["error"].get<double>() << ','
            << (row.contains("rate") ? csv_field(row["rate"]) : "") << '\n';
        l = 0;
        for (const auto& row : r.data["temporal"])
          f << "temporal," << l++ << ',' << row["dt"].get<double>() << ',' << row["error"].get<double>() << ','
            << (row.contains("rate") ? csv_field(row["rate"]) : "") << '\n';
      };
      return finish(r, out, seconds(), csv);
    }
    if (*inf) {
      Report r = infsup_estimate(load_mesh(mesh_spec), k, out.seed);
      return finish(r, out, seconds());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
