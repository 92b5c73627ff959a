// SPDX-License-Identifier: Apache-2.0

// Command-line driver: runs, structural checks, conservation checks, convergence sweeps and
// mesh export.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "feec/checks.hpp"
#include "feec/driver.hpp"

using namespace feec;

namespace
{

// Prints one labelled check and folds it into the exit status.
struct Report
{
  bool ok = true;
  void line(bool pass, const std::string &what)
  {
    std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
    ok = ok && pass;
  }
};

std::string fmt(const char *f, auto... args)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int cmd_run(const std::string &path)
{
  const RunConfig c = load_config(path);
  try {
    const RunSummary s = run(c, &std::cout);
    std::cout << "wrote " << s.csv_path << " and " << s.summary_path << "\n";
  } catch (const NonPositiveDepth &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_check_mimetic(const std::string &path, int n_fields, std::uint64_t seed)
{
  const RunConfig c = load_config(path);
  const auto sp = space_of(c);
  Report r;
  const long long dd = d_squared_max(sp->mesh());
  r.line(dd == 0, fmt("integer d12 d01: max |entry| = %lld", dd));
  const double d2 = delta_squared_residual(*sp, n_fields, seed);
  r.line(d2 <= tolerance::delta_squared, fmt("delta_h delta_h over %d fields: %.3e", n_fields, d2));
  const HarmonicReport h = harmonic_rank(*sp, 50, seed, tolerance::harmonic_threshold);
  r.line(h.rank == 2, fmt("harmonic 1-forms: rank %d (expected 2)", h.rank));
  const auto ops = build_dual_operators(sp);
  const CommutingReport cm = commuting_check(*ops, 10, seed);
  r.line(cm.k0 <= tolerance::commuting, fmt("H1 d0 = -delta_h H0: %.3e", cm.k0));
  r.line(cm.k1 <= tolerance::commuting, fmt("H2 d1 = delta_h H1: %.3e", cm.k1));
  r.line(cm.sigma_ratio_min > tolerance::sigma_ratio,
         fmt("Hodge sigma_min/sigma_max: %.3e", cm.sigma_ratio_min));
  return r.ok ? 0 : 1;
}

int cmd_check_conservation(const std::string &path, int n_states, std::uint64_t seed)
{
  const RunConfig c = load_config(path);
  const auto sp = space_of(c);
  const auto ops = build_dual_operators(sp);
  const ConservationReport cr = conservation_check(sp, ops.get(), reference_of(c), n_states, seed);
  Report r;
  const char *names[3] = {"energy_enstrophy", "apvm", "supg"};
  for (int k = 0; k < 3; ++k)
    r.line(cr.energy[k] <= tolerance::energy, fmt("dE/dt %s: %.3e", names[k], cr.energy[k]));
  r.line(cr.enstrophy_ee <= tolerance::enstrophy_ee,
         fmt("dZ/dt energy_enstrophy: %.3e", cr.enstrophy_ee));
  r.line(cr.enstrophy_apvm_max <= tolerance::enstrophy_apvm,
         fmt("max dZ/dt apvm (signed): %.3e", cr.enstrophy_apvm_max));
  r.line(cr.pv_consistency_projection <= tolerance::pv_consistency,
         fmt("PV consistency, projected flux: %.3e", cr.pv_consistency_projection));
  r.line(cr.pv_consistency_upwind <= tolerance::pv_consistency,
         fmt("PV consistency, upwind flux: %.3e", cr.pv_consistency_upwind));
  r.line(cr.pv_consistency_dual <= tolerance::pv_consistency,
         fmt("PV consistency, primal-dual: %.3e", cr.pv_consistency_dual));
  r.line(cr.recovery_p0 <= tolerance::recovery, fmt("P0 flux recovery: %.3e", cr.recovery_p0));
  if (cr.dg_checked) {
    r.line(cr.recovery_q1 <= tolerance::recovery, fmt("Q1 flux recovery: %.3e", cr.recovery_q1));
    r.line(cr.limiter_divergence_abs <= tolerance::limiter,
           fmt("limiter flux divergence: %.3e m", cr.limiter_divergence_abs));
    r.line(cr.pv_consistency_dg_limited <= tolerance::pv_consistency,
           fmt("PV consistency, limited Q1 step: %.3e", cr.pv_consistency_dg_limited));
  } else {
    std::cout << "SKIP Q1 depth checks (mesh cells are not parallelograms)\n";
  }
  return r.ok ? 0 : 1;
}

int cmd_convergence(const std::string &path, const std::string &out)
{
  const RunConfig c = load_config(path);
  const auto rows = gravity_wave_convergence(c, &std::cerr);
  const std::string table = convergence_table(rows);
  std::cout << table;
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f)
      throw Error("cannot write " + out);
    f << table;
  }
  bool ok = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    ok = ok && rows[i].slope >= tolerance::slope;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Mimetic finite element rotating shallow-water solver"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 1;

  auto *run_cmd = app.add_subcommand("run", "Run a simulation described by a config file");
  run_cmd->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);

  int n_fields = 100;
  auto *mim = app.add_subcommand("check-mimetic", "Exactness, harmonic forms, commuting Hodge stars");
  mim->add_option("config", config, "Config file (mesh keys are used)")->required()->check(CLI::ExistingFile);
  mim->add_option("--fields", n_fields, "Random fields for delta_h delta_h")->check(CLI::PositiveNumber);
  mim->add_option("--seed", seed, "Random seed");

  int n_states = 100;
  auto *cons = app.add_subcommand("check-conservation", "Invariant rates on random states");
  cons->add_option("config", config, "Config file (mesh keys are used)")->required()->check(CLI::ExistingFile);
  cons->add_option("--states", n_states, "Random states")->check(CLI::PositiveNumber);
  cons->add_option("--seed", seed, "Random seed");

  std::string table_out;
  auto *conv = app.add_subcommand("convergence", "Linear gravity-wave refinement sweep");
  conv->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", table_out, "Also write the table to this CSV file");

  std::string kind = "quad", mesh_out;
  int nx = 8, ny = 8;
  double Lx = 1e6, Ly = 1e6;
  bool dual = false;
  auto *exp = app.add_subcommand("export-mesh", "Write a periodic mesh in the text format");
  exp->add_option("--kind", kind, "tri, quad or hex");
  exp->add_option("--nx", nx)->check(CLI::Range(2, 1 << 20));
  exp->add_option("--ny", ny)->check(CLI::Range(2, 1 << 20));
  exp->add_option("--Lx", Lx)->check(CLI::PositiveNumber);
  exp->add_option("--Ly", Ly)->check(CLI::PositiveNumber);
  exp->add_flag("--dual", dual, "Write the barycentric dual instead");
  exp->add_option("--out", mesh_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd)
      return cmd_run(config);
    if (*mim)
      return cmd_check_mimetic(config, n_fields, seed);
    if (*cons)
      return cmd_check_conservation(config, n_states, seed);
    if (*conv)
      return cmd_convergence(config, table_out);
    if (*exp) {
      Mesh m = build_periodic_mesh(cell_kind_from_string(kind), nx, ny, Lx, Ly);
      if (dual)
        m = build_dual_mesh(m);
      if (mesh_out.empty()) {
        write_mesh(std::cout, m);
      } else {
        std::ofstream f(mesh_out);
        if (!f)
          throw Error("cannot write " + mesh_out);
        write_mesh(f, m);
      }
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
