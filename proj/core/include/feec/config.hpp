// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_CONFIG_HPP
#define FEEC_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "feec/mesh.hpp"
#include "feec/swe_primal.hpp"

namespace feec
{

enum class Formulation
{
  Primal,
  PrimalDual
};

enum class DepthScheme
{
  Projection,  // D_t = -D12 F with the projected flux
  Upwind       // donor-cell P0 depth with the recovered flux
};

enum class Integrator
{
  SSPRK3,
  SemiImplicit
};

std::string to_string(Formulation f);
std::string to_string(DepthScheme d);
std::string to_string(Integrator i);

struct RunConfig
{
  Formulation formulation = Formulation::Primal;
  CellKind mesh = CellKind::Quadrilateral;
  int nx = 16;
  int ny = 16;
  double Lx = 1e6;
  double Ly = 1e6;
  std::string family = "p1_rt0_p0";

  PVScheme scheme = PVScheme::EnergyEnstrophy;
  std::optional<double> tau_apvm;  // default dt / 2
  double alpha_supg = 0.5;
  DepthScheme depth_scheme = DepthScheme::Projection;
  bool limiter = false;

  Integrator integrator = Integrator::SSPRK3;
  double dt = 100.0;
  int n_steps = 100;
  int picard_iters = 4;
  double solver_rtol = 1e-12;
  int solver_max_iters = 500;
  double cfl_max = 1.0;  // enforced for explicit stepping

  std::string test_case = "rest";
  std::uint64_t seed = 0;
  double D0 = 1000.0;
  double g = 9.80616;
  double f0 = 1e-4;

  int output_every = 1;
  int snapshot_every = 0;  // 0: no snapshots
  std::string output_dir = "out";
  std::string name = "run";

  // Convergence sweep: number of refinements of (nx, ny) and the final time.
  int refinements = 3;
  double final_time = 0.0;  // 0: 1.25 wave periods
};

// Parse "key = value" lines; '#' starts a comment. Unknown keys, malformed lines and bad
// values throw Error with the line number.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);
std::string dump_config(const RunConfig &c);

// Range and consistency checks (sizes, dt > 0, scheme and formulation, ...).
void validate_config(const RunConfig &c);

}  // namespace feec

#endif  // FEEC_CONFIG_HPP
