// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_DRIVER_HPP
#define FEEC_DRIVER_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "feec/config.hpp"
#include "feec/test_cases.hpp"
#include "feec/timestepping.hpp"

namespace feec
{

inline constexpr const char *kDiagnosticsHeader =
  "step,time,mass,energy,enstrophy,total_vorticity,q_min,q_max,d_min";

Reference reference_of(const RunConfig &c);
StabilizationConfig stabilization_of(const RunConfig &c);
std::shared_ptr<const SpaceComplex> space_of(const RunConfig &c);

// Smallest sqrt(cell area); the length scale of the CFL number.
double mesh_spacing(const SpaceComplex &space);
// (max |u| + sqrt(g D0)) dt / h.
double cfl_number(const SpaceComplex &space, const State &s, double g, double D0, double dt);

// A configured simulation advanced one step at a time.
class Simulation
{
public:
  explicit Simulation(const RunConfig &config);

  const RunConfig &config() const { return config_; }
  const Model &model() const { return *model_; }
  const State &state() const { return state_; }
  const TestCase &test_case() const { return case_; }
  int step_index() const { return step_; }
  double time() const { return step_ * config_.dt; }
  double initial_cfl() const { return cfl_; }
  const std::vector<std::string> &warnings() const { return warnings_; }

  // Advance by dt. Errors are rethrown with the step and time attached; a nonpositive
  // depth rethrows NonPositiveDepth carrying the failed state.
  void step();
  // Mass change of the last step relative to the initial mass.
  double last_mass_change() const { return last_mass_change_; }
  const SemiImplicitStats &last_stats() const { return stats_; }

private:
  RunConfig config_;
  std::unique_ptr<Model> model_;
  std::unique_ptr<SemiImplicitStepper> implicit_;
  TestCase case_;
  State state_;
  int step_ = 0;
  double cfl_ = 0.0;
  double mass0_ = 0.0;
  double last_mass_change_ = 0.0;
  SemiImplicitStats stats_;
  std::vector<std::string> warnings_;
  // Previous step for the SUPG backward-difference tendency.
  Vector q_prev_, D_prev_;
};

struct RunSummary
{
  int steps = 0;
  double time = 0.0;
  Diagnostics initial, final;
  double mass_drift = 0.0;  // relative
  double energy_drift = 0.0;
  double enstrophy_drift = 0.0;
  double vorticity_drift = 0.0;  // relative to the total |f| integral
  double max_step_mass_change = 0.0;
  double velocity_drift = 0.0;  // |u_N - u_0| / |u_0| (0 when u_0 = 0)
  double balance_residual = 0.0;
  double cfl = 0.0;
  double setup_seconds = 0.0;
  double run_seconds = 0.0;
  long krylov_iters_total = 0;
  int krylov_iters_max = 0;
  double krylov_residual_max = 0.0;
  double picard_increment_max = 0.0;
  std::vector<std::string> warnings;
  std::string csv_path, summary_path;
  std::vector<std::string> snapshots;
};

// Diagnostics CSV row with 17 significant digits.
std::string diagnostics_row(int step, double time, const Diagnostics &d);

// Legacy ASCII VTK unstructured grid: cell data D, b, q (mean over corners) and the
// velocity at cell centroids.
void write_vtk(const std::string &path, const Model &model, const State &s, double time);

std::string summary_json(const RunConfig &c, const RunSummary &s);

// Full run with CSV, snapshots and JSON summary under output_dir. Progress goes to log
// when given.
RunSummary run(const RunConfig &config, std::ostream *log = nullptr);

struct ConvergenceRow
{
  int nx = 0, ny = 0;
  double h = 0.0;
  double dt = 0.0;
  int steps = 0;
  double error = 0.0;  // L2 depth error against the projected exact solution
  double slope = 0.0;  // against the previous row (0 for the first)
};

// Linear gravity-wave refinement sweep of the configured mesh and formulation.
std::vector<ConvergenceRow> gravity_wave_convergence(const RunConfig &config,
                                                     std::ostream *log = nullptr);
std::string convergence_table(const std::vector<ConvergenceRow> &rows);

}  // namespace feec

#endif  // FEEC_DRIVER_HPP
