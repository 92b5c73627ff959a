// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_TIMESTEPPING_HPP
#define FEEC_TIMESTEPPING_HPP

#include <functional>
#include <memory>

#include <Eigen/SparseLU>

#include "feec/advect_dg.hpp"
#include "feec/config.hpp"
#include "feec/swe_dual.hpp"

namespace feec
{

// Depth became nonpositive during a step; carries the offending state for a dump.
class NonPositiveDepth : public Error
{
public:
  NonPositiveDepth(const std::string &what, State state, int cell)
    : Error(what), state_(std::move(state)), cell_(cell)
  {
  }
  const State &state() const { return state_; }
  int cell() const { return cell_; }

private:
  State state_;
  int cell_;
};

struct ModelOptions
{
  Formulation formulation = Formulation::Primal;
  DepthScheme depth_scheme = DepthScheme::Projection;
  bool limiter = false;
  StabilizationConfig stabilization;
};

// Right-hand side plus the mass flux F it used (D_t = -D12 F).
struct Rate
{
  State rate;
  Vector F;
};

// One discretization: space, parameters, formulation and depth scheme.
class Model
{
public:
  Model(std::shared_ptr<const SpaceComplex> space, ModelParams params, ModelOptions opt);

  const SpaceComplex &space() const { return *space_; }
  const std::shared_ptr<const SpaceComplex> &space_ptr() const { return space_; }
  const ModelParams &params() const { return params_; }
  const ModelOptions &options() const { return opt_; }
  // Built on first use for the primal-dual formulation.
  const DualOperators &dual() const;

  Rate rhs(const State &s, const PVTendencyContext *ctx = nullptr) const;
  // PV at the diagnostic points of the formulation (V0 or dual cells).
  Vector pv(const State &s) const;
  Diagnostics diagnostics(const State &s) const;
  // Stage postprocess: limiter on the depth (identity at P0). Returns the limiter flux.
  Vector limit(State &s) const;

private:
  std::shared_ptr<const SpaceComplex> space_;
  ModelParams params_;
  ModelOptions opt_;
  std::unique_ptr<DGSpace> dg_;
  mutable std::shared_ptr<const DualOperators> dual_;
};

using RhsFn = std::function<Rate(const State &)>;
using StageFn = std::function<Vector(State &)>;  // returns a limiter flux (or empty)

struct StepResult
{
  State state;
  // Effective flux over the step: D_new - D = -dt D12 flux.
  Vector flux;
};

// Three-stage strong-stability-preserving Runge-Kutta, written in increment form so a
// zero right-hand side leaves the state bitwise unchanged. The stage hook (limiter) runs
// on every stage and its fluxes enter the step flux.
StepResult step_ssprk3(const RhsFn &rhs, const State &s, double dt, const StageFn &stage = {});

// Throws NonPositiveDepth if any cell depth is <= 0.
void check_positive_depth(const State &s, const std::string &context);

// int w_i . perp(w_j): the Coriolis pairing on V1.
SparseMatrix coriolis_matrix(const SpaceComplex &space);

struct SemiImplicitStats
{
  int picard_iters = 0;
  double picard_increment = 0.0;  // last relative increment
  int krylov_iters = 0;           // summed over the step
  double krylov_residual = 0.0;   // worst over the step
};

// Centred (trapezoidal) step: x+ = x + dt/2 (N(x) + N(x+)), solved by Picard sweeps
//   (I - dt/2 L) x^{k+1} = x + dt/2 N(x) + dt/2 (N(x^k) - L x^k),
// with L the gravity-wave and Coriolis terms linearized about (0, D0) on an f0-plane.
// The linear solve eliminates u (Schur complement onto D, BiCGSTAB) and recovers D from
// its own equation so mass is conserved independently of the Krylov tolerance.
class SemiImplicitStepper
{
public:
  SemiImplicitStepper(std::shared_ptr<const SpaceComplex> space, double D0, double f0, double g,
                      double dt, int picard_iters, double rtol, int max_iters);

  StepResult step(const RhsFn &rhs, const State &s, SemiImplicitStats *stats = nullptr) const;
  // Apply L to a state (perturbation about the mean depth is implicit: B12^T 1 = 0).
  State linear(const State &s) const;
  // Solve (I - dt/2 L) x = r.
  State solve_linear(const State &r, const Vector *D_guess, SemiImplicitStats *stats) const;

  double dt() const { return dt_; }

private:
  std::shared_ptr<const SpaceComplex> space_;
  double D0_, f0_, g_, dt_;
  int picard_iters_;
  double rtol_;
  int max_iters_;
  SparseMatrix P_;
  Eigen::SparseLU<SparseMatrix> A_lu_;  // M1 + dt/2 f0 P
};

}  // namespace feec

#endif  // FEEC_TIMESTEPPING_HPP
