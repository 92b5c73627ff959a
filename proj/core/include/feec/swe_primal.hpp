// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_SWE_PRIMAL_HPP
#define FEEC_SWE_PRIMAL_HPP

#include <optional>

#include "feec/space.hpp"

namespace feec
{

struct ModelParams
{
  double g = 9.80616;
  Vector f;  // Coriolis parameter, V0 coefficients
  Vector b;  // bottom topography, V2 coefficients
};

struct State
{
  Vector u;  // V1 edge fluxes of the velocity
  Vector D;  // V2 depth
};

enum class PVScheme
{
  EnergyEnstrophy,
  APVM,
  SUPG
};

std::string to_string(PVScheme s);
PVScheme pv_scheme_from_string(const std::string &name);

struct StabilizationConfig
{
  PVScheme scheme = PVScheme::EnergyEnstrophy;
  double tau_apvm = 0.0;      // seconds
  double alpha_supg = 0.0;    // dimensionless
  double reference_speed = 1.0;  // m/s, regularizes the SUPG time scale at stagnation
};

// Tendency estimate of the PV equation used by the SUPG residual: (qD)_t is evaluated
// pointwise as q_t D + q D_t. Absent a context, q_t = 0 and D_t = -div F are used.
struct PVTendencyContext
{
  Vector q_t;  // V0
  Vector D_t;  // V2
};

void check_params(const SpaceComplex &space, const ModelParams &p);
void check_state(const SpaceComplex &space, const State &s);

// M0 zeta = D01^T M1 u.
Vector diagnose_vorticity(const SpaceComplex &space, const Vector &u);

// int lambda_i lambda_j D for P0 depth D.
SparseMatrix weighted_mass0(const SpaceComplex &space, const Vector &D);
// int w_i . w_j D for P0 depth D.
SparseMatrix weighted_mass1(const SpaceComplex &space, const Vector &D);

// M_D q = M0 (zeta + f).
Vector diagnose_pv(const SpaceComplex &space, const Vector &zeta, const Vector &D,
                   const Vector &f);
Vector diagnose_pv(const SpaceComplex &space, const State &s, const ModelParams &p);

// M1 F = int w . (D u).
Vector compute_mass_flux_F(const SpaceComplex &space, const State &s);

struct QFlux
{
  // int w_i . (q' F)^perp, evaluated pointwise; this enters the velocity equation.
  Vector coriolis_load;
  // V1 coefficients of the L2 projection of q' F.
  Vector Q;
};

QFlux compute_Q(const SpaceComplex &space, const State &s, const StabilizationConfig &cfg,
                const Vector &F, const Vector &q, const PVTendencyContext *ctx = nullptr);

// Cell means of g (D + b) + |u|^2 / 2.
Vector bernoulli_potential(const SpaceComplex &space, const State &s, const ModelParams &p);

// M1 u_t = -coriolis_load + B12^T Phi.
Vector velocity_rhs(const SpaceComplex &space, const State &s, const ModelParams &p,
                    const Vector &coriolis_load);

// D_t = -D12 F.
Vector depth_rhs_projection(const SpaceComplex &space, const Vector &F);

struct PrimalTendency
{
  Vector u_t, D_t;
  Vector F, zeta, q;
  QFlux Q;
};

// Full right-hand side. When F is given it replaces the projected mass flux (e.g. a
// flux recovered from an upwind depth update) and D_t = -D12 F.
PrimalTendency primal_rhs(const SpaceComplex &space, const State &s, const ModelParams &p,
                          const StabilizationConfig &cfg, const Vector *F = nullptr,
                          const PVTendencyContext *ctx = nullptr);

struct Diagnostics
{
  double mass = 0.0;
  double energy = 0.0;
  double enstrophy = 0.0;
  double total_vorticity = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double d_min = 0.0;
};

Diagnostics diagnostics(const SpaceComplex &space, const State &s, const ModelParams &p);

// Semi-discrete rates of the invariants along a tendency.
struct InvariantRates
{
  double energy = 0.0;
  double energy_scale = 0.0;  // sum of magnitudes of the terms that cancel
  double enstrophy = 0.0;
  double enstrophy_scale = 0.0;
  double pv_mass = 0.0;       // d/dt int q D
  double pv_mass_scale = 0.0;
  Vector q_t;
};

InvariantRates invariant_rates(const SpaceComplex &space, const State &s, const ModelParams &p,
                               const PrimalTendency &t);

}  // namespace feec

#endif  // FEEC_SWE_PRIMAL_HPP
