// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_SWE_DUAL_HPP
#define FEEC_SWE_DUAL_HPP

#include <memory>

#include "feec/feec_ops.hpp"
#include "feec/swe_primal.hpp"

namespace feec
{

// Everything the primal-dual formulation needs besides the primal space: the dual space on
// the centroid dual mesh, the three Hodge stars, cell overlaps and dual-edge flux rules.
struct DualOperators
{
  std::shared_ptr<const SpaceComplex> primal;
  std::shared_ptr<const SpaceComplex> dual;
  HodgeStar H0, H1, H2;
  // overlap(c, j) = area of primal cell c inside dual cell j.
  SparseMatrix overlap;

  // Points on dual edge e, split at the crossing with primal edge e; nds is the right
  // normal of the dual edge direction times the arc weight, so sum F(x) . nds is the
  // exact flux of a primal V1 field across the dual edge.
  struct FluxPoint
  {
    int cell;
    int piece;
    Vec2 x;  // in the frame of cell_points(cell)
    Vec2 nds;
  };
  std::vector<std::vector<FluxPoint>> edge_rules;
};

std::shared_ptr<const DualOperators> build_dual_operators(std::shared_ptr<const SpaceComplex> primal,
                                                          const HodgeOptions &opt = {});

// Flux of a primal V1 field across every dual edge, along the dual edge's right normal.
Vector dual_edge_fluxes(const DualOperators &ops, const Vector &F);

// v = H1^-1 u, with the round trip checked to 1e-11.
Vector dual_velocity(const DualOperators &ops, const Vector &u);
// Strong dual curl: cell values of d v on the dual mesh.
Vector dual_vorticity(const DualOperators &ops, const Vector &v);
// int over each dual cell of the P0 primal depth.
Vector dual_depth_integrals(const DualOperators &ops, const Vector &D);
// q_d int_j D = A_j zeta_d + int_j f, per dual cell.
Vector diagnose_dual_pv(const DualOperators &ops, const Vector &zeta_d, const Vector &D,
                        const Vector &f);

struct DualState
{
  Vector v;       // dual V1
  Vector zeta_d;  // dual V2 cell values
  Vector q_d;     // dual V2 cell values
};

DualState diagnose_dual(const DualOperators &ops, const State &s, const ModelParams &p);

struct DualQ
{
  Vector Qtilde;    // dual V1: upwind q_d times the dual-edge flux of F
  Vector flux;      // dual-edge fluxes of F
  Vector q_upwind;  // per dual edge
};

DualQ dual_pv_step_flux(const DualOperators &ops, const Vector &q_d, const Vector &F);

// u_t = M1^-1 B12^T Phi - H1 Qtilde.
Vector dual_velocity_rhs(const DualOperators &ops, const State &s, const ModelParams &p,
                         const Vector &Qtilde);

struct DualTendency
{
  Vector u_t, D_t, F;
  DualState dual;
  DualQ Q;
};

// Full primal-dual right-hand side; F overrides the projected mass flux when given.
DualTendency dual_rhs(const DualOperators &ops, const State &s, const ModelParams &p,
                      const Vector *F = nullptr);

// Dual PV tendency implied by a tendency: int_j D q_t = A_j zeta_d_t - q_d int_j D_t.
Vector dual_pv_tendency(const DualOperators &ops, const State &s, const DualTendency &t);

// Linearized tendencies about rest with mean depth D0 and constant f0 (b, K and all
// products of perturbations dropped). Primal: Coriolis load f0 int w . perp(u);
// primal-dual: H1 of f0 times the dual-edge fluxes of u.
State linear_primal_rhs(const SpaceComplex &space, const State &perturbation, double D0,
                        double f0, double g);
State linear_dual_rhs(const DualOperators &ops, const State &perturbation, double D0, double f0,
                      double g);

}  // namespace feec

#endif  // FEEC_SWE_DUAL_HPP
