// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_ADVECT_DG_HPP
#define FEEC_ADVECT_DG_HPP

#include <functional>
#include <memory>

#include "feec/space.hpp"

namespace feec
{

// Element-local coefficients of a discontinuous depth field, one column per cell.
// Degree 0: the cell value. Degree 1 (parallelogram cells only): coefficients of
// 1, a, b, ab with a = 2s - 1, b = 2t - 1 in the reference coordinates of the cell,
// so row 0 is the cell mean.
using DGField = Eigen::MatrixXd;

// Element-local coefficients of a flux in the degree-1 RT space of the reference square
// (contravariant Piola), 12 per cell. Basis: x-component 1, s, s^2, t, st, s^2 t;
// y-component 1, t, t^2, s, st, t^2 s.
using RTLocal = Eigen::MatrixXd;

class DGSpace
{
public:
  DGSpace(std::shared_ptr<const SpaceComplex> space, int degree);

  const SpaceComplex &space() const { return *space_; }
  int degree() const { return degree_; }
  int local_size() const { return degree_ == 0 ? 1 : 4; }
  int num_cells() const { return space_->n2(); }

  DGField zeros() const { return DGField::Zero(local_size(), num_cells()); }
  // Cell means as a V2 coefficient vector.
  Vector means(const DGField &D) const;
  DGField from_means(const Vector &D) const;
  // L2 projection of a smooth function.
  DGField project(const std::function<double(const Vec2 &)> &fn) const;
  // Value in cell c at reference point (s, t); degree 0 ignores the point.
  double value(const DGField &D, int c, const Vec2 &ref) const;
  // Trace of D on local side k of cell c at edge parameter tau (counterclockwise).
  double trace(const DGField &D, int c, int k, double tau) const;
  // Reference point of side k at parameter tau.
  static Vec2 side_point(int k, double tau);
  // Reference coordinates of a physical point given in the frame of cell_points(c).
  Vec2 to_reference(int c, const Vec2 &x) const;
  // Integral of D over each cell.
  Vector cell_integrals(const DGField &D) const;

  // Reference Fortin system of the degree-1 RT space, factorized once.
  const Eigen::FullPivLU<Eigen::MatrixXd> &fortin_lu() const { return fortin_lu_; }

private:
  std::shared_ptr<const SpaceComplex> space_;
  int degree_;
  Eigen::FullPivLU<Eigen::MatrixXd> fortin_lu_;
};

// Value and divergence of a reference RT[1] field.
Vec2 rt1_value(const Eigen::Ref<const Eigen::VectorXd> &c, const Vec2 &ref);
double rt1_divergence(const Eigen::Ref<const Eigen::VectorXd> &c, const Vec2 &ref);

// Upwind DG depth tendency for the V1 velocity u: per element,
// int phi D_t = int grad phi . D u - sum_sides int phi D^u u.n.
DGField dg_depth_rhs(const DGSpace &dg, const DGField &D, const Vector &u);

struct RecoveredFlux
{
  int degree = 0;
  Vector F;        // degree 0: global V1 (RT0) coefficients
  RTLocal local;   // degree 1: reference RT[1] coefficients per cell
  double residual_norm = 0.0;  // max |D_t + div F| over the DG coefficients
};

// Local mass flux whose divergence reproduces the upwind DG tendency exactly: edge
// moments equal those of D^u u, interior moments against grad phi equal those of D u,
// and the curl-bubble moment equals that of D u.
RecoveredFlux recover_flux_fortin(const DGSpace &dg, const DGField &D, const Vector &u,
                                  const DGField &D_t);

// DG coefficients of div F for a degree-1 recovered or limiter flux.
DGField rt1_divergence_field(const DGSpace &dg, const RTLocal &F);
// Normal-flux moments (constant and linear) of F on every side, seen from each cell:
// rows 2k, 2k+1 for side k, outward.
Eigen::MatrixXd rt1_side_moments(const DGSpace &dg, const RTLocal &F);

// Barth-Jespersen scaling of each cell's slope toward its mean, so that the corner values
// lie within the range of the means of the cell and its side neighbours. Identity at P0.
DGField slope_limit(const DGSpace &dg, const DGField &D);

struct LimiterFlux
{
  RTLocal local;            // degree-1 reference coefficients, interior functions only
  double max_side_flux = 0.0;  // largest side normal-flux moment, in m^3 (compare to |S - D| * area)
};

// Interior flux F_s with zero normal flux on every side and div F_s = D_after - D_before.
LimiterFlux recover_limiter_flux(const DGSpace &dg, const DGField &D_before,
                                 const DGField &D_after);

// PV tendency driven by a DG depth with tendency D_t and a degree-1 flux F:
// M_D q_t = int grad lambda . q F - int lambda D_t q.
Vector pv_tendency_dg(const DGSpace &dg, const DGField &D, const DGField &D_t,
                      const RTLocal &F, const Vector &q);

// Solid-body advection of a DG depth by a fixed velocity with three-stage SSP Runge-Kutta,
// limiting after every stage when requested.
DGField advect_ssprk3(const DGSpace &dg, const DGField &D, const Vector &u, double dt,
                      bool limit);

}  // namespace feec

#endif  // FEEC_ADVECT_DG_HPP
