// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_CHECKS_HPP
#define FEEC_CHECKS_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "feec/advect_dg.hpp"
#include "feec/swe_dual.hpp"
#include "feec/test_cases.hpp"

// Measurements behind the structural and conservation properties of the discretization.
// Each returns raw numbers; callers decide the tolerances.
namespace feec
{

// Pass thresholds shared by the command-line checks and the acceptance suite.
namespace tolerance
{
inline constexpr double delta_squared = 1e-10;
inline constexpr double harmonic_threshold = 1e-8;
inline constexpr double energy = 1e-10;
inline constexpr double enstrophy_ee = 1e-9;
inline constexpr double enstrophy_apvm = 1e-12;
inline constexpr double pv_consistency = 1e-10;
inline constexpr double recovery = 1e-11;
inline constexpr double limiter = 1e-12;
inline constexpr double commuting = 1e-10;
inline constexpr double sigma_ratio = 1e-10;
inline constexpr double balance_drift = 1e-8;
inline constexpr double balance_mass = 1e-12;
inline constexpr double slope = 1.8;
inline constexpr double linear_gap = 1e-10;
}  // namespace tolerance

// Largest |entry| of d12 d01 computed in integer arithmetic.
long long d_squared_max(const Mesh &m);

// Worst relative size of delta_h(delta_h phi) over random V2 fields phi, measured against
// the same composition with absolute values (no cancellation).
double delta_squared_residual(const SpaceComplex &space, int n_fields, std::uint64_t seed);

struct HarmonicReport
{
  int rank = 0;              // singular values above threshold * largest
  std::vector<double> sv;    // normalized singular values, descending
};
// Harmonic parts of random 1-forms stacked as columns.
HarmonicReport harmonic_rank(const SpaceComplex &space, int n_forms, std::uint64_t seed,
                             double threshold);

struct CommutingReport
{
  double k0 = 0.0;  // max relative |H1 dual_D01 g + delta_h H0 g|
  double k1 = 0.0;  // max relative |H2 dual_D12 v - delta_h H1 v|
  double sigma_ratio_min = 0.0;  // over H0, H1, H2 (dense check)
};
CommutingReport commuting_check(const DualOperators &ops, int n_trials, std::uint64_t seed);

struct ConservationReport
{
  int states = 0;
  // |dE/dt| / scale, worst over states, per scheme (EE, APVM, SUPG).
  double energy[3] = {0.0, 0.0, 0.0};
  double enstrophy_ee = 0.0;        // |dZ/dt| / scale
  double enstrophy_apvm_max = 0.0;  // max dZ/dt / scale (signed; <= 0 is dissipative)
  // max |q_t| / |c| with f chosen so q = c.
  double pv_consistency_projection = 0.0;  // all schemes
  double pv_consistency_upwind = 0.0;      // donor-cell recovered flux
  double pv_consistency_dual = 0.0;        // primal-dual, projected and upwind flux (if run)
  double pv_consistency_dg_limited = 0.0;  // Q1 depth with limited-step flux (parallelograms)
  // Flux recovery: max |D_t + div F|_inf / |D_t|_inf (P0 everywhere, Q1 on parallelograms).
  double recovery_p0 = 0.0;
  double recovery_q1 = 0.0;
  // Limiter flux: max |div F_s - (S(D) - D)|_inf in depth units, and relative to D0.
  double limiter_divergence_abs = 0.0;
  double limiter_divergence_rel = 0.0;
  bool dg_checked = false;
  bool dual_checked = false;
};

// Random valid states on the given space. The dual checks need ops (may be null).
ConservationReport conservation_check(const std::shared_ptr<const SpaceComplex> &space,
                                      const DualOperators *ops, const Reference &ref,
                                      int n_states, std::uint64_t seed);

// f making the primal PV (V0) identically c.
Vector consistent_coriolis_primal(const SpaceComplex &space, const State &s, double c);
// f making the dual PV identically c.
Vector consistent_coriolis_dual(const DualOperators &ops, const State &s, double c);

// Random Q1 depth around D0 whose slopes overshoot neighbour means in many cells.
DGField rough_depth(const DGSpace &dg, double D0, std::uint64_t seed);

// Worst relative difference of the linear primal and primal-dual tendencies.
double linear_formulation_gap(const DualOperators &ops, const Reference &ref, int n_states,
                              std::uint64_t seed);

}  // namespace feec

#endif  // FEEC_CHECKS_HPP
